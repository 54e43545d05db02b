"""Sieved arithmetic functions and the sine integral.

Everything is driven by one smallest-prime-factor table.  Scalar lookups
(`von_mangoldt`, `liouville`, `divisor_r`) factor a single ``n`` by walking
that table; the ``*_table`` functions build whole arrays at once for the
oracle sums.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError

MAX_SIEVE_LIMIT = 10**8
DEFAULT_SIEVE_CAP = 10**7

_SI_SWITCH = 4.0
_SI_MAX = 1.0e4
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class SieveTables:
    """Smallest prime factor for ``0..limit`` (entries 0 and 1 are 0) and the primes."""

    limit: int
    spf: np.ndarray = field(repr=False)
    primes: np.ndarray = field(repr=False)

    def check(self, n: int) -> None:
        if n < 1 or n > self.limit:
            raise ParameterError(f"n={n} outside sieve range [1, {self.limit}]")


@dataclass(frozen=True)
class DivisorParams:
    r: float

    def __post_init__(self):
        if not math.isfinite(self.r) or self.r < 1.0:
            raise ParameterError(f"divisor parameter r must be >= 1, got {self.r}")


def build_sieve(limit: int) -> SieveTables:
    """Linear-memory smallest-prime-factor sieve up to ``limit`` inclusive."""
    if int(limit) != limit or not 2 <= limit <= MAX_SIEVE_LIMIT:
        raise ParameterError(f"sieve limit must be an integer in [2, {MAX_SIEVE_LIMIT}], got {limit}")
    limit = int(limit)
    spf = np.zeros(limit + 1, dtype=np.int32)
    for p in range(2, math.isqrt(limit) + 1):
        if spf[p] == 0:
            block = spf[p * p :: p]
            block[block == 0] = p
    idx = np.flatnonzero(spf == 0)
    idx = idx[idx >= 2]
    spf[idx] = idx
    spf.setflags(write=False)
    idx.setflags(write=False)
    return SieveTables(limit=limit, spf=spf, primes=idx)


def factorize(n: int, tables: SieveTables) -> list[tuple[int, int]]:
    """Prime factorization of ``n`` as ``[(p, e), ...]`` with ascending ``p``."""
    tables.check(n)
    out: list[tuple[int, int]] = []
    spf = tables.spf
    while n > 1:
        p = int(spf[n])
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        out.append((p, e))
    return out


def von_mangoldt(n: int, tables: SieveTables) -> float:
    fac = factorize(n, tables)
    if len(fac) == 1:
        return math.log(fac[0][0])
    return 0.0


def liouville(n: int, tables: SieveTables) -> int:
    big_omega = sum(e for _, e in factorize(n, tables))
    return -1 if big_omega % 2 else 1


def prime_power_divisor(e: int, r: float) -> float:
    """d_r(p^e) = r (r+1) ... (r+e-1) / e!, accumulated as a running product."""
    value = 1.0
    for j in range(e):
        value *= (r + j) / (j + 1)
    return value


def divisor_r(n: int, params: DivisorParams, tables: SieveTables) -> float:
    value = 1.0
    for _, e in factorize(n, tables):
        value *= prime_power_divisor(e, params.r)
    return value


def _dyadic_blocks(upto: int):
    lo = 2
    while lo <= upto:
        hi = min(2 * lo - 1, upto)
        yield lo, hi + 1
        lo = hi + 1


@dataclass(frozen=True)
class FactorTables:
    """Per-n factor data: ``cofactor[n]`` is n with its smallest-prime power removed."""

    upto: int
    exponent: np.ndarray = field(repr=False)
    cofactor: np.ndarray = field(repr=False)
    liouville: np.ndarray = field(repr=False)


def factor_tables(tables: SieveTables, upto: int | None = None) -> FactorTables:
    """Vectorized factor data for ``1..upto``.

    Each n depends only on ``n // spf[n] <= n/2``, so processing dyadic blocks
    in increasing order keeps every dependency already filled.
    """
    upto = tables.limit if upto is None else int(upto)
    if not 1 <= upto <= tables.limit:
        raise ParameterError(f"upto={upto} outside sieve range [1, {tables.limit}]")
    spf = tables.spf[: upto + 1].astype(np.int64)
    exponent = np.zeros(upto + 1, dtype=np.int16)
    cofactor = np.ones(upto + 1, dtype=np.int64)
    lam = np.ones(upto + 1, dtype=np.int8)
    for lo, hi in _dyadic_blocks(upto):
        n = np.arange(lo, hi, dtype=np.int64)
        p = spf[lo:hi]
        m = n // p
        same = spf[m] == p
        exponent[lo:hi] = np.where(same, exponent[m] + 1, 1)
        cofactor[lo:hi] = np.where(same, cofactor[m], m)
        lam[lo:hi] = -lam[m]
    lam[0] = 0
    for arr in (exponent, cofactor, lam):
        arr.setflags(write=False)
    return FactorTables(upto=upto, exponent=exponent, cofactor=cofactor, liouville=lam)


def liouville_table(tables: SieveTables, upto: int | None = None) -> np.ndarray:
    """Array ``L`` with ``L[n] = liouville(n)`` for ``1 <= n <= upto`` (``L[0] = 0``)."""
    return factor_tables(tables, upto).liouville


def mangoldt_table(tables: SieveTables, upto: int | None = None) -> np.ndarray:
    ft = factor_tables(tables, upto)
    out = np.zeros(ft.upto + 1)
    pp = np.flatnonzero(ft.cofactor == 1)
    pp = pp[pp >= 2]
    out[pp] = np.log(tables.spf[pp].astype(float))
    return out


def divisor_r_table(params: DivisorParams, tables: SieveTables, upto: int | None = None,
                    factors: FactorTables | None = None) -> np.ndarray:
    """Array ``D`` with ``D[n] = divisor_r(n)`` for ``1 <= n <= upto`` (``D[0] = 0``)."""
    ft = factors if factors is not None else factor_tables(tables, upto)
    emax = int(ft.exponent.max()) if ft.upto >= 2 else 0
    per_power = np.array([prime_power_divisor(e, params.r) for e in range(emax + 1)])
    out = np.zeros(ft.upto + 1)
    if ft.upto >= 1:
        out[1] = 1.0
    for lo, hi in _dyadic_blocks(ft.upto):
        out[lo:hi] = out[ft.cofactor[lo:hi]] * per_power[ft.exponent[lo:hi]]
    return out


def _si_series(x: float) -> float:
    # sum_k (-1)^k x^(2k+1) / ((2k+1) (2k+1)!)
    x2 = x * x
    term = x
    total = x
    k = 0
    while True:
        k += 1
        term *= -x2 / ((2 * k) * (2 * k + 1))
        contrib = term / (2 * k + 1)
        total += contrib
        if abs(contrib) < _EPS * abs(total) * 0.25:
            return total


def _si_continued_fraction(x: float) -> float:
    # E1(ix) by modified Lentz; Si(x) = pi/2 + Im(e^{-ix} * CF)
    tiny = 1e-300
    b = complex(1.0, x)
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(2, 10_000):
        a = -float((i - 1) * (i - 1))
        b += 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h *= delta
        if abs(delta.real - 1.0) + abs(delta.imag) < _EPS:
            break
    h *= cmath.exp(complex(0.0, -x))
    return math.pi / 2 + h.imag


def sine_integral(x: float) -> float:
    """Si(x) = integral of sin(t)/t over [0, x], for 0 <= x <= 1e4."""
    if not (0.0 <= x <= _SI_MAX):
        raise ParameterError(f"sine_integral needs 0 <= x <= {_SI_MAX:g}, got {x}")
    if x == 0.0:
        return 0.0
    if x <= _SI_SWITCH:
        return _si_series(x)
    return _si_continued_fraction(x)
