"""Brute-force evaluation of the discrete gap functional at finite height T.

    h(c) = c - sum_{nk <= K} a_k a_{nk} g_c(n) Lambda(n) n^{-1/2} / sum_{k <= K} a_k^2

with K = floor(T / log(T)^2), g_c(n) = 2 sin(pi c log n / log T) / (pi log n)
and a_k = d_r(k) k^{-1/2} f(log(K/k) / log K), times lambda(k) for small gaps.
All prime powers are kept in the numerator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arith import DivisorParams, SieveTables, divisor_r_table, factor_tables, mangoldt_table
from .errors import ParameterError
from .functional import DEFAULT_QUADRATURE, FunctionalParams, Mode, PolynomialF, eval_h_quadrature

T_MIN = 1.0e3
K_MIN = 20


def height_to_length(T: float) -> int:
    """K = floor(T / (log T)^2)."""
    return int(math.floor(T / math.log(T) ** 2))


@dataclass(frozen=True)
class OracleParams:
    T: float
    r: float
    mode: Mode
    c: float

    def __post_init__(self):
        T = float(self.T)
        if not (math.isfinite(T) and T >= T_MIN):
            raise ParameterError(f"T must be >= {T_MIN:g}, got {self.T}")
        if not (math.isfinite(self.r) and self.r >= 1.0):
            raise ParameterError(f"r must be >= 1, got {self.r}")
        if not (math.isfinite(self.c) and self.c > 0.0):
            raise ParameterError(f"c must be positive, got {self.c}")
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "c", float(self.c))
        object.__setattr__(self, "mode", Mode.parse(self.mode))

    @property
    def K(self) -> int:
        return height_to_length(self.T)


def coefficients(params: OracleParams, f: PolynomialF, tables: SieveTables,
                 divisor_values: np.ndarray | None = None) -> np.ndarray:
    """a_k for k = 1..K, stored at index k-1."""
    K = params.K
    if K < K_MIN:
        raise ParameterError(f"K={K} < {K_MIN}: T={params.T:g} too small")
    if tables.limit < K:
        raise ParameterError(f"sieve limit {tables.limit} below K={K}")
    ft = factor_tables(tables, K)
    d = divisor_r_table(DivisorParams(params.r), tables, factors=ft) if divisor_values is None \
        else np.asarray(divisor_values, dtype=float)
    k = np.arange(1, K + 1, dtype=float)
    a = d[1 : K + 1] / np.sqrt(k) * f(np.log(K / k) / math.log(K))
    if params.mode is Mode.SMALL:
        a = a * ft.liouville[1 : K + 1]
    return a


def _prime_powers(tables: SieveTables, K: int):
    for p in tables.primes:
        p = int(p)
        if p > K:
            break
        logp = math.log(p)
        pw = p
        while pw <= K:
            yield pw, logp
            pw *= p


def numerator_terms(params: OracleParams, f: PolynomialF, tables: SieveTables,
                    strategy: str = "prime_powers",
                    divisor_values: np.ndarray | None = None) -> dict[int, float]:
    """Contribution of each n to the numerator, keyed by n.

    ``prime_powers`` enumerates p^j <= K directly; ``mangoldt`` walks every
    2 <= n <= K and weights by a tabulated Lambda(n), zeros included.
    """
    a = coefficients(params, f, tables, divisor_values)
    K = params.K
    log_T = math.log(params.T)
    if strategy == "prime_powers":
        support = list(_prime_powers(tables, K))
    elif strategy == "mangoldt":
        lam = mangoldt_table(tables, K)
        support = [(n, float(lam[n])) for n in range(2, K + 1)]
    else:
        raise ParameterError(f"unknown enumeration strategy {strategy!r}")
    terms = {}
    for n, big_lambda in support:
        if big_lambda == 0.0:
            terms[n] = 0.0
            continue
        log_n = math.log(n)
        g = 2.0 * math.sin(math.pi * params.c * log_n / log_T) / (math.pi * log_n)
        m = K // n
        pair_sum = float(np.dot(a[:m], a[n - 1 : n * m : n]))
        terms[n] = g * big_lambda / math.sqrt(n) * pair_sum
    return terms


def denominator(params: OracleParams, f: PolynomialF, tables: SieveTables,
                divisor_values: np.ndarray | None = None) -> float:
    a = coefficients(params, f, tables, divisor_values)
    return math.fsum(a * a)


def discrete_h(params: OracleParams, f: PolynomialF, tables: SieveTables,
               strategy: str = "prime_powers", divisor_values: np.ndarray | None = None) -> float:
    terms = numerator_terms(params, f, tables, strategy, divisor_values)
    num = math.fsum(terms[n] for n in sorted(terms))
    return params.c - num / denominator(params, f, tables, divisor_values)


@dataclass(frozen=True)
class StudyRow:
    T: float
    K: int
    discrete_h: float
    asymptotic_h: float
    abs_error: float

    def to_dict(self) -> dict:
        return {"T": self.T, "K": self.K, "discrete_h": self.discrete_h,
                "asymptotic_h": self.asymptotic_h, "abs_error": self.abs_error}


def convergence_study(T_list, r: float, mode, c: float, f: PolynomialF,
                      tables: SieveTables) -> list[StudyRow]:
    """Discrete vs asymptotic h at each height; no pass/fail judgement."""
    T_list = [float(T) for T in T_list]
    if not T_list:
        raise ParameterError("T list is empty")
    if any(b <= a for a, b in zip(T_list, T_list[1:])):
        raise ParameterError(f"T list must be strictly ascending, got {T_list}")
    mode = Mode.parse(mode)
    asym = eval_h_quadrature(FunctionalParams(c, r, mode), f, DEFAULT_QUADRATURE)
    rows = []
    for T in T_list:
        params = OracleParams(T, r, mode, c)
        value = discrete_h(params, f, tables)
        rows.append(StudyRow(T, params.K, value, asym, abs(value - asym)))
    return rows
