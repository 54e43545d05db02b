import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from zetagaps.arith import (
    DivisorParams,
    build_sieve,
    divisor_r,
    divisor_r_table,
    liouville,
    liouville_table,
    mangoldt_table,
    prime_power_divisor,
    sine_integral,
    von_mangoldt,
)
from zetagaps.arith import _si_continued_fraction, _si_series
from zetagaps.errors import ParameterError


def trial_factor(n):
    out = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def eratosthenes_count(n):
    flags = bytearray([1]) * (n + 1)
    flags[0:2] = b"\x00\x00"
    for p in range(2, math.isqrt(n) + 1):
        if flags[p]:
            flags[p * p :: p] = bytearray(len(range(p * p, n + 1, p)))
    return sum(flags)


class TestSieve:
    def test_limit_ten(self):
        t = build_sieve(10)
        assert t.spf[4] == 2 and t.spf[9] == 3
        assert list(t.primes) == [2, 3, 5, 7]

    def test_limit_two(self):
        assert list(build_sieve(2).primes) == [2]

    def test_prime_count_million(self, oracle_sieve):
        assert len(oracle_sieve.primes) == eratosthenes_count(10**6) == 78498

    @pytest.mark.parametrize("bad", [1, 0, -5, 10**8 + 1, 2.5])
    def test_limit_range(self, bad):
        with pytest.raises(ParameterError):
            build_sieve(bad)

    def test_spf_invariant(self, small_sieve):
        spf = small_sieve.spf
        for n in range(2, small_sieve.limit + 1):
            p = int(spf[n])
            assert n % p == 0
            assert min(trial_factor(n)) == p

    def test_tables_are_read_only(self, small_sieve):
        with pytest.raises(ValueError):
            small_sieve.spf[5] = 3


class TestScalarFunctions:
    def test_von_mangoldt(self, small_sieve):
        assert von_mangoldt(8, small_sieve) == pytest.approx(math.log(2), abs=0)
        assert von_mangoldt(6, small_sieve) == 0.0
        assert von_mangoldt(1, small_sieve) == 0.0

    def test_liouville(self, small_sieve):
        assert liouville(12, small_sieve) == -1
        assert liouville(4, small_sieve) == 1
        assert liouville(1, small_sieve) == 1

    @pytest.mark.parametrize("r", [1.0, 1.23, 2.2, 3.1])
    def test_divisor_at_prime(self, small_sieve, r):
        for p in (2, 3, 97, 9973):
            assert divisor_r(p, DivisorParams(r), small_sieve) == pytest.approx(r, rel=1e-15)

    def test_divisor_examples(self, small_sieve):
        assert divisor_r(6, DivisorParams(2.0), small_sieve) == 4.0
        d4 = 2.2 * 3.2 / 2
        expected = d4 * 2.2
        assert divisor_r(12, DivisorParams(2.2), small_sieve) == pytest.approx(expected, rel=1e-15)
        assert divisor_r(1, DivisorParams(2.2), small_sieve) == 1.0

    def test_prime_power_matches_gamma(self):
        for r in (1.0, 1.5, 3.1):
            for e in range(8):
                ref = math.exp(math.lgamma(e + r) - math.lgamma(r) - math.lgamma(e + 1))
                assert prime_power_divisor(e, r) == pytest.approx(ref, rel=1e-12)

    def test_out_of_range(self, small_sieve):
        for fn in (von_mangoldt, liouville):
            with pytest.raises(ParameterError):
                fn(small_sieve.limit + 1, small_sieve)
        with pytest.raises(ParameterError):
            divisor_r(0, DivisorParams(2.0), small_sieve)

    def test_divisor_params_reject_small_r(self):
        with pytest.raises(ParameterError):
            DivisorParams(0.99)


class TestMultiplicativeProperties:
    def test_multiplicativity(self, oracle_sieve):
        rng = np.random.default_rng(1)
        table = divisor_r_table(DivisorParams(2.7), oracle_sieve)
        count = 0
        while count < 1000:
            m, n = (int(x) for x in rng.integers(1, 1001, size=2))
            if math.gcd(m, n) != 1:
                continue
            count += 1
            assert table[m * n] == pytest.approx(table[m] * table[n], rel=1e-12)

    @pytest.mark.parametrize("r", [1.0, 1.23, 3.1])
    def test_submultiplicativity(self, r, oracle_sieve):
        table = divisor_r_table(DivisorParams(r), oracle_sieve)
        rng = np.random.default_rng(2)
        m = rng.integers(1, 1001, size=1000)
        n = rng.integers(1, 1001, size=1000)
        assert np.all(table[m * n] <= table[m] * table[n] * (1 + 1e-12))

    def test_r2_is_divisor_count(self, small_sieve):
        N = small_sieve.limit
        tau = np.zeros(N + 1, dtype=np.int64)
        for i in range(1, N + 1):
            tau[i::i] += 1
        table = divisor_r_table(DivisorParams(2.0), small_sieve)
        assert np.array_equal(table[1:], tau[1:].astype(float))
        for n in (1, 360, 9240, 10**4):
            assert divisor_r(n, DivisorParams(2.0), small_sieve) == tau[n]

    def test_liouville_against_factorization(self, small_sieve):
        lam = liouville_table(small_sieve)
        for n in range(1, small_sieve.limit + 1):
            assert lam[n] == (-1) ** sum(trial_factor(n).values())
        assert abs(int(lam[1:].sum())) <= small_sieve.limit

    def test_mangoldt_table(self, small_sieve):
        table = mangoldt_table(small_sieve)
        for n in range(1, 2000):
            fac = trial_factor(n)
            ref = math.log(next(iter(fac))) if len(fac) == 1 else 0.0
            assert table[n] == ref
            assert von_mangoldt(n, small_sieve) == ref


class TestSineIntegral:
    def test_zero(self):
        assert sine_integral(0.0) == 0.0

    def test_asymptote(self):
        assert abs(sine_integral(1000.0) - math.pi / 2) < 1e-3

    def test_exact_series_at_one(self):
        exact = Fraction(0)
        fact = 1
        for k in range(200):
            if k:
                fact *= (2 * k) * (2 * k + 1)
            exact += Fraction((-1) ** k, (2 * k + 1) * fact)
        assert abs(sine_integral(1.0) - float(exact)) < 1e-15

    def test_against_high_precision(self):
        xs = np.concatenate([np.linspace(1e-6, 30.0, 601), np.geomspace(30.0, 1e4, 200)])
        mpmath.mp.dps = 30
        worst = max(abs(sine_integral(float(x)) - float(mpmath.si(x))) for x in xs)
        assert worst < 1e-13

    def test_branch_overlap(self):
        for x in np.linspace(2.0, 7.0, 51):
            assert abs(_si_series(x) - _si_continued_fraction(x)) < 1e-13

    @pytest.mark.parametrize("bad", [-1e-9, 1e4 + 1, float("nan")])
    def test_domain(self, bad):
        with pytest.raises(ParameterError):
            sine_integral(bad)
