import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from zetagaps.arith import sine_integral
from zetagaps.errors import AccuracyError, OutOfBranchError, ParameterError
from zetagaps.functional import (
    FunctionalParams,
    Mode,
    PolynomialF,
    QuadratureSpec,
    eval_h_quadrature,
    eval_h_r1,
    eval_h_series,
    eval_h_series_detail,
    gram_matrix,
    quadrature_parts,
    sine_kernel,
)

PAPER_CASES = [
    (2.69, 3.1, (1, 10, 39), Mode.LARGE),
    (0.5155, 1.23, (1, 0.99, -0.42), Mode.SMALL),
    (2.337, 2.2, (1,), Mode.LARGE),
    (0.5172, 1.1, (1,), Mode.SMALL),
]


def random_poly(rng, max_degree=4, bound=50.0):
    deg = int(rng.integers(0, max_degree + 1))
    return PolynomialF(tuple(rng.uniform(-bound, bound, size=deg + 1)))


@pytest.mark.parametrize("c, r, coeffs, mode", PAPER_CASES)
def test_paper_inequalities(c, r, coeffs, mode):
    p = FunctionalParams(c, r, mode)
    f = PolynomialF(coeffs)
    hq = eval_h_quadrature(p, f)
    hs = eval_h_series(p, f)
    assert abs(hq - hs) <= 1e-8
    if mode is Mode.LARGE:
        assert hq < 1
    else:
        assert hq > 1


def test_unit_case_against_adaptive_quadrature():
    inner = lambda u: integrate.quad(lambda v: math.sin(math.pi * v) / v if v else math.pi, 0, u,
                                     epsabs=1e-13, epsrel=1e-13)[0]
    double, _ = integrate.quad(inner, 0, 1, epsabs=1e-13, epsrel=1e-13)
    expected = 1 - 2 / math.pi * double
    closed = 1 - 2 / math.pi * (sine_integral(math.pi) - 2 / math.pi)
    assert expected == pytest.approx(closed, abs=1e-12)
    p = FunctionalParams(1.0, 1.0, Mode.LARGE)
    assert eval_h_series(p, PolynomialF.constant()) == pytest.approx(expected, abs=1e-12)
    assert eval_h_quadrature(p, PolynomialF.constant()) == pytest.approx(expected, abs=1e-12)


def test_inner_kernel_integral_is_sine_integral():
    # f = 1: the inner integral is Si(pi c u)
    from zetagaps.functional import legendre_rule

    c = 2.69
    t, w = legendre_rule(64)
    for u in (0.1, 0.5, 0.93, 1.0):
        v = u * t
        approx = float(np.dot(w, sine_kernel(c, v))) * u
        assert approx == pytest.approx(sine_integral(math.pi * c * u), abs=1e-13)


def test_weighted_inner_integral_against_adaptive():
    c, r = 2.69, 3.1
    f = PolynomialF((1, 10, 39))
    w = r * r - 1

    def outer(u):
        inner = integrate.quad(lambda v: sine_kernel(c, v) * f(u - v), 0, u, epsabs=1e-13)[0]
        return (1 - u) ** w * f(u) * inner

    num = integrate.quad(outer, 0, 1, epsabs=1e-13, limit=200)[0]
    den = integrate.quad(lambda u: (1 - u) ** w * f(u) ** 2, 0, 1, epsabs=1e-13)[0]
    expected = c - 2 * r / math.pi * num / den
    assert eval_h_quadrature(FunctionalParams(c, r, Mode.LARGE), f) == pytest.approx(expected, abs=1e-10)


@pytest.mark.parametrize("mode", list(Mode))
def test_zero_c_limit(mode):
    rng = np.random.default_rng(3)
    for _ in range(5):
        p = FunctionalParams(1e-8, float(rng.uniform(1, 6)), mode)
        f = random_poly(rng)
        assert abs(eval_h_quadrature(p, f)) < 1e-6
        assert abs(eval_h_series(p, f)) < 1e-6


@pytest.mark.parametrize("mode", list(Mode))
def test_zero_c_first_order(mode):
    # h(c) = c (1 -/+ 2 r Q) + O(c^3) with Q the c = 0 quotient of int_0^u f(u-v) dv
    c, r = 1e-8, 2.0
    f = PolynomialF((1.0, 3.0))
    w = r * r - 1
    num = integrate.quad(lambda u: (1 - u) ** w * f(u) * integrate.quad(lambda v: f(u - v), 0, u)[0],
                         0, 1, epsabs=1e-14)[0]
    den = integrate.quad(lambda u: (1 - u) ** w * f(u) ** 2, 0, 1, epsabs=1e-14)[0]
    first_order = c * (1 + mode.sign * 2 * r * num / den)
    h = eval_h_quadrature(FunctionalParams(c, r, mode), f)
    assert abs(h - first_order) < 1e-10
    assert abs(eval_h_series(FunctionalParams(c, r, mode), f) - first_order) < 1e-10


def test_cross_engine_grid():
    rng = np.random.default_rng(4)
    polys = [random_poly(rng) for _ in range(50)]
    worst = 0.0
    for c in (0.3, 0.5, 1.0, 1.97, 2.69, 3.0):
        for r in (1.0, 1.23, 2.2, 3.1):
            p = FunctionalParams(c, r, Mode.LARGE)
            for f in polys:
                worst = max(worst, abs(eval_h_series(p, f) - eval_h_quadrature(p, f)))
    assert worst <= 1e-8


def test_r1_reduction():
    rng = np.random.default_rng(5)
    for _ in range(20):
        c = float(rng.uniform(0.05, 6.0))
        f = random_poly(rng)
        mode = Mode.LARGE if rng.random() < 0.5 else Mode.SMALL
        assert eval_h_r1(c, f, mode) == pytest.approx(
            eval_h_quadrature(FunctionalParams(c, 1.0, mode), f), abs=1e-9)


def test_r1_paper_values():
    assert eval_h_r1(0.5179, PolynomialF((1, 0.46526, -0.46526)), Mode.SMALL) > 1
    assert eval_h_r1(1.97, PolynomialF((1, 17.9426, -17.9426)), Mode.LARGE) < 1


def test_mode_antisymmetry():
    rng = np.random.default_rng(6)
    for _ in range(30):
        c, r = float(rng.uniform(0.1, 5)), float(rng.uniform(1, 4))
        f = random_poly(rng)
        large = eval_h_series(FunctionalParams(c, r, Mode.LARGE), f) - c
        small = eval_h_series(FunctionalParams(c, r, Mode.SMALL), f) - c
        assert small == pytest.approx(-large, abs=1e-12)


def test_method_limits():
    rng = np.random.default_rng(7)
    for _ in range(100):
        r = float(rng.uniform(1, 6))
        f = random_poly(rng, max_degree=6)
        for mode in Mode:
            assert eval_h_quadrature(FunctionalParams(0.49, r, mode), f) < 1
            assert eval_h_quadrature(FunctionalParams(6.2, r, mode), f) > 1


@settings(max_examples=40, deadline=None)
@given(
    c=st.floats(0.05, 7.5),
    r=st.floats(1.0, 6.0),
    coeffs=st.lists(st.floats(-50, 50), min_size=1, max_size=7).filter(
        lambda a: max(abs(x) for x in a) > 1e-3),
    alpha=st.sampled_from([7.0, -3.0, 0.01, 1e3]),
)
def test_scale_invariance(c, r, coeffs, alpha):
    f = PolynomialF(tuple(coeffs))
    p = FunctionalParams(c, r, Mode.LARGE)
    assert eval_h_series(p, f.scaled(alpha)) == pytest.approx(eval_h_series(p, f), abs=1e-12)
    assert eval_h_quadrature(p, f.scaled(alpha)) == pytest.approx(eval_h_quadrature(p, f), abs=1e-12)
    if c <= 6:
        assert eval_h_r1(c, f.scaled(alpha), Mode.SMALL) == pytest.approx(
            eval_h_r1(c, f, Mode.SMALL), abs=1e-12)


def test_series_scaled_by_seven():
    for c, r, coeffs, mode in PAPER_CASES:
        p = FunctionalParams(c, r, mode)
        f = PolynomialF(coeffs)
        assert eval_h_series(p, f.scaled(7)) == pytest.approx(eval_h_series(p, f), abs=1e-12)


def test_gram_matrix_against_quadrature():
    for r in (1.0, 1.23, 3.1):
        G = gram_matrix(r, 4)
        for i in range(5):
            for j in range(5):
                ref = integrate.quad(lambda u: (1 - u) ** (r * r - 1) * u ** (i + j), 0, 1,
                                     epsabs=1e-15, epsrel=1e-13)[0]
                assert G[i, j] == pytest.approx(ref, rel=1e-11)


def test_series_out_of_branch():
    with pytest.raises(OutOfBranchError):
        eval_h_series(FunctionalParams(25 / math.pi + 1e-6, 2.0, Mode.LARGE), PolynomialF.constant())
    # quadrature still covers the range
    assert math.isfinite(eval_h_quadrature(FunctionalParams(10.0, 2.0, Mode.LARGE), PolynomialF.constant()))


def test_series_reports_diagnostics():
    res = eval_h_series_detail(FunctionalParams(2.69, 3.1, Mode.LARGE), PolynomialF((1, 10, 39)))
    assert res.max_terms > 5 and res.error_bound < 1e-12


def test_accuracy_error_on_coarse_rule():
    with pytest.raises(AccuracyError):
        eval_h_quadrature(FunctionalParams(10.0, 6.0, Mode.LARGE), PolynomialF((1, -5, 3, 8, -2, 1, 1)),
                          QuadratureSpec(8, 8, 1e-12))


def test_quadrature_parts_symmetric_in_mode():
    num, den = quadrature_parts(1.0, 2.0, PolynomialF((1, 2)), 64, 64)
    assert den > 0
    h_l = eval_h_quadrature(FunctionalParams(1.0, 2.0, "large"), PolynomialF((1, 2)))
    assert h_l == pytest.approx(1.0 - 4 / math.pi * num / den, abs=1e-12)


@pytest.mark.parametrize("kwargs", [
    dict(c=0.0, r=2.0, mode="large"), dict(c=10.5, r=2.0, mode="large"),
    dict(c=1.0, r=0.5, mode="large"), dict(c=1.0, r=6.5, mode="small"),
    dict(c=1.0, r=2.0, mode="medium"), dict(c=float("nan"), r=2.0, mode="large"),
])
def test_params_validation(kwargs):
    with pytest.raises(ParameterError):
        FunctionalParams(**kwargs)


def test_polynomial_validation():
    with pytest.raises(ParameterError):
        PolynomialF((0.0, 0.0))
    with pytest.raises(ParameterError):
        PolynomialF(tuple(range(1, 9)))
    with pytest.raises(ParameterError):
        PolynomialF(())
    with pytest.raises(ParameterError):
        QuadratureSpec(4, 64)
    with pytest.raises(ParameterError):
        QuadratureSpec(64, 64, 0.0)
    assert PolynomialF.parse("1, 10,39").coeffs == (1.0, 10.0, 39.0)
    assert PolynomialF((1, 2, 3))(0.5) == pytest.approx(2.75)


def test_kernel_removable_singularity():
    c = 1.7
    assert sine_kernel(c, 0.0) == pytest.approx(math.pi * c)
    assert sine_kernel(c, 1e-12) == pytest.approx(math.pi * c)
    assert sine_kernel(c, 0.3) == pytest.approx(math.sin(math.pi * c * 0.3) / 0.3)
