"""Optimization of h over the weight polynomial f, the divisor power r and c.

For fixed (c, r) the f-dependent part of h is the generalized Rayleigh
quotient a^T S a / a^T G a in the monomial coefficients a, so the best f is
an extreme generalized eigenvector of (S, G).  Both gap families want that
quotient as large as possible: the large-gap family subtracts it, the
small-gap family adds it.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import solve_triangular
from scipy.optimize import minimize

from .errors import ConditioningError, ParameterError, SearchFailureError
from .functional import (
    MAX_DEGREE,
    FunctionalParams,
    Mode,
    PolynomialF,
    check_c,
    check_r,
    eval_h_quadrature,
    gram_matrix,
    series_bilinear_matrix,
)

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
R_TOLERANCE = 1e-4
C_RESOLUTION = 1e-4
C_SCAN_STEP = 0.05
_COND_LIMIT = 1e14
_GAUGE_EPS = 1e-8

DEFAULT_C_RANGE = {Mode.LARGE: (0.5, 6.0), Mode.SMALL: (0.1, 1.5)}


def _check_degree(degree: int) -> int:
    if int(degree) != degree or not 0 <= degree <= MAX_DEGREE:
        raise ParameterError(f"degree must be an integer in [0, {MAX_DEGREE}], got {degree}")
    return int(degree)


def _check_r_bounds(r_bounds) -> tuple[float, float]:
    lo, hi = (float(x) for x in r_bounds)
    check_r(lo)
    check_r(hi)
    if lo > hi:
        raise ParameterError(f"r bounds must be ordered, got {r_bounds}")
    return lo, hi


@dataclass(frozen=True)
class GapMatrices:
    c: float
    r: float
    degree: int
    G: np.ndarray = field(repr=False)
    S: np.ndarray = field(repr=False)


def build_gap_matrices(c: float, r: float, degree: int) -> GapMatrices:
    c, r, degree = check_c(c), check_r(r), _check_degree(degree)
    raw = series_bilinear_matrix(c, r, degree).matrix
    S = 0.5 * (raw + raw.T)
    return GapMatrices(c, r, degree, gram_matrix(r, degree), S)


@dataclass(frozen=True)
class EigenOptimum:
    h_opt: float
    f: PolynomialF
    quotient: float
    gauge_fixed: bool  # False when a_0 vanished and f has unit G-norm instead


def _cholesky(G: np.ndarray) -> np.ndarray:
    try:
        L = np.linalg.cholesky(G)
    except np.linalg.LinAlgError as exc:
        raise ConditioningError(f"Gram matrix not positive definite: {exc}") from None
    if np.linalg.cond(G) > _COND_LIMIT:
        raise ConditioningError(f"Gram matrix condition number {np.linalg.cond(G):.2e} too large; lower the degree")
    return L


def max_rayleigh(mats: GapMatrices) -> tuple[float, np.ndarray]:
    """Largest generalized eigenvalue of (S, G) and a G-unit eigenvector."""
    L = _cholesky(mats.G)
    half = solve_triangular(L, mats.S, lower=True)
    C = solve_triangular(L, half.T, lower=True).T
    C = 0.5 * (C + C.T)
    vals, vecs = np.linalg.eigh(C)
    a = solve_triangular(L.T, vecs[:, -1], lower=False)
    return float(vals[-1]), a


def _normalize(a: np.ndarray) -> tuple[np.ndarray, bool]:
    if abs(a[0]) > _GAUGE_EPS * np.max(np.abs(a)):
        return a / a[0], True
    k = int(np.argmax(np.abs(a)))
    return a * np.sign(a[k]), False


def h_from_quotient(c: float, r: float, mode: Mode, quotient: float) -> float:
    return c + mode.sign * (2.0 * r / math.pi) * quotient


def optimal_f_eigen(c: float, r: float, degree: int, mode) -> EigenOptimum:
    mode = Mode.parse(mode)
    mats = build_gap_matrices(c, r, degree)
    q, a = max_rayleigh(mats)
    a, fixed = _normalize(a)
    return EigenOptimum(h_from_quotient(mats.c, mats.r, mode, q), PolynomialF(tuple(a)), q, fixed)


def optimal_f_nelder_mead(c: float, r: float, mode, degree: int = 2) -> EigenOptimum:
    """Derivative-free search over f with f(0) = 1; cross-check for the eigen route."""
    mode = Mode.parse(mode)
    mats = build_gap_matrices(c, r, degree)
    if degree == 0:
        q = float(mats.S[0, 0] / mats.G[0, 0])
        return EigenOptimum(h_from_quotient(mats.c, mats.r, mode, q), PolynomialF((1.0,)), q, True)

    def neg_quotient(tail):
        a = np.concatenate(([1.0], tail))
        return -float(a @ mats.S @ a) / float(a @ mats.G @ a)

    res = minimize(neg_quotient, np.zeros(degree), method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-15, "maxiter": 20000 * degree,
                            "maxfev": 20000 * degree})
    q = -float(res.fun)
    f = PolynomialF((1.0, *res.x))
    return EigenOptimum(h_from_quotient(mats.c, mats.r, mode, q), f, q, True)


@dataclass(frozen=True)
class OptimizationResult:
    r: float
    coeffs: PolynomialF
    c: float
    h_value: float
    mode: Mode
    engine_agreement: float
    degree: int
    gauge_fixed: bool = True

    def to_dict(self) -> dict:
        return {"c": self.c, "r": self.r, "mode": self.mode.value, "degree": self.degree,
                "h_value": self.h_value, "coeffs": list(self.coeffs.coeffs),
                "engine_agreement": self.engine_agreement, "gauge_fixed": self.gauge_fixed}


def _badness(mode: Mode, h: float) -> float:
    # quantity to minimize: large gaps want small h, small gaps want large h
    return h if mode is Mode.LARGE else -h


def golden_section(fun: Callable[[float], float], lo: float, hi: float, tol: float):
    """Minimize ``fun`` on [lo, hi]; returns (x_best, f_best, evaluations)."""
    evals: dict[float, float] = {}

    def g(x):
        if x not in evals:
            evals[x] = fun(x)
        return evals[x]

    g(lo)
    g(hi)
    a, b = lo, hi
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = g(x1), g(x2)
    while b - a > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = g(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = g(x2)
    best = min(sorted(evals), key=lambda x: evals[x])
    return best, evals[best], evals


def _finish(c: float, r: float, degree: int, mode: Mode, opt: EigenOptimum) -> OptimizationResult:
    check = eval_h_quadrature(FunctionalParams(c, r, mode), opt.f)
    return OptimizationResult(r=r, coeffs=opt.f, c=c, h_value=opt.h_opt, mode=mode,
                              engine_agreement=abs(check - opt.h_opt), degree=degree,
                              gauge_fixed=opt.gauge_fixed)


def _best_r(c: float, degree: int, mode: Mode, r_bounds, tol: float) -> tuple[float, float]:
    lo, hi = r_bounds
    if hi - lo <= tol:
        return lo, optimal_f_eigen(c, lo, degree, mode).h_opt
    r_best, bad, _ = golden_section(
        lambda r: _badness(mode, optimal_f_eigen(c, r, degree, mode).h_opt), lo, hi, tol)
    return r_best, _badness(mode, bad)


def optimize_r(c: float, degree: int, mode, r_bounds=(1.0, 6.0), tol: float = R_TOLERANCE) -> OptimizationResult:
    """Golden-section search in r over the eigen-optimal h."""
    mode = Mode.parse(mode)
    c, degree = check_c(c), _check_degree(degree)
    r_bounds = _check_r_bounds(r_bounds)
    r_best, _ = _best_r(c, degree, mode, r_bounds, tol)
    return _finish(c, r_best, degree, mode, optimal_f_eigen(c, r_best, degree, mode))


def _on_good_side(mode: Mode, h: float) -> bool:
    return h < 1.0 if mode is Mode.LARGE else h > 1.0


@dataclass(frozen=True)
class CriticalResult:
    c_star: float
    witness: OptimizationResult
    bracket: tuple[float, float]
    scan: list = field(repr=False)


def _pmap(fn, items, threads):
    items = list(items)
    if threads is not None and threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def find_critical_c(degree: int, mode, r_bounds=(1.0, 6.0), c_range=None,
                    step: float = C_SCAN_STEP, resolution: float = C_RESOLUTION,
                    threads: int | None = None) -> CriticalResult:
    """Crossing point of the optimized h through 1.

    Large gaps: the largest c with h(c) < 1 (a lower bound for lambda).
    Small gaps: the smallest c with h(c) > 1 (an upper bound for mu).
    c_star is always the certified side of the final bisection bracket.
    """
    mode = Mode.parse(mode)
    degree = _check_degree(degree)
    r_bounds = _check_r_bounds(r_bounds)
    c_lo, c_hi = DEFAULT_C_RANGE[mode] if c_range is None else c_range
    n_steps = int(round((c_hi - c_lo) / step))
    grid = [check_c(c_lo + i * step) for i in range(n_steps + 1)]

    def h_at(c):
        return _best_r(c, degree, mode, r_bounds, R_TOLERANCE)[1]

    scan = list(zip(grid, _pmap(h_at, grid, threads)))
    good = [_on_good_side(mode, h) for _, h in scan]
    bracket = None
    if mode is Mode.LARGE:
        for i in range(len(scan) - 2, -1, -1):
            if good[i] and not good[i + 1]:
                bracket = (scan[i][0], scan[i + 1][0])
                break
    else:
        for i in range(1, len(scan)):
            if good[i] and not good[i - 1]:
                bracket = (scan[i - 1][0], scan[i][0])
                break
    if bracket is None:
        raise SearchFailureError(f"no crossing of h=1 found for c in [{c_lo}, {c_hi}]", scan)

    lo, hi = bracket  # h crosses 1 between lo and hi
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if _on_good_side(mode, h_at(mid)) == (mode is Mode.LARGE):
            lo = mid
        else:
            hi = mid
    c_star = lo if mode is Mode.LARGE else hi
    witness = optimize_r(c_star, degree, mode, r_bounds)
    return CriticalResult(c_star, witness, (lo, hi), scan)


@dataclass(frozen=True)
class ScanRow:
    c: float
    r: float
    mode: Mode
    degree: int
    h_opt: float
    coeffs: tuple[float, ...]


def grid_scan(c_values: Sequence[float], r_values: Sequence[float], modes: Sequence,
              degree: int, threads: int | None = None) -> list[ScanRow]:
    """Eigen-optimal h on every (mode, r, c) grid point, ordered by (mode, r, c)."""
    degree = _check_degree(degree)
    modes = sorted({Mode.parse(m) for m in modes}, key=lambda m: m.value)
    points = [(m, check_r(r), check_c(c)) for m in modes for r in sorted(set(r_values))
              for c in sorted(set(c_values))]

    def one(point):
        m, r, c = point
        opt = optimal_f_eigen(c, r, degree, m)
        return ScanRow(c, r, m, degree, opt.h_opt, opt.f.coeffs)

    return _pmap(one, points, threads)
