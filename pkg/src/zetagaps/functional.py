"""Main-term evaluation of the gap functional h(c).

For a weight polynomial f, divisor power r and gap length c,

    h(c) = c -/+ (2r/pi) * I / D

with D = int_0^1 (1-u)^(r^2-1) f(u)^2 du and
I = int_0^1 (1-u)^(r^2-1) f(u) int_0^u sin(pi c v)/v f(u-v) dv du.
The minus sign belongs to the large-gap family (coefficients d_r(k)), the
plus sign to the small-gap family (coefficients lambda(k) d_r(k)).

Two independent engines are provided: a Gauss-Jacobi x Gauss-Legendre
product rule, and an exact power-series/Beta-function expansion.  The
r = 1 symmetric-kernel form is a third route used for cross-checks.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.special import roots_jacobi

from .errors import AccuracyError, OutOfBranchError, ParameterError

MAX_DEGREE = 6
SERIES_PI_C_CAP = 25.0
C_MAX = 10.0
R_MIN, R_MAX = 1.0, 6.0

_KERNEL_EPS = 1e-8
_R1_DIAG_EPS = 1e-10
_SERIES_REL_STOP = 1e-18
_SERIES_MAX_TERMS = 2000


class Mode(str, enum.Enum):
    LARGE = "large"
    SMALL = "small"

    @property
    def sign(self) -> int:
        """Sign in front of (2r/pi) I/D."""
        return -1 if self is Mode.LARGE else 1

    @classmethod
    def parse(cls, value) -> "Mode":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"large": cls.LARGE, "largegaps": cls.LARGE, "large_gaps": cls.LARGE,
                   "small": cls.SMALL, "smallgaps": cls.SMALL, "small_gaps": cls.SMALL}
        try:
            return aliases[key]
        except KeyError:
            raise ParameterError(f"mode must be 'large' or 'small', got {value!r}") from None


@dataclass(frozen=True)
class PolynomialF:
    """Weight polynomial f(x) = a_0 + a_1 x + ... + a_d x^d on [0, 1]."""

    coeffs: tuple[float, ...]

    def __post_init__(self):
        coeffs = tuple(float(a) for a in self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        if not coeffs:
            raise ParameterError("polynomial needs at least one coefficient")
        if len(coeffs) - 1 > MAX_DEGREE:
            raise ParameterError(f"polynomial degree {len(coeffs) - 1} exceeds cap {MAX_DEGREE}")
        if not all(math.isfinite(a) for a in coeffs):
            raise ParameterError(f"polynomial coefficients must be finite, got {coeffs}")
        if not any(coeffs):
            raise ParameterError("polynomial coefficients are all zero")

    @classmethod
    def parse(cls, text: str) -> "PolynomialF":
        try:
            return cls(tuple(float(t) for t in str(text).split(",") if t.strip()))
        except ValueError as exc:
            raise ParameterError(f"cannot parse coefficients {text!r}: {exc}") from None

    @classmethod
    def constant(cls) -> "PolynomialF":
        return cls((1.0,))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=float)

    def __call__(self, x):
        return npoly.polyval(x, self.array)

    def scaled(self, alpha: float) -> "PolynomialF":
        return PolynomialF(tuple(alpha * a for a in self.coeffs))

    def padded(self, degree: int) -> np.ndarray:
        out = np.zeros(degree + 1)
        out[: len(self.coeffs)] = self.coeffs
        return out

    def __str__(self) -> str:
        return ",".join(repr(a) for a in self.coeffs)


def check_c(c: float, upper: float = C_MAX) -> float:
    c = float(c)
    if not (math.isfinite(c) and 0.0 < c <= upper):
        raise ParameterError(f"c must satisfy 0 < c <= {upper:g}, got {c}")
    return c


def check_r(r: float) -> float:
    r = float(r)
    if not (math.isfinite(r) and R_MIN <= r <= R_MAX):
        raise ParameterError(f"r must satisfy {R_MIN:g} <= r <= {R_MAX:g}, got {r}")
    return r


@dataclass(frozen=True)
class FunctionalParams:
    c: float
    r: float
    mode: Mode

    def __post_init__(self):
        object.__setattr__(self, "c", check_c(self.c))
        object.__setattr__(self, "r", check_r(self.r))
        object.__setattr__(self, "mode", Mode.parse(self.mode))


@dataclass(frozen=True)
class QuadratureSpec:
    outer_nodes: int = 64
    inner_nodes: int = 64
    tolerance: float = 1e-9

    def __post_init__(self):
        if int(self.outer_nodes) < 8 or int(self.inner_nodes) < 8:
            raise ParameterError("quadrature node counts must be >= 8")
        if not (self.tolerance > 0):
            raise ParameterError(f"quadrature tolerance must be positive, got {self.tolerance}")
        object.__setattr__(self, "outer_nodes", int(self.outer_nodes))
        object.__setattr__(self, "inner_nodes", int(self.inner_nodes))

    def refined(self) -> "QuadratureSpec":
        return QuadratureSpec(int(math.ceil(1.5 * self.outer_nodes)),
                              int(math.ceil(1.5 * self.inner_nodes)), self.tolerance)


DEFAULT_QUADRATURE = QuadratureSpec()


@lru_cache(maxsize=256)
def jacobi_rule(alpha: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights on [0, 1] for the weight (1-u)^alpha."""
    x, w = roots_jacobi(n, alpha, 0.0)
    u = 0.5 * (x + 1.0)
    w = w * 2.0 ** (-alpha - 1.0)
    u.setflags(write=False)
    w.setflags(write=False)
    return u, w


@lru_cache(maxsize=64)
def legendre_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes/weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    t = 0.5 * (x + 1.0)
    w = 0.5 * w
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


def sine_kernel(c: float, v):
    """sin(pi c v)/v, equal to pi c at the removable singularity."""
    v = np.asarray(v, dtype=float)
    x = math.pi * c * v
    small = np.abs(x) < _KERNEL_EPS
    safe = np.where(small, 1.0, v)
    return np.where(small, math.pi * c, np.sin(x) / safe)


def quadrature_parts(c: float, r: float, f: PolynomialF, outer_nodes: int,
                     inner_nodes: int) -> tuple[float, float]:
    """(I, D) by the product rule with the given node counts."""
    u, wu = jacobi_rule(r * r - 1.0, outer_nodes)
    t, wt = legendre_rule(inner_nodes)
    v = u[:, None] * t[None, :]
    inner = (sine_kernel(c, v) * f(u[:, None] - v) * wt[None, :]).sum(axis=1) * u
    fu = f(u)
    return float(np.dot(wu, fu * inner)), float(np.dot(wu, fu * fu))


def _h_from_parts(params: FunctionalParams, num: float, den: float) -> float:
    return params.c + params.mode.sign * (2.0 * params.r / math.pi) * num / den


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    base_value: float
    residual: float
    nodes: tuple[int, int]


def eval_h_quadrature_detail(params: FunctionalParams, f: PolynomialF,
                             quad: QuadratureSpec = DEFAULT_QUADRATURE) -> QuadratureResult:
    base = _h_from_parts(params, *quadrature_parts(params.c, params.r, f,
                                                   quad.outer_nodes, quad.inner_nodes))
    fine_spec = quad.refined()
    fine = _h_from_parts(params, *quadrature_parts(params.c, params.r, f,
                                                   fine_spec.outer_nodes, fine_spec.inner_nodes))
    residual = abs(fine - base)
    if not residual <= quad.tolerance:
        raise AccuracyError(
            f"quadrature refinement disagreement {residual:.3e} > {quad.tolerance:.1e} "
            f"at c={params.c}, r={params.r}")
    return QuadratureResult(fine, base, residual, (fine_spec.outer_nodes, fine_spec.inner_nodes))


def eval_h_quadrature(params: FunctionalParams, f: PolynomialF,
                      quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """h(c) by Gauss-Jacobi (outer, weight folded in) and Gauss-Legendre (inner) quadrature."""
    return eval_h_quadrature_detail(params, f, quad).value


def beta_sequence(s: float, count: int) -> np.ndarray:
    """[B(1, s), B(2, s), ..., B(count, s)] via B(n+1, s) = B(n, s) n / (n + s)."""
    out = np.empty(count)
    b = 1.0 / s
    for n in range(1, count + 1):
        out[n - 1] = b
        b *= n / (n + s)
    return out


def gram_matrix(r: float, degree: int) -> np.ndarray:
    """G_ij = int_0^1 (1-u)^(r^2-1) u^(i+j) du = B(i+j+1, r^2)."""
    betas = beta_sequence(r * r, 2 * degree + 1)
    idx = np.add.outer(np.arange(degree + 1), np.arange(degree + 1))
    return betas[idx]


@dataclass(frozen=True)
class SeriesMatrix:
    """Unsymmetrized bilinear form B[i, m] = int w u^i int_0^u K(v) (u-v)^m dv du."""

    matrix: np.ndarray
    max_terms: int
    error_bound: float


def _series_entry(x: float, s: float, i: int, m: int) -> tuple[float, int, float]:
    n = i + m + 2
    beta = 1.0 / s
    for j in range(1, n):
        beta *= j / (j + s)
    term = x / (m + 1) * beta
    terms = [term]
    x2 = x * x
    k = 0
    running = term
    peak = abs(term)
    while k < _SERIES_MAX_TERMS:
        nk = n + 2 * k
        ratio = (x2 * (2 * k + 1) / (2 * k + 3)
                 / ((2 * k + m + 2) * (2 * k + m + 3))
                 * nk * (nk + 1) / ((nk + s) * (nk + 1 + s)))
        term = -term * ratio
        k += 1
        terms.append(term)
        running += term
        peak = max(peak, abs(term))
        if ratio < 1.0 and abs(term) <= _SERIES_REL_STOP * max(abs(running), 1e-300):
            break
    else:
        raise AccuracyError(f"series did not converge for x={x}, i={i}, m={m}")
    total = math.fsum(terms)
    err = 4.0 * np.finfo(float).eps * math.fsum(abs(t) for t in terms)
    return total, len(terms), err


@lru_cache(maxsize=4096)
def _series_matrix_cached(c: float, r: float, degree: int) -> SeriesMatrix:
    x = math.pi * c
    s = r * r
    mat = np.empty((degree + 1, degree + 1))
    most = 0
    err = 0.0
    for i in range(degree + 1):
        for m in range(degree + 1):
            mat[i, m], nterms, e = _series_entry(x, s, i, m)
            most = max(most, nterms)
            err = max(err, e)
    mat.setflags(write=False)
    return SeriesMatrix(mat, most, err)


def series_bilinear_matrix(c: float, r: float, degree: int) -> SeriesMatrix:
    if math.pi * c > SERIES_PI_C_CAP:
        raise OutOfBranchError(
            f"series engine requires pi*c <= {SERIES_PI_C_CAP:g}, got pi*c={math.pi * c:.4g}; "
            "use the quadrature engine")
    if not 0 <= degree <= MAX_DEGREE:
        raise ParameterError(f"degree must be in [0, {MAX_DEGREE}], got {degree}")
    return _series_matrix_cached(float(c), float(r), int(degree))


@dataclass(frozen=True)
class SeriesResult:
    value: float
    max_terms: int
    error_bound: float


def eval_h_series_detail(params: FunctionalParams, f: PolynomialF) -> SeriesResult:
    sm = series_bilinear_matrix(params.c, params.r, f.degree)
    a = f.array
    num = float(a @ sm.matrix @ a)
    den = float(a @ gram_matrix(params.r, f.degree) @ a)
    value = _h_from_parts(params, num, den)
    bound = (2.0 * params.r / math.pi) * sm.error_bound * float(np.abs(a).sum() ** 2) / den
    return SeriesResult(value, sm.max_terms, bound)


def eval_h_series(params: FunctionalParams, f: PolynomialF) -> float:
    """h(c) from the exact Taylor/Beta expansion of the double integral."""
    return eval_h_series_detail(params, f).value


def r1_parts(c: float, f: PolynomialF, nodes: int) -> tuple[float, float]:
    t, w = legendre_rule(nodes)
    diff = t[:, None] - t[None, :]
    near = np.abs(diff) < _R1_DIAG_EPS
    safe = np.where(near, 1.0, diff)
    kernel = np.where(near, c, np.sin(math.pi * c * diff) / (math.pi * safe))
    fw = f(t) * w
    return float(fw @ kernel @ fw), float(np.dot(w, f(t) ** 2))


def eval_h_r1(c: float, f: PolynomialF, mode, quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """r = 1 form with the symmetric kernel sin(pi c (u-v)) / (pi (u-v)) over the unit square."""
    c = check_c(c)
    sign = Mode.parse(mode).sign
    values = []
    for n in (quad.outer_nodes, quad.refined().outer_nodes):
        num, den = r1_parts(c, f, n)
        values.append(c + sign * num / den)
    if not abs(values[1] - values[0]) <= quad.tolerance:
        raise AccuracyError(f"r=1 quadrature refinement disagreement {abs(values[1] - values[0]):.3e}")
    return values[1]


def eval_h(params: FunctionalParams, f: PolynomialF, engine: str = "quadrature",
           quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    if engine == "quadrature":
        return eval_h_quadrature(params, f, quad)
    if engine == "series":
        return eval_h_series(params, f)
    raise ParameterError(f"unknown engine {engine!r}")


def parse_floats(text: str | Iterable[float]) -> list[float]:
    if isinstance(text, str):
        try:
            return [float(t) for t in text.split(",") if t.strip()]
        except ValueError as exc:
            raise ParameterError(f"cannot parse number list {text!r}: {exc}") from None
    return [float(t) for t in text]

