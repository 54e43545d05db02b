"""The published inequalities h(c) < 1 / h(c) > 1 used as a regression suite."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import ParameterError
from .functional import (
    FunctionalParams,
    Mode,
    PolynomialF,
    eval_h_quadrature,
    eval_h_r1,
    eval_h_series,
)

AGREEMENT_TOL = 1e-8
ENGINES = ("quadrature", "series", "both")


@dataclass(frozen=True)
class Checkpoint:
    name: str
    c: float
    r: float
    mode: Mode
    f: PolynomialF
    symmetric_form: bool = False  # r = 1 checks also go through the symmetric kernel

    @property
    def relation(self) -> str:
        return "<" if self.mode is Mode.LARGE else ">"

    def holds(self, h: float) -> bool:
        return h < 1.0 if self.mode is Mode.LARGE else h > 1.0


CHECKPOINTS: tuple[Checkpoint, ...] = (
    Checkpoint("divisor-large", 2.337, 2.2, Mode.LARGE, PolynomialF((1.0,))),
    Checkpoint("divisor-small", 0.5172, 1.1, Mode.SMALL, PolynomialF((1.0,))),
    Checkpoint("theorem-large", 2.69, 3.1, Mode.LARGE, PolynomialF((1.0, 10.0, 39.0))),
    Checkpoint("theorem-small", 0.5155, 1.23, Mode.SMALL, PolynomialF((1.0, 0.99, -0.42))),
    Checkpoint("r1-small", 0.5179, 1.0, Mode.SMALL, PolynomialF((1.0, 0.46526, -0.46526)), True),
    Checkpoint("r1-large", 1.97, 1.0, Mode.LARGE, PolynomialF((1.0, 17.9426, -17.9426)), True),
)


def checkpoint_by_name(name: str) -> Checkpoint:
    for cp in CHECKPOINTS:
        if cp.name == name:
            return cp
    raise ParameterError(f"unknown checkpoint {name!r}; known: {', '.join(c.name for c in CHECKPOINTS)}")


def with_coeffs(cp: Checkpoint, f: PolynomialF) -> Checkpoint:
    return replace(cp, f=f)


@dataclass(frozen=True)
class CheckOutcome:
    checkpoint: Checkpoint
    values: dict
    residual: float | None
    passed: bool

    def line(self) -> str:
        cp = self.checkpoint
        shown = ", ".join(f"{k}={v:.12f}" for k, v in self.values.items())
        verdict = "PASS" if self.passed else "FAIL"
        return (f"{verdict}  {cp.name:<14} h({cp.c:g}) {cp.relation} 1  "
                f"[r={cp.r:g}, mode={cp.mode.value}, f={cp.f}]  {shown}")


def run_checkpoint(cp: Checkpoint, engine: str = "both") -> CheckOutcome:
    if engine not in ENGINES:
        raise ParameterError(f"engine must be one of {ENGINES}, got {engine!r}")
    params = FunctionalParams(cp.c, cp.r, cp.mode)
    values = {}
    if engine in ("quadrature", "both"):
        values["quadrature"] = eval_h_quadrature(params, cp.f)
    if engine in ("series", "both"):
        values["series"] = eval_h_series(params, cp.f)
    if cp.symmetric_form:
        values["symmetric"] = eval_h_r1(cp.c, cp.f, cp.mode)
    spread = max(values.values()) - min(values.values())
    residual = spread if len(values) > 1 else None
    passed = all(cp.holds(v) for v in values.values()) and (residual is None or residual <= AGREEMENT_TOL)
    if not all(math.isfinite(v) for v in values.values()):
        passed = False
    return CheckOutcome(cp, values, residual, passed)
