"""Run configuration and machine-readable result records."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np


@dataclass
class RunConfig:
    command: str
    parameters: dict[str, Any] = field(default_factory=dict)


def _plain(value):
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if hasattr(value, "value") and hasattr(value, "name"):  # enums
        return value.value
    return value


@dataclass
class ResultRecord:
    command: str
    inputs: dict[str, Any]
    outputs: dict[str, Any]
    diagnostics: dict[str, Any] = field(default_factory=dict)
    wall_time: float = 0.0

    def to_dict(self) -> dict:
        return _plain(asdict(self))

    def to_json(self) -> str:
        # json emits floats via repr, the shortest round-trip form
        return json.dumps(self.to_dict(), indent=2, allow_nan=False)

    @classmethod
    def from_json(cls, text: str) -> "ResultRecord":
        return cls(**json.loads(text))


def flatten(data: dict, prefix: str = "") -> dict:
    out = {}
    for key, value in data.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            out.update(flatten(value, name + "."))
        elif isinstance(value, (list, tuple)) and value and isinstance(value[0], dict):
            continue  # tables are emitted separately
        elif isinstance(value, (list, tuple)):
            out[name] = ";".join(repr(v) if isinstance(v, float) else str(v) for v in value)
        else:
            out[name] = value
    return out


def to_csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if v is None else (repr(float(v)) if isinstance(v, (float, np.floating)) else v)
                         for v in row])
    return buf.getvalue()
