"""CheckReport: the verdict record every checker returns."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field


@dataclass
class CheckReport:
    check: str
    n: int
    tuples: int
    worst_margin: float
    tolerance: float
    passed: bool
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "check": self.check,
            "n": self.n,
            "tuples": self.tuples,
            "worst_margin": _finite(self.worst_margin),
            "tolerance": self.tolerance,
            "pass": bool(self.passed),
            "details": _jsonable(self.details),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2)

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"{verdict} {self.check} n={self.n} tuples={self.tuples} worst={self.worst_margin:.3e} tol={self.tolerance:.1e}"


REPORT_KEYS = {"check": str, "n": int, "tuples": int, "worst_margin": (float, int, type(None)),
               "tolerance": (float, int), "pass": bool, "details": dict}


def validate_report_json(data: dict) -> None:
    """Raise ValueError unless data has the documented report shape."""
    missing = set(REPORT_KEYS) - set(data)
    if missing:
        raise ValueError(f"report missing keys {sorted(missing)}")
    for key, typ in REPORT_KEYS.items():
        if not isinstance(data[key], typ):
            raise ValueError(f"report key {key!r} has type {type(data[key]).__name__}")


def _finite(x):
    x = float(x)
    return x if math.isfinite(x) else None


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "tolist"):
        return _jsonable(obj.tolist())
    if isinstance(obj, float):
        return _finite(obj)
    if isinstance(obj, (bool, int, str)) or obj is None:
        return obj
    return str(obj)
