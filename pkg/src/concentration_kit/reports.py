"""Shared output records: analytic bound reports and pass/fail check records."""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Iterable, Sequence


def _jsonable(value):
    if isinstance(value, float) and not math.isfinite(value):
        return "inf" if value > 0 else ("-inf" if value < 0 else "nan")
    if hasattr(value, "item") and not isinstance(value, (list, tuple, dict)):
        try:
            return _jsonable(value.item())
        except (ValueError, AttributeError):
            pass
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "tolist"):
        return _jsonable(value.tolist())
    return value


def to_json(obj: Any, **kwargs) -> str:
    return json.dumps(_jsonable(obj), **kwargs)


@dataclass
class BoundReport:
    """Named bound values and exponents with a short source tag."""

    name: str
    values: dict = field(default_factory=dict)
    exponents: dict = field(default_factory=dict)
    source: str = ""

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))


@dataclass
class CheckRecord:
    """One instance of a numerical verification: lhs should not exceed rhs."""

    check: str
    instance: Any
    lhs: float
    rhs: float
    gap: float
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "check": self.check,
            "instance": self.instance,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "gap": self.gap,
            "pass": bool(self.passed),
        }
        if self.detail:
            out["detail"] = self.detail
        return _jsonable(out)

    @classmethod
    def inequality(cls, check, instance, lhs, rhs, tol=1e-9, **detail) -> "CheckRecord":
        """Record lhs <= rhs up to an absolute-plus-relative tolerance."""
        slack = tol * max(1.0, abs(rhs))
        return cls(check, instance, float(lhs), float(rhs), float(rhs - lhs),
                   bool(lhs <= rhs + slack), detail)

    @classmethod
    def equality(cls, check, instance, lhs, rhs, tol=1e-6, **detail) -> "CheckRecord":
        gap = abs(lhs - rhs)
        return cls(check, instance, float(lhs), float(rhs), float(gap), bool(gap <= tol), detail)


def run_instances(fn: Callable, instances: Sequence, workers: int | None = None) -> list:
    """Apply `fn` to each instance, possibly in threads; output order follows input order."""
    items = list(instances)
    if workers is None or workers <= 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def summarize(records: Iterable[CheckRecord]) -> dict:
    records = list(records)
    failures = [r for r in records if not r.passed]
    worst = max((r.lhs - r.rhs for r in records), default=0.0)
    return {"total": len(records), "failures": len(failures), "worst_excess": worst}
