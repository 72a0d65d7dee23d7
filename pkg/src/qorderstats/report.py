"""Check records, verification reports and their JSON/CSV serialization."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, TextIO

from . import __version__

CSV_HEADER = ("name", "lhs", "rhs", "abs_err", "rel_err", "passed")


def _errors(lhs: float, rhs: float) -> tuple[float, float]:
    abs_err = abs(lhs - rhs)
    if rhs != 0:
        rel_err = abs_err / abs(rhs)
    elif lhs != 0:
        rel_err = abs_err / abs(lhs)
    else:
        rel_err = 0.0
    return abs_err, rel_err


@dataclass(frozen=True)
class IdentityCheck:
    """Outcome of comparing two independently computed values.

    ``mode`` is ``"rel"`` (pass iff ``rel_err <= tolerance``, or
    ``abs_err <= atol`` when either side is exactly zero) or ``"abs"``
    (pass iff ``abs_err <= tolerance``; used for Monte Carlo sigma bands).
    """

    name: str
    lhs: float
    rhs: float
    abs_err: float
    rel_err: float
    passed: bool
    tolerance: float
    mode: str = "rel"
    params: dict = field(default_factory=dict)
    asserted: bool = True

    @classmethod
    def relative(cls, name, lhs, rhs, tol, params=None, atol=None, asserted=True):
        lhs, rhs = float(lhs), float(rhs)
        abs_err, rel_err = _errors(lhs, rhs)
        if atol is None:
            atol = tol
        if lhs == 0 or rhs == 0:
            passed = abs_err <= atol or rel_err <= tol
        else:
            passed = rel_err <= tol
        return cls(name, lhs, rhs, abs_err, rel_err, bool(passed), float(tol), "rel",
                   dict(params or {}), asserted)

    @classmethod
    def absolute(cls, name, lhs, rhs, tol, params=None, asserted=True):
        lhs, rhs = float(lhs), float(rhs)
        abs_err, rel_err = _errors(lhs, rhs)
        return cls(name, lhs, rhs, abs_err, rel_err, bool(abs_err <= tol), float(tol), "abs",
                   dict(params or {}), asserted)

    @property
    def ok(self) -> bool:
        """False only for an asserted check that failed."""
        return self.passed or not self.asserted

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": _num(self.lhs),
            "rhs": _num(self.rhs),
            "abs_err": _num(self.abs_err),
            "rel_err": _num(self.rel_err),
            "passed": self.passed,
            "asserted": self.asserted,
            "tolerance": self.tolerance,
            "mode": self.mode,
            "params": self.params,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "IdentityCheck":
        return cls(d["name"], _unnum(d["lhs"]), _unnum(d["rhs"]), _unnum(d["abs_err"]),
                   _unnum(d["rel_err"]), d["passed"], d["tolerance"], d.get("mode", "rel"),
                   d.get("params", {}), d.get("asserted", True))


def _num(x: float):
    # JSON has no inf/nan; they become null
    return x if math.isfinite(x) else None


def _unnum(x):
    return math.nan if x is None else float(x)


@dataclass
class VerificationReport:
    checks: list[IdentityCheck] = field(default_factory=list)
    meta: dict[str, Any] = field(default_factory=dict)

    def extend(self, checks: Iterable[IdentityCheck]) -> "VerificationReport":
        self.checks.extend(checks)
        return self

    @property
    def summary(self) -> dict[str, int]:
        passed = sum(c.passed for c in self.checks)
        failed_asserted = sum(not c.ok for c in self.checks)
        return {
            "total": len(self.checks),
            "passed": passed,
            "failed": len(self.checks) - passed,
            "failed_asserted": failed_asserted,
        }

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def worst(self) -> IdentityCheck | None:
        """The check with the largest error as a fraction of its tolerance."""
        if not self.checks:
            return None

        def ratio(c):
            err = c.rel_err if c.mode == "rel" else c.abs_err
            if math.isnan(err):
                return math.inf
            return err / c.tolerance if c.tolerance > 0 else (math.inf if err > 0 else 0.0)

        return max(self.checks, key=ratio)

    def to_dict(self) -> dict:
        meta = {"version": __version__}
        meta.update(self.meta)
        return {"meta": meta, "checks": [c.to_dict() for c in self.checks], "summary": self.summary}

    @classmethod
    def from_dict(cls, d: dict) -> "VerificationReport":
        meta = dict(d.get("meta", {}))
        return cls([IdentityCheck.from_dict(c) for c in d.get("checks", [])], meta)


def _g17(x: float) -> str:
    return format(x, ".17g")


def emit_report(report: VerificationReport, fmt: str, sink: TextIO) -> None:
    """Write ``report`` to ``sink`` as ``"json"`` or ``"csv"`` (UTF-8, LF)."""
    fmt = fmt.lower()
    if fmt == "json":
        sink.write(json.dumps(report.to_dict(), indent=2, sort_keys=True, allow_nan=False))
        sink.write("\n")
    elif fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for c in report.checks:
            w.writerow([c.name, _g17(c.lhs), _g17(c.rhs), _g17(c.abs_err), _g17(c.rel_err),
                        "true" if c.passed else "false"])
        sink.write(buf.getvalue())
    else:
        raise ValueError(f"unknown report format {fmt!r}")
