"""The record type shared by every numerical check."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

EXACT_TOL = 1e-9
STAT_SIGMAS = 3.0

FIELDS = ("name", "n", "instance", "lhs", "rhs", "slack", "stderr", "verdict", "seed")


@dataclass(frozen=True)
class CheckResult:
    """One instance of an inequality ``lhs <= rhs``; ``slack = rhs - lhs``."""

    name: str
    n: int
    instance: str
    lhs: float
    rhs: float
    slack: float
    stderr: float
    verdict: str
    seed: int

    @property
    def failed(self) -> bool:
        return self.verdict == "fail"

    def as_record(self) -> dict:
        return asdict(self)


def verdict_for(slack: float, stderr: float, kind: str, scale: float = 1.0) -> str:
    """``kind`` is "exact", "statistical" or "report".

    Exact checks allow rounding of ``EXACT_TOL`` relative to ``max(1, scale)``.
    """
    if kind == "report":
        return "report-only"
    if not math.isfinite(slack):
        return "fail"
    if kind == "exact":
        return "pass" if slack >= -EXACT_TOL * max(1.0, scale) else "fail"
    if kind == "statistical":
        return "pass" if slack >= -STAT_SIGMAS * stderr else "fail"
    raise ValueError(f"unknown check kind {kind!r}")


def make_check(name: str, n: int, instance: str, lhs: float, rhs: float,
               stderr: float = 0.0, kind: str | None = None, seed: int = 0) -> CheckResult:
    """Build a record; ``kind`` defaults to exact when ``stderr`` is zero."""
    if kind is None:
        kind = "exact" if stderr == 0 else "statistical"
    lhs, rhs, stderr = float(lhs), float(rhs), float(stderr)
    slack = rhs - lhs
    return CheckResult(name, int(n), instance, lhs, rhs, slack, stderr,
                       verdict_for(slack, stderr, kind, max(abs(lhs), abs(rhs))),
                       int(seed))
