import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np
from omegaconf import OmegaConf

SIDES = ("two_sided", "upper", "lower")


def mean_stderr(values: Sequence[float]) -> Tuple[float, float]:
    """Sample mean and its standard error; a single sample has an infinite standard error."""
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        return math.nan, math.inf
    if x.size == 1:
        return float(x[0]), math.inf
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


def _plain(v):
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    return v


@dataclass
class Statistic:
    """A Monte Carlo estimate checked against a target.

    Attributes
    ----------
    name : str
    estimate : float
    stderr : float
        Monte Carlo standard error of the estimate (informational, already folded into `tolerance`)
    target : float
    tolerance : float
        Allowed deviation; a non-finite tolerance never passes
    side : str
        "two_sided": |estimate - target| <= tolerance; "upper": estimate <= target + tolerance;
        "lower": estimate >= target - tolerance
    """

    name: str
    estimate: float
    stderr: float
    target: float
    tolerance: float
    side: str = "two_sided"

    def __post_init__(self):
        assert self.side in SIDES, f"side must be one of {SIDES}"

    @property
    def passed(self) -> bool:
        if not (math.isfinite(self.tolerance) and math.isfinite(self.estimate)):
            return False
        if self.side == "two_sided":
            return abs(self.estimate - self.target) <= self.tolerance
        if self.side == "upper":
            return self.estimate <= self.target + self.tolerance
        return self.estimate >= self.target - self.tolerance

    def as_dict(self) -> Dict[str, Any]:
        return {
            "estimate": _plain(self.estimate),
            "stderr": _plain(self.stderr),
            "target": _plain(self.target),
            "tolerance": _plain(self.tolerance),
            "side": self.side,
            "pass": self.passed,
        }


@dataclass
class SummaryReport:
    scenario: Dict[str, Any]
    statistics: List[Statistic]
    stop_counts: Dict[str, int]
    ledger: Dict[str, Any] = field(default_factory=dict)
    extra: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.statistics) and all(s.passed for s in self.statistics)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "scenario": self.scenario,
            "pass": self.passed,
            "statistics": {s.name: s.as_dict() for s in self.statistics},
            "stop_counts": {k: int(v) for k, v in self.stop_counts.items()},
            "ledger": {k: _plain(v) for k, v in self.ledger.items()},
            "extra": {k: [_plain(x) for x in v] if isinstance(v, list) else _plain(v) for k, v in self.extra.items()},
        }

    def to_yaml(self) -> str:
        return OmegaConf.to_yaml(OmegaConf.create(self.to_dict()))
