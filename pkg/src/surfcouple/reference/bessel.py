"""Reference processes: Bessel processes, the mirror-coupled plane distance, and the domination report."""
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional

import numpy as np
from scipy.stats import norm

from surfcouple.sde.noise import NoiseSource
from surfcouple.utils.errors import BadDimension, BadParams


@dataclass(frozen=True)
class BesselParams:
    dim: float
    start: float

    def __post_init__(self):
        if not (self.dim > 0 and self.start > 0):
            raise BadParams(f"Bessel dimension and start must be positive, got ({self.dim}, {self.start})")


@dataclass(frozen=True)
class BesselOutcome:
    """Per-path result of `simulate_bessel`: absorption at 0, crossing of the upper barrier, or neither by t_max."""

    hit_zero: np.ndarray
    hit_upper: np.ndarray
    exit_time: np.ndarray
    path_min: np.ndarray

    @property
    def resolved(self) -> np.ndarray:
        return self.hit_zero | self.hit_upper


def bessel_step(dim: float, rho: np.ndarray, dt: float, noise: NoiseSource) -> np.ndarray:
    """Euler step of d rho = dW + (dim - 1) / (2 rho) dt; paths ending at or below 0 are absorbed there."""
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    alive = rho > 0
    safe = np.where(alive, rho, 1.0)
    new = safe + math.sqrt(dt) * noise.normal(rho.size) + (dim - 1) / (2 * safe) * dt
    return np.where(alive & (new > 0), new, 0.0)


def simulate_bessel(
    params: BesselParams,
    dt: float,
    t_max: float,
    noise: NoiseSource,
    upper: Optional[float] = None,
    n_paths: int = 1,
) -> BesselOutcome:
    """Runs `n_paths` absorbed Euler paths together until each hits 0, crosses `upper`, or t_max passes."""
    if upper is not None and not upper > params.start:
        raise BadParams(f"upper barrier {upper} must exceed the start {params.start}")
    rho = np.full(n_paths, float(params.start))
    hit_zero = np.zeros(n_paths, dtype=bool)
    hit_upper = np.zeros(n_paths, dtype=bool)
    exit_time = np.full(n_paths, np.nan)
    path_min = rho.copy()
    n_steps = int(math.ceil(t_max / dt - 1e-9))
    for k in range(1, n_steps + 1):
        active = ~(hit_zero | hit_upper)
        if not active.any():
            break
        rho = np.where(active, bessel_step(params.dim, rho, dt, noise), rho)
        path_min = np.minimum(path_min, rho)
        zero_now = active & (rho <= 0)
        upper_now = active & ~zero_now & (rho >= upper if upper is not None else False)
        hit_zero |= zero_now
        hit_upper |= upper_now
        exit_time[zero_now | upper_now] = k * dt
    return BesselOutcome(hit_zero, hit_upper, exit_time, path_min)


def bm_first_passage_prob(d: float, t: float) -> float:
    """P(the mirror-coupled plane distance d + 2W reaches 0 by time t) = 2 Phi(-d / (2 sqrt(t)))."""
    if not (d > 0 and t > 0):
        raise BadParams(f"need d > 0 and t > 0, got ({d}, {t})")
    return float(2 * norm.cdf(-d / (2 * math.sqrt(t))))


def bessel_hit_prob(dim: float, a: float, b: float) -> float:
    """P(a Bessel process of dimension dim started at a hits 0 before b), from the scale function.

    dim = 2 returns the limit 0: the two-dimensional process comes arbitrarily close to 0 without hitting it.
    """
    if not 0 < a < b:
        raise BadParams(f"need 0 < a < b, got ({a}, {b})")
    if dim == 2:
        return 0.0
    if not 0 < dim < 2:
        raise BadDimension(f"hitting 0 has probability zero for dim >= 2, got {dim}")
    return 1 - (a / b) ** (2 - dim)


@dataclass(frozen=True)
class DominationReport:
    """Sampled check of g <= f along a coupled series.

    g / f is the drift coefficient of the distance after the time change that makes its martingale part
    standard, times 2r; the two-dimensional Bessel benchmark has g / f = 1.
    """

    samples: int
    violations: int
    max_violation: float
    equalities: int
    ratio_violations: int
    max_drift_ratio: float
    mean_effective_dim: float

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)


def domination_report(result, tol: float = 1e-9) -> DominationReport:
    """Counts samples of a coupled RunResult (or its series DataFrame) violating g <= f + tol."""
    series = getattr(result, "series", result)
    s = series[["f", "g", "r"]].dropna()
    f, g, r = s["f"].to_numpy(), s["g"].to_numpy(), s["r"].to_numpy()
    excess = g - f
    moving = f > tol
    ratio = g[moving] / f[moving]
    drift_ratio = ratio / (2 * r[moving])
    return DominationReport(
        samples=len(s),
        violations=int(np.sum(excess > tol)),
        max_violation=float(excess.max()) if len(s) else 0.0,
        equalities=int(np.sum(np.abs(excess) <= tol)),
        ratio_violations=int(np.sum(drift_ratio > 1 / (2 * r[moving]) + tol / r[moving])),
        max_drift_ratio=float(ratio.max()) if ratio.size else 0.0,
        mean_effective_dim=float(np.mean(1 + ratio)) if ratio.size else math.nan,
    )
