"""Scenarios driven by one Brownian motion on one surface."""
import math
from functools import partial
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from surfcouple.config import Config
from surfcouple.data.trajectory_iterator import TrajectoryOutcome, TrajectoryTask
from surfcouple.geometry.config import SurfaceKind
from surfcouple.geometry.surfaces import SurfaceModel, evaluate_state, surface_from_config
from surfcouple.runner import ScenarioRunner
from surfcouple.sde.engine import StepControl, run_single
from surfcouple.sde.hooks import CapOccupation, RunHook
from surfcouple.sde.noise import NoiseSource
from surfcouple.utils.errors import BadParams
from surfcouple.utils.metrics import Statistic, mean_stderr


def icosahedron_centers() -> np.ndarray:
    """The 12 unit vertices of an icosahedron with two vertices at the poles."""
    z = 1 / math.sqrt(5)
    rho = 2 / math.sqrt(5)
    upper = [(rho * math.cos(k * math.pi / 5), rho * math.sin(k * math.pi / 5), z) for k in range(0, 10, 2)]
    lower = [(rho * math.cos(k * math.pi / 5), rho * math.sin(k * math.pi / 5), -z) for k in range(1, 10, 2)]
    return np.array([(0.0, 0.0, 1.0)] + upper + lower + [(0.0, 0.0, -1.0)])


def cap_hooks(centers: np.ndarray, radius: float, times: List[float]) -> List[RunHook]:
    return [CapOccupation(centers, radius, times)]


class SingleSurfaceTask(TrajectoryTask):
    def __init__(
        self,
        model: SurfaceModel,
        x0: List[float],
        control: StepControl,
        hook_factory: Optional[Callable[[], List[RunHook]]] = None,
    ):
        self.model = model
        self.x0 = x0
        self.control = control
        self.hook_factory = hook_factory

    def run_trajectory(self, index: int, noise: NoiseSource, keep_series: bool) -> TrajectoryOutcome:
        hooks = self.hook_factory() if self.hook_factory is not None else []
        result = run_single(self.model, self.x0, self.control, noise, hooks=hooks)
        series = result.series if keep_series else None
        return TrajectoryOutcome(index, result.stop.name, result.summary, result.ledger, series)


class SingleSurfaceRunner(ScenarioRunner):
    echo_sections = ("surface_m", "starts", "control")

    def set_default_hps(self, cfg: Config):
        cfg.num_trajectories = 1000
        cfg.surface_m.kind = SurfaceKind.Catenoid
        cfg.starts.x0 = [1.0, 0.0]
        cfg.control.dt_base = 1e-4
        cfg.control.t_max = 1.0

    def hook_factory(self) -> Optional[Callable[[], List[RunHook]]]:
        return None

    def setup_task(self):
        self.model = surface_from_config(self.cfg.surface_m)
        self.x0 = [float(v) for v in self.cfg.starts.x0]
        # a start outside the chart raises DomainExit here, before any worker starts
        self.start_state = evaluate_state(self.model, complex(*self.x0))
        self.task = SingleSurfaceTask(self.model, self.x0, self.control, self.hook_factory())

    @staticmethod
    def column(outcomes: List[TrajectoryOutcome], key: str) -> np.ndarray:
        return np.array([o.summary[key] for o in outcomes], dtype=float)


class StoCompRunner(SingleSurfaceRunner):
    """E[rho^2_tau] = rho^2_0 + 2 E[tau] with tau = t_max, or the chart exit time when it comes first."""

    name = "sto-comp"
    task_section = "sto_comp"

    def set_default_hps(self, cfg: Config):
        super().set_default_hps(cfg)
        cfg.surface_m.kind = SurfaceKind.Plane
        cfg.starts.x0 = [0.0, 0.0]

    def evaluate(self, outcomes: List[TrajectoryOutcome]) -> Tuple[List[Statistic], Dict[str, Any]]:
        tcfg = self.task_cfg
        rho2_0 = self.column(outcomes, "rho2_0")
        t_end = self.column(outcomes, "t_end")
        values = self.column(outcomes, "rho2_end") - rho2_0 - 2 * t_end
        mean, stderr = mean_stderr(values)
        scale = float(rho2_0[0]) + 2 * self.control.t_max
        tol = max(tcfg.n_stderr * stderr, tcfg.allowance_rel * scale)
        extra = {"rho2_0": float(rho2_0[0]), "mean_t_end": float(t_end.mean())}
        return [Statistic("stopped_identity", mean, stderr, 0.0, tol)], extra


def pooled_relative_error(realized: np.ndarray, predicted: np.ndarray, scale: float, total_time: float):
    """(sum realized - sum predicted) / scale with its standard error; an absolute error per unit time
    when the scale vanishes (a coordinate with no quadratic variation)."""
    n = len(realized)
    diff = realized - predicted
    _, se_mean = mean_stderr(diff)
    denom = scale if scale > 1e-12 * total_time else total_time
    return float(diff.sum() / denom), float(se_mean * n / denom)


class CoordinateQVRunner(SingleSurfaceRunner):
    """Realized <x_i, x_j> against int (delta_ij - m_i m_j) ds, pooled over trajectories."""

    name = "coordinate-qv"
    task_section = "coordinate_qv"

    def setup_task(self):
        for pair in self.task_cfg.pairs:
            if len(pair) != 2 or not 1 <= pair[0] <= pair[1] <= 3:
                raise BadParams(f"coordinate pairs must be (i, j) with 1 <= i <= j <= 3, got {list(pair)}")
        super().setup_task()

    def evaluate(self, outcomes: List[TrajectoryOutcome]) -> Tuple[List[Statistic], Dict[str, Any]]:
        tcfg = self.task_cfg
        total_time = float(self.column(outcomes, "t_end").sum())
        statistics = []
        for i, j in tcfg.pairs:
            realized, predicted = self.column(outcomes, f"qv_{i}{j}"), self.column(outcomes, f"law_{i}{j}")
            law_ii, law_jj = self.column(outcomes, f"law_{i}{i}").sum(), self.column(outcomes, f"law_{j}{j}").sum()
            scale = math.sqrt(abs(law_ii * law_jj))
            err, se = pooled_relative_error(realized, predicted, scale, total_time)
            statistics.append(Statistic(f"qv_rel_error_{i}{j}", err, se, 0.0, tcfg.rel_tol))
        extra = {"max_rel_error": max(abs(s.estimate) for s in statistics)}
        return statistics, extra


class GaussOccupationRunner(SingleSurfaceRunner):
    """Time spent by the Gauss map in 12 spherical caps, checked at fractions of t_max."""

    name = "gauss-occupation"
    task_section = "gauss_occupation"

    def set_default_hps(self, cfg: Config):
        super().set_default_hps(cfg)
        cfg.num_trajectories = 100
        cfg.control.dt_base = 1e-3
        cfg.control.t_max = 5.0

    def hook_factory(self):
        tcfg = self.task_cfg
        times = [g * self.control.t_max for g in tcfg.grid]
        return partial(cap_hooks, icosahedron_centers(), float(tcfg.cap_radius), times)

    def occupation(self, outcomes: List[TrajectoryOutcome]) -> np.ndarray:
        """Occupation times indexed by (trajectory, checkpoint, cap)."""
        n_grid, n_caps = len(self.task_cfg.grid), len(icosahedron_centers())
        return np.array(
            [[[o.summary[f"cap{c}_{i}"] for c in range(n_caps)] for i in range(n_grid)] for o in outcomes], dtype=float
        )

    def evaluate(self, outcomes: List[TrajectoryOutcome]) -> Tuple[List[Statistic], Dict[str, Any]]:
        tcfg = self.task_cfg
        occ = self.occupation(outcomes)
        n = len(outcomes)
        decreases = int(np.sum(np.diff(occ, axis=1) < 0))
        statistics = [Statistic("cap_occupation_decreases", float(decreases), 0.0, 0.0, 0.0, side="upper")]

        reachable = np.flatnonzero(occ[:, -1, :].max(axis=0) > 0)
        mid = int(np.argmin(np.abs(np.asarray(tcfg.grid) - 0.5 * tcfg.grid[-1])))
        grew = occ[:, -1, :] > occ[:, mid, :]
        fractions = {int(c): float(grew[:, c].mean()) for c in reachable}
        worst = min(fractions, key=fractions.get) if fractions else None
        if worst is None:
            statistics.append(Statistic("cap_growth_fraction", math.nan, math.inf, tcfg.min_fraction, 0.0, "lower"))
        else:
            _, se = mean_stderr(grew[:, worst].astype(float))
            statistics.append(Statistic("cap_growth_fraction", fractions[worst], se, tcfg.min_fraction, 0.0, "lower"))

        if self.model.is_flat:
            # a flat surface keeps its normal, so one cap holds all the time
            total = self.column(outcomes, "t_end").sum()
            concentration = float(occ[:, -1, :].max(axis=1).sum() / total) if total > 0 else math.nan
            statistics.append(Statistic("cap_concentration", concentration, 0.0, 1.0, 1e-9))
        extra = {
            "reachable_caps": [int(c) for c in reachable],
            "mean_final_occupation": [float(v) for v in occ[:, -1, :].mean(axis=0)],
            "num_trajectories": n,
        }
        return statistics, extra


class GaussTimeChangeRunner(SingleSurfaceRunner):
    """Spherical quadratic variation of the Gauss track against 2 int |K| ds."""

    name = "gauss-timechange"
    task_section = "gauss_timechange"

    def evaluate(self, outcomes: List[TrajectoryOutcome]) -> Tuple[List[Statistic], Dict[str, Any]]:
        tcfg = self.task_cfg
        realized = self.column(outcomes, "gauss_qv")
        predicted = 2 * self.column(outcomes, "tau_gauss")
        total_time = float(self.column(outcomes, "t_end").sum())
        err, se = pooled_relative_error(realized, predicted, float(predicted.sum()), total_time)
        extra = {"gauss_qv": float(realized.sum()), "two_tau_gauss": float(predicted.sum())}
        return [Statistic("gauss_timechange_rel_error", err, se, 0.0, tcfg.rel_tol)], extra
