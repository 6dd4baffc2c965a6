"""Scenarios driven by a coupled pair of Brownian motions, one on each surface."""
import dataclasses
import math
from functools import partial
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from omegaconf import OmegaConf

from surfcouple.config import Config
from surfcouple.coupling.config import CouplingConfig
from surfcouple.data.trajectory_iterator import TrajectoryOutcome, TrajectoryTask
from surfcouple.geometry.config import SurfaceKind
from surfcouple.geometry.surfaces import SurfaceModel, surface_from_config
from surfcouple.reference.bessel import bm_first_passage_prob
from surfcouple.runner import ScenarioRunner
from surfcouple.sde.engine import StepControl, StopReason, initial_coupled_state, run_coupled
from surfcouple.sde.hooks import ExcursionCounter, FirstHit, RunHook, RunningMin
from surfcouple.sde.noise import NoiseSource
from surfcouple.utils.errors import BadParams, MissingBoundary
from surfcouple.utils.metrics import Statistic, mean_stderr

HALFSPACE_EXPECTATIONS = ("decrease", "constant", "couple")
# Coarsest dt_base at which coupling times are resolved without the bridge check
MAX_HITTING_DT = 1e-4


def running_min_hooks(times: List[float], r0: float) -> List[RunHook]:
    return [RunningMin(times, r0)]


def first_hit_hooks(level: float) -> List[RunHook]:
    return [FirstHit(level)]


def excursion_hooks(a: float, low: float, r0: float) -> List[RunHook]:
    return [ExcursionCounter(a, low, r0)]


class CoupledTask(TrajectoryTask):
    def __init__(
        self,
        M: SurfaceModel,
        N: SurfaceModel,
        x0: List[float],
        y0: List[float],
        control: StepControl,
        coupling: CouplingConfig,
        hook_factory: Optional[Callable[[], List[RunHook]]] = None,
    ):
        self.M, self.N = M, N
        self.x0, self.y0 = x0, y0
        self.control = control
        self.coupling = coupling
        self.hook_factory = hook_factory

    def run_trajectory(self, index: int, noise: NoiseSource, keep_series: bool) -> TrajectoryOutcome:
        hooks = self.hook_factory() if self.hook_factory is not None else []
        result = run_coupled(self.M, self.N, self.x0, self.y0, self.control, noise, self.coupling, hooks)
        series = result.series if keep_series else None
        return TrajectoryOutcome(index, result.stop.name, result.summary, result.ledger, series)


class CoupledRunner(ScenarioRunner):
    echo_sections = ("surface_m", "surface_n", "starts", "control", "coupling")
    # Statistics depend on when r first reaches r_couple
    measures_hitting = False

    def set_default_hps(self, cfg: Config):
        cfg.num_trajectories = 200
        cfg.control.dt_base = 1e-3
        cfg.control.t_max = 1.0

    def hook_factory(self) -> Optional[Callable[[], List[RunHook]]]:
        return None

    def config_warnings(self) -> List[str]:
        c = self.control
        if self.measures_hitting and not c.bridge_check and c.dt_base > MAX_HITTING_DT:
            return [
                f"dt_base = {c.dt_base:g} without bridge_check overshoots r_couple; coupling probabilities are "
                f"biased low above dt_base = {MAX_HITTING_DT:g}"
            ]
        return []

    def engine_control(self) -> StepControl:
        return self.control

    def build_surfaces(self) -> Tuple[SurfaceModel, SurfaceModel]:
        return surface_from_config(self.cfg.surface_m), surface_from_config(self.cfg.surface_n)

    def setup_task(self):
        self.M, self.N = self.build_surfaces()
        self.x0 = [float(v) for v in self.cfg.starts.x0]
        self.y0 = [float(v) for v in self.cfg.starts.y0]
        self.r0 = initial_coupled_state(self.M, self.N, self.x0, self.y0).r
        if not self.r0 > self.control.r_couple:
            raise BadParams(f"start distance {self.r0:.3e} is already within r_couple = {self.control.r_couple:.0e}")
        coupling: CouplingConfig = OmegaConf.to_object(self.cfg.coupling)  # type: ignore
        self.task = CoupledTask(self.M, self.N, self.x0, self.y0, self.engine_control(), coupling, self.hook_factory())

    def grid_times(self) -> List[float]:
        return [g * self.control.t_max for g in self.task_cfg.grid]

    @staticmethod
    def column(outcomes: List[TrajectoryOutcome], key: str) -> np.ndarray:
        return np.array([o.summary[key] for o in outcomes], dtype=float)

    @staticmethod
    def coupling_times(outcomes: List[TrajectoryOutcome]) -> np.ndarray:
        """Engine coupling times, inf for trajectories that stopped for any other reason."""
        return np.array([o.summary["t_end"] if o.stop == StopReason.Coupled.name else math.inf for o in outcomes])


class HalfspaceRunner(CoupledRunner):
    """Running minimum of the distance between a non-flat M and another surface N."""

    name = "halfspace"
    task_section = "halfspace"

    def set_default_hps(self, cfg: Config):
        super().set_default_hps(cfg)
        cfg.surface_m.kind = SurfaceKind.Catenoid
        cfg.surface_n.kind = SurfaceKind.Plane
        # the plane {x1 = 3}
        cfg.surface_n.rotvec = [0.0, math.pi / 2, 0.0]
        cfg.surface_n.offset = [3.0, 0.0, 0.0]
        cfg.starts.x0 = [-1.0, 0.0]
        cfg.starts.y0 = [0.0, 0.0]

    def setup_task(self):
        expect = self.task_cfg.expect
        if expect not in HALFSPACE_EXPECTATIONS:
            raise BadParams(f"halfspace expect must be one of {HALFSPACE_EXPECTATIONS}, got {expect!r}")
        super().setup_task()
        if expect == "decrease" and self.M.is_flat:
            raise BadParams("a decreasing inf r needs a non-flat M; flat controls use expect=constant or couple")

    def hook_factory(self):
        return partial(running_min_hooks, self.grid_times(), self.r0)

    def evaluate(self, outcomes: List[TrajectoryOutcome]) -> Tuple[List[Statistic], Dict[str, Any]]:
        tcfg = self.task_cfg
        n_grid = len(tcfg.grid)
        inf_r = np.array([[o.summary[f"inf_r_{i}"] for i in range(n_grid)] for o in outcomes], dtype=float)
        quantiles = np.quantile(inf_r, tcfg.quantile, axis=0)
        coupled = (self.coupling_times(outcomes) < math.inf).astype(float)
        frac, frac_se = mean_stderr(coupled)
        statistics = []
        if tcfg.expect == "decrease":
            drop = float(np.min(quantiles[:-1] - quantiles[1:]))
            statistics.append(Statistic("inf_r_quantile_drop", drop, math.nan, tcfg.min_drop, 0.0, "lower"))
        elif tcfg.expect == "constant":
            deviation = float(np.max(np.abs(self.column(outcomes, "inf_r_final") - self.r0)))
            statistics.append(Statistic("inf_r_deviation", deviation, 0.0, 0.0, tcfg.constant_tol, "upper"))
            statistics.append(Statistic("coupled_fraction", frac, frac_se, 0.0, 0.0, "upper"))
        else:
            # at least one coupled trajectory
            statistics.append(Statistic("coupled_fraction", frac, frac_se, 1 / len(outcomes), 0.0, "lower"))
        extra = {
            "r0": self.r0,
            "grid_times": self.grid_times(),
            "inf_r_quantiles": [float(q) for q in quantiles],
            "coupled_fraction": frac,
        }
        return statistics, extra


class MirrorRunner(CoupledRunner):
    """Mirror coupling in a plane: the coupling-time CDF against the reflection-principle oracle."""

    name = "mirror-coupling-plane"
    task_section = "mirror"
    measures_hitting = True

    def set_default_hps(self, cfg: Config):
        super().set_default_hps(cfg)
        cfg.num_trajectories = 1000
        cfg.control.dt_base = 1e-4
        cfg.surface_m.kind = SurfaceKind.Plane
        cfg.surface_n.kind = SurfaceKind.Plane
        cfg.starts.x0 = [0.0, 0.0]
        cfg.starts.y0 = [1.0, 0.0]

    def engine_control(self) -> StepControl:
        if self.task_cfg.sensitivity:
            return dataclasses.replace(self.control, r_couple=self.control.r_couple / 2)
        return self.control

    def hook_factory(self):
        if self.task_cfg.sensitivity:
            return partial(first_hit_hooks, self.control.r_couple)
        return None

    def hit_times(self, outcomes: List[TrajectoryOutcome]) -> np.ndarray:
        """First times the distance reaches the configured r_couple."""
        if not self.task_cfg.sensitivity:
            return self.coupling_times(outcomes)
        t = self.column(outcomes, "first_hit_t")
        return np.where(np.isnan(t), math.inf, t)

    def evaluate(self, outcomes: List[TrajectoryOutcome]) -> Tuple[List[Statistic], Dict[str, Any]]:
        tcfg = self.task_cfg
        hits = self.hit_times(outcomes)
        times = self.grid_times()
        cdf, ses, oracle = [], [], []
        for t in times:
            p, se = mean_stderr((hits <= t).astype(float))
            cdf.append(p)
            ses.append(se)
            oracle.append(bm_first_passage_prob(self.r0, t))
        gaps = np.abs(np.asarray(cdf) - np.asarray(oracle))
        statistics = [
            Statistic("coupling_prob", cdf[-1], ses[-1], oracle[-1], tcfg.n_stderr * ses[-1] + tcfg.allowance),
            Statistic(
                "max_cdf_gap", float(gaps.max()), max(ses), 0.0, tcfg.n_stderr * max(ses) + tcfg.allowance, "upper"
            ),
        ]
        if tcfg.sensitivity:
            fine, _ = mean_stderr((self.coupling_times(outcomes) <= times[-1]).astype(float))
            change = abs(fine - cdf[-1])
            statistics.append(Statistic("r_couple_sensitivity", change, 0.0, 0.0, tcfg.sensitivity_tol, "upper"))
        extra = {"r0": self.r0, "grid_times": times, "cdf": cdf, "oracle": oracle}
        return statistics, extra


class LiouvilleRunner(CoupledRunner):
    """Two motions on the same surface, coupled until they meet."""

    name = "liouville-embedded"
    task_section = "liouville"
    measures_hitting = True
    echo_sections = ("surface_m", "starts", "control", "coupling")

    def set_default_hps(self, cfg: Config):
        super().set_default_hps(cfg)
        cfg.control.t_max = 5.0
        cfg.surface_m.kind = SurfaceKind.Catenoid
        # opposite sides of the neck
        cfg.starts.x0 = [1.0, 0.0]
        cfg.starts.y0 = [-1.0, 0.0]

    def build_surfaces(self) -> Tuple[SurfaceModel, SurfaceModel]:
        M = surface_from_config(self.cfg.surface_m)
        return M, M

    def hook_factory(self):
        a = self.task_cfg.excursion_level
        if a is None:
            return None
        if not self.control.r_couple < a:
            raise BadParams(f"excursion level {a} must exceed r_couple = {self.control.r_couple}")
        return partial(excursion_hooks, float(a), self.control.r_couple, self.r0)

    def evaluate(self, outcomes: List[TrajectoryOutcome]) -> Tuple[List[Statistic], Dict[str, Any]]:
        tcfg = self.task_cfg
        hits = self.coupling_times(outcomes)
        times = self.grid_times()
        fractions = [float(np.mean(hits <= t)) for t in times]
        increments = np.diff([0.0] + fractions)
        final, final_se = mean_stderr((hits <= times[-1]).astype(float))
        benchmark = bm_first_passage_prob(self.r0, self.control.t_max)
        violations = float(sum(o.ledger.get("violations", 0) for o in outcomes))
        statistics = [
            Statistic("coupling_fraction_increments", float(increments.min()), 0.0, 0.0, 0.0, "lower"),
            Statistic("coupling_fraction_vs_plane", final, final_se, benchmark, tcfg.floor_allowance, "lower"),
            Statistic("domination_violations", violations, 0.0, 0.0, 0.0, "upper"),
        ]
        extra = {"r0": self.r0, "grid_times": times, "coupling_fraction": fractions, "plane_benchmark": benchmark}
        if tcfg.excursion_level is not None:
            attempts = int(self.column(outcomes, "excursion_attempts").sum())
            successes = int(self.column(outcomes, "excursion_successes").sum())
            p = successes / attempts if attempts else math.nan
            se = math.sqrt(p * (1 - p) / attempts) if attempts else math.inf
            statistics.append(
                Statistic("excursion_success", p, se, tcfg.min_excursion_prob, tcfg.n_stderr * se, "lower")
            )
            extra["excursion_attempts"] = attempts
        return statistics, extra


class MaxPrincipleRunner(CoupledRunner):
    """Coupled motions stopped at a surface boundary never end farther apart than they started."""

    name = "max-principle-boundary"
    task_section = "max_principle"

    def set_default_hps(self, cfg: Config):
        super().set_default_hps(cfg)
        cfg.control.t_max = 5.0
        cfg.surface_m.kind = SurfaceKind.Catenoid
        cfg.surface_m.domain = "annulus"
        cfg.surface_m.r_in = 0.5
        cfg.surface_m.r_out = 2.0
        cfg.surface_m.boundary = True
        cfg.surface_n.kind = SurfaceKind.Plane
        cfg.surface_n.offset = [0.0, 0.0, 3.0]
        cfg.starts.x0 = [1.0, 0.0]
        cfg.starts.y0 = [-2.0, 0.0]

    def setup_task(self):
        if not (self.cfg.surface_m.boundary or self.cfg.surface_n.boundary):
            raise MissingBoundary("max-principle-boundary needs at least one surface with boundary=True")
        super().setup_task()

    def hook_factory(self):
        return partial(running_min_hooks, [self.control.t_max], self.r0)

    def evaluate(self, outcomes: List[TrajectoryOutcome]) -> Tuple[List[Statistic], Dict[str, Any]]:
        tcfg = self.task_cfg
        # stops at a true surface boundary only
        stopped = [o for o in outcomes if o.stop == StopReason.Boundary.name and o.summary["surface_boundary"]]
        terminal = self.column(stopped, "r_end") if stopped else np.array([])
        excess = float(terminal.min() - self.r0) if stopped else math.nan
        statistics = [Statistic("min_terminal_r_excess", excess, 0.0, 0.0, tcfg.tol, "upper")]
        extra = {
            "r0": self.r0,
            "surface_boundary_stops": len(stopped),
            "chart_edge_stops": sum(o.stop == StopReason.Boundary.name for o in outcomes) - len(stopped),
            "min_terminal_r": float(terminal.min()) if stopped else math.nan,
            "min_running_r": float(self.column(outcomes, "inf_r_final").min()),
        }
        return statistics, extra
