"""Euler-Maruyama integration of single and coupled Brownian motions in conformal charts.

In a chart with conformal factor lambda, Brownian motion on the surface moves the chart point by
sqrt(dt / lambda) (xi_1 + i xi_2). A coupled step draws xi in R^4, maps it through the dispersion factor B
of the coupling chosen at the current configuration, and moves each point along its configuration frame.
"""
import math
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from surfcouple.coupling.config import CouplingConfig
from surfcouple.coupling.coupling_law import (
    CouplingChoice,
    Dispersion,
    RatePair,
    coupling_choice,
    dispersion,
    rate_pair,
)
from surfcouple.geometry.configuration import Configuration, compute_configuration
from surfcouple.geometry.surfaces import (
    SurfaceModel,
    SurfaceState,
    advance_state,
    as_complex,
    chart_increment,
    evaluate_state,
    lambda_gradient,
    lambda_gradient_at,
)
from surfcouple.sde.hooks import RunHook, merge_hook_summaries
from surfcouple.sde.noise import NoiseSource
from surfcouple.utils.errors import BadParams, DegenerateMetric, DomainExit, ParticlesCoincident, TooFewSamples

COUPLED_COLUMNS = ["t", "r", "theta", "phi", "psi", "f", "g", "eps_hat", "xu", "xv", "yu", "yv", "stop_reason"]
SINGLE_COLUMNS = ["t", "u", "v", "x1", "x2", "x3", "m1", "m2", "m3", "tau_gauss", "stop_reason"]


class StopReason(Enum):
    Coupled = 0
    Boundary = 1
    TimedOut = 2
    NumericalGuard = 3


@dataclass(frozen=True)
class StepControl:
    """Validated step and stopping parameters; see sde.config.StepControlConfig for their meaning."""

    dt_base: float
    r_couple: float
    t_max: float
    lambda_guard: float = 0.1
    sample_stride: int = 100
    max_halvings: int = 20
    max_refinement: float = 1e4
    proximity_factor: float = 10.0
    bridge_check: bool = True

    def __post_init__(self):
        for name in ("dt_base", "r_couple", "t_max", "lambda_guard", "max_refinement", "proximity_factor"):
            if not getattr(self, name) > 0:
                raise BadParams(f"{name} must be positive, got {getattr(self, name)}")
        if self.sample_stride < 1 or self.max_halvings < 0:
            raise BadParams("sample_stride must be >= 1 and max_halvings >= 0")

    @classmethod
    def from_config(cls, cfg) -> "StepControl":
        return cls(**{f.name: getattr(cfg, f.name) for f in fields(cls)})

    def step_size(self, r: Optional[float] = None) -> float:
        """dt_base, refined by (proximity_factor r_couple / r)^2 as the particles close in."""
        if r is None:
            return self.dt_base
        refine = min(max(1.0, (self.proximity_factor * self.r_couple / r) ** 2), self.max_refinement)
        return self.dt_base / refine


@dataclass(frozen=True)
class CouplingPlan:
    """Everything the coupling law decides at one configuration."""

    config: Configuration
    choice: CouplingChoice
    dispersion: Dispersion
    rates: RatePair


@dataclass(frozen=True)
class CoupledState:
    """The pair of particles, the distance process and its running statistics.

    `plan` is the coupling used for the step that produced this state (None before the first step).
    `r_step_min` is the sampled minimum of the distance over that step (None when not sampled).
    """

    xstate: SurfaceState
    ystate: SurfaceState
    t: float
    r: float
    r_qv: float = 0.0
    tau_gauss_x: float = 0.0
    tau_gauss_y: float = 0.0
    plan: Optional[CouplingPlan] = None
    r_step_min: Optional[float] = None

    @property
    def step_min(self) -> float:
        return self.r if self.r_step_min is None else self.r_step_min

    @property
    def gauss_x(self) -> np.ndarray:
        return self.xstate.m

    @property
    def gauss_y(self) -> np.ndarray:
        return self.ystate.m


@dataclass
class RunResult:
    stop: StopReason
    series: pd.DataFrame
    summary: Dict[str, Any]
    ledger: Dict[str, Any] = field(default_factory=dict)


class DominationLedger:
    """Per-step record of g <= f and of the time-changed drift ratio (g / f) / (2r) against 1 / (2r)."""

    def __init__(self, tol: float = 1e-9):
        self.tol = tol
        self.steps = 0
        self.violations = 0
        self.equalities = 0
        self.ratio_violations = 0
        self.max_violation = -math.inf

    def update(self, rates: RatePair, r: float):
        f, g = rates
        self.steps += 1
        excess = g - f
        self.max_violation = max(self.max_violation, excess)
        if excess > self.tol:
            self.violations += 1
        if abs(excess) <= self.tol:
            self.equalities += 1
        if f > self.tol and (g / f) / (2 * r) > 1 / (2 * r) + self.tol / r:
            self.ratio_violations += 1

    def as_dict(self) -> Dict[str, Any]:
        return {
            "steps": self.steps,
            "violations": self.violations,
            "equalities": self.equalities,
            "ratio_violations": self.ratio_violations,
            "max_violation": self.max_violation if self.steps else 0.0,
        }


def bridge_minimum(r0: float, r1: float, var: float, u: float) -> float:
    """Minimum over a step of a Brownian bridge from r0 to r1 with total variance `var`, from a uniform draw u.

    P(min <= m) = exp(-2 (r0 - m) (r1 - m) / var) for m <= min(r0, r1).
    """
    if var <= 0:
        return min(r0, r1)
    return 0.5 * (r0 + r1 - math.sqrt((r1 - r0) ** 2 - 2 * var * math.log1p(-u)))


def single_increment(state: SurfaceState, dt: float, xi: np.ndarray) -> complex:
    return math.sqrt(dt / state.lam) * complex(xi[0], xi[1])


def step_single(model: SurfaceModel, state: SurfaceState, dt: float, noise: NoiseSource) -> SurfaceState:
    assert dt > 0, "dt must be positive"
    return advance_state(model, state, single_increment(state, dt, noise.normal(2)))


def initial_coupled_state(M: SurfaceModel, N: SurfaceModel, x0, y0) -> CoupledState:
    xstate, ystate = evaluate_state(M, as_complex(x0)), evaluate_state(N, as_complex(y0))
    return CoupledState(xstate, ystate, 0.0, float(np.linalg.norm(xstate.X - ystate.X)))


def plan_coupling(cstate: CoupledState, cfg: Optional[CouplingConfig] = None) -> CouplingPlan:
    cfg = cfg or CouplingConfig()
    config = compute_configuration(cstate.xstate, cstate.ystate, cfg.tol_deg, cfg.tol_sigma, cfg.r_min)
    choice = coupling_choice(config, cfg)
    rates = rate_pair(*config.angles, choice.sigma, choice.A, choice.eps_hat)
    return CouplingPlan(config, choice, dispersion(choice), rates)


def coupled_increment(
    cstate: CoupledState, plan: CouplingPlan, dt: float, xi: np.ndarray
) -> Tuple[complex, complex]:
    eta = math.sqrt(dt) * (plan.dispersion.B @ xi)
    c = plan.config
    vx = eta[0] * c.alpha_dir + eta[1] * c.beta_dir
    vy = eta[2] * c.a_dir + eta[3] * c.b_dir
    return chart_increment(cstate.xstate, vx), chart_increment(cstate.ystate, vy)


def _advance_coupled(M, N, cstate: CoupledState, plan: CouplingPlan, dzx: complex, dzy: complex, dt: float):
    x1 = advance_state(M, cstate.xstate, dzx)
    y1 = advance_state(N, cstate.ystate, dzy)
    r1 = float(np.linalg.norm(x1.X - y1.X))
    return CoupledState(
        x1,
        y1,
        cstate.t + dt,
        r1,
        cstate.r_qv + (r1 - cstate.r) ** 2,
        cstate.tau_gauss_x + abs(cstate.xstate.K) * dt,
        cstate.tau_gauss_y + abs(cstate.ystate.K) * dt,
        plan,
    )


def step_coupled(
    M: SurfaceModel,
    N: SurfaceModel,
    cstate: CoupledState,
    dt: float,
    noise: NoiseSource,
    cfg: Optional[CouplingConfig] = None,
) -> CoupledState:
    """One coupled Euler step: configuration, coupling law, dispersion, then both chart moves."""
    assert dt > 0, "dt must be positive"
    plan = plan_coupling(cstate, cfg)
    dzx, dzy = coupled_increment(cstate, plan, dt, noise.normal(4))
    return _advance_coupled(M, N, cstate, plan, dzx, dzy, dt)


def _guard_ok(model: SurfaceModel, state: SurfaceState, dz: complex, limit: float) -> bool:
    if dz == 0:
        return True
    grad = lambda_gradient(model, state)
    z1 = state.z + dz
    if model.domain.contains(z1):
        try:
            grad = max(grad, lambda_gradient_at(model, z1))
        except DegenerateMetric:
            return False
    return abs(dz) * grad <= limit


def _timed_out(t: float, control: StepControl) -> bool:
    return t >= control.t_max * (1 - 1e-12)


def _coupled_row(cs: CoupledState, plan: Optional[CouplingPlan], stop: str = "") -> Dict[str, Any]:
    row = dict(t=cs.t, r=cs.r)
    if plan is None:
        row.update(theta=math.nan, phi=math.nan, psi=math.nan, f=math.nan, g=math.nan, eps_hat=math.nan)
    else:
        c = plan.config
        row.update(theta=c.theta, phi=c.phi, psi=c.psi, f=plan.rates.qv_rate, g=plan.rates.drift_num)
        row.update(eps_hat=plan.choice.eps_hat)
    zx, zy = cs.xstate.z, cs.ystate.z
    row.update(xu=zx.real, xv=zx.imag, yu=zy.real, yv=zy.imag, stop_reason=stop)
    return row


def _close_series(rows: List[Dict[str, Any]], final: Dict[str, Any], columns: List[str]) -> pd.DataFrame:
    if rows and rows[-1]["t"] == final["t"]:
        rows[-1] = final
    else:
        rows.append(final)
    return pd.DataFrame(rows, columns=columns)


def run_coupled(
    M: SurfaceModel,
    N: SurfaceModel,
    x0,
    y0,
    control: StepControl,
    noise: NoiseSource,
    cfg: Optional[CouplingConfig] = None,
    hooks: Optional[Sequence[RunHook]] = None,
) -> RunResult:
    """Runs a coupled pair until it couples, hits the chart edge, times out or trips a numerical guard.

    Parameters
    ----------
    M, N: SurfaceModel
        The two surfaces
    x0, y0:
        Chart start points (complex or [re, im])
    control: StepControl
        Step size, thresholds and sampling
    noise: NoiseSource
        This trajectory's noise stream
    cfg: Optional[CouplingConfig]
        Coupling constants
    hooks: Optional[Sequence[RunHook]]
        Observers called after every accepted step

    Returns
    -------
    result: RunResult
        Stop reason, the sampled series (one row every `sample_stride` steps plus the final state), the
        terminal summary and the domination ledger over every step
    """
    cfg = cfg or CouplingConfig()
    hooks = list(hooks or ())
    cs = initial_coupled_state(M, N, x0, y0)
    r0 = cs.r
    if not r0 > control.r_couple:
        raise BadParams(f"start distance {r0:.3e} is already within r_couple = {control.r_couple:.0e}")
    ledger = DominationLedger()
    rows: List[Dict[str, Any]] = []
    r_low, steps, surface_boundary = r0, 0, False
    stop: Optional[StopReason] = None
    while stop is None:
        if cs.step_min <= control.r_couple:
            stop = StopReason.Coupled
            break
        if _timed_out(cs.t, control):
            stop = StopReason.TimedOut
            break
        try:
            plan = plan_coupling(cs, cfg)
        except ParticlesCoincident:
            stop = StopReason.Coupled
            break
        ledger.update(plan.rates, cs.r)
        if steps % control.sample_stride == 0:
            rows.append(_coupled_row(cs, plan))
        dt = min(control.step_size(cs.r), control.t_max - cs.t)
        xi = noise.normal(4)
        for _ in range(control.max_halvings + 1):
            dzx, dzy = coupled_increment(cs, plan, dt, xi)
            x_ok = _guard_ok(M, cs.xstate, dzx, control.lambda_guard)
            if x_ok and _guard_ok(N, cs.ystate, dzy, control.lambda_guard):
                break
            dt /= 2
        else:
            stop = StopReason.NumericalGuard
            break
        r_prev = cs.r
        try:
            cs = _advance_coupled(M, N, cs, plan, dzx, dzy, dt)
        except DomainExit as e:
            stop, surface_boundary = StopReason.Boundary, e.boundary
            break
        except DegenerateMetric:
            stop = StopReason.NumericalGuard
            break
        if control.bridge_check:
            low = bridge_minimum(r_prev, cs.r, plan.rates.qv_rate * dt, noise.uniform())
            cs = replace(cs, r_step_min=low)
        r_low = min(r_low, cs.r)
        steps += 1
        for hook in hooks:
            hook.on_step(cs.t, dt, cs)
    for hook in hooks:
        hook.finish(cs.t, cs, stop)

    try:
        final_plan = plan_coupling(cs, cfg)
    except ValueError:
        final_plan = None
    series = _close_series(rows, _coupled_row(cs, final_plan, stop.name), COUPLED_COLUMNS)
    summary = {
        "stop": stop.name,
        "steps": steps,
        "t_end": cs.t,
        "r0": r0,
        "r_end": cs.r,
        "r_min": r_low,
        "r_qv": cs.r_qv,
        "tau_gauss_x": cs.tau_gauss_x,
        "tau_gauss_y": cs.tau_gauss_y,
        "surface_boundary": surface_boundary,
    }
    summary.update(merge_hook_summaries(hooks))
    return RunResult(stop, series, summary, ledger.as_dict())


def _single_row(t: float, state: SurfaceState, tau: float, stop: str = "") -> Dict[str, Any]:
    X, m = state.X, state.m
    return dict(
        t=t, u=state.z.real, v=state.z.imag, x1=X[0], x2=X[1], x3=X[2], m1=m[0], m2=m[1], m3=m[2], tau_gauss=tau,
        stop_reason=stop,
    )


def run_single(
    model: SurfaceModel,
    x0,
    control: StepControl,
    noise: NoiseSource,
    hooks: Optional[Sequence[RunHook]] = None,
) -> RunResult:
    """A single Brownian motion up to t_max or the chart edge.

    Besides the series, the summary carries per-step accumulations: the realized coordinate covariation
    qv_ij = sum dX_i dX_j next to its predicted value law_ij = int (delta_ij - m_i m_j) ds, the spherical
    quadratic variation of the Gauss track next to tau_gauss = int |K| ds, and |X|^2 at both ends.
    """
    hooks = list(hooks or ())
    state = evaluate_state(model, as_complex(x0))
    X0 = state.X.copy()
    qv, law = np.zeros((3, 3)), np.zeros((3, 3))
    gauss_qv, tau, t, steps, surface_boundary = 0.0, 0.0, 0.0, 0, False
    rows: List[Dict[str, Any]] = []
    stop: Optional[StopReason] = None
    while stop is None:
        if _timed_out(t, control):
            stop = StopReason.TimedOut
            break
        if steps % control.sample_stride == 0:
            rows.append(_single_row(t, state, tau))
        dt = min(control.dt_base, control.t_max - t)
        xi = noise.normal(2)
        for _ in range(control.max_halvings + 1):
            dz = single_increment(state, dt, xi)
            if _guard_ok(model, state, dz, control.lambda_guard):
                break
            dt /= 2
        else:
            stop = StopReason.NumericalGuard
            break
        try:
            new = advance_state(model, state, dz)
        except DomainExit as e:
            stop, surface_boundary = StopReason.Boundary, e.boundary
            break
        except DegenerateMetric:
            stop = StopReason.NumericalGuard
            break
        dX, dm = new.X - state.X, new.m - state.m
        qv += np.outer(dX, dX)
        law += (np.eye(3) - np.outer(state.m, state.m)) * dt
        gauss_qv += float(dm @ dm)
        tau += abs(state.K) * dt
        t += dt
        state = new
        steps += 1
        for hook in hooks:
            hook.on_step(t, dt, state)
    for hook in hooks:
        hook.finish(t, state, stop)

    series = _close_series(rows, _single_row(t, state, tau, stop.name), SINGLE_COLUMNS)
    summary = {
        "stop": stop.name,
        "steps": steps,
        "t_end": t,
        "rho2_0": float(X0 @ X0),
        "rho2_end": float(state.X @ state.X),
        "gauss_qv": gauss_qv,
        "tau_gauss": tau,
        "surface_boundary": surface_boundary,
    }
    for i in range(3):
        for j in range(i, 3):
            summary[f"qv_{i + 1}{j + 1}"] = qv[i, j]
            summary[f"law_{i + 1}{j + 1}"] = law[i, j]
    summary.update(merge_hook_summaries(hooks))
    return RunResult(stop, series, summary)


def estimate_qv(series) -> float:
    """Realized quadratic variation: the sum of squared successive increments."""
    x = np.asarray(series, dtype=float)
    if x.ndim != 1 or len(x) < 2:
        raise TooFewSamples(f"need at least 2 samples, got {x.size}")
    return float(np.sum(np.diff(x) ** 2))
