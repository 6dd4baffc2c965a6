"""Per-trajectory observers called by the engine after every accepted step.

A hook sees the time, the accepted step size and the new state (a SurfaceState for single runs, a
CoupledState for coupled runs), and reports flat scalar fields that end up in the run summary.
"""
import math
from typing import Any, Dict, List, Optional, Sequence

import numpy as np


class RunHook:
    name = "hook"

    def on_step(self, t: float, dt: float, state) -> None:
        pass

    def finish(self, t: float, state, stop) -> None:
        pass

    def summary(self) -> Dict[str, Any]:
        return {}


class _Checkpoints:
    def __init__(self, times: Sequence[float]):
        self.times = [float(t) for t in times]
        self.next = 0

    def due(self, t: float) -> int:
        """How many checkpoints lie at or before t and have not been taken yet."""
        k = self.next
        while self.next < len(self.times) and t >= self.times[self.next] * (1 - 1e-12):
            self.next += 1
        return self.next - k

    def remaining(self) -> int:
        k = len(self.times) - self.next
        self.next = len(self.times)
        return k


def _step_min(state) -> float:
    """Lowest distance reached over the last step (the bridge minimum when the engine samples it)."""
    return getattr(state, "step_min", state.r)


class FirstHit(RunHook):
    """First time the distance of a coupled run reaches `level` (NaN if never)."""

    def __init__(self, level: float, name: str = "first_hit"):
        self.level = level
        self.name = name
        self.t_hit = math.nan

    def on_step(self, t, dt, state):
        if math.isnan(self.t_hit) and _step_min(state) <= self.level:
            self.t_hit = t

    def summary(self):
        return {f"{self.name}_t": self.t_hit}


class RunningMin(RunHook):
    """Running minimum of the distance, sampled at fixed times; a stopped run keeps its last value."""

    def __init__(self, times: Sequence[float], r0: float, name: str = "inf_r"):
        self.clock = _Checkpoints(times)
        self.name = name
        self.current = r0
        self.values: List[float] = []

    def on_step(self, t, dt, state):
        self.current = min(self.current, state.r)
        self.values.extend([self.current] * self.clock.due(t))

    def finish(self, t, state, stop):
        self.values.extend([self.current] * self.clock.remaining())

    def summary(self):
        return {f"{self.name}_{i}": v for i, v in enumerate(self.values)} | {f"{self.name}_final": self.current}


class CapOccupation(RunHook):
    """Time the Gauss image spends in spherical caps of angular `radius` around `centers`, at fixed times."""

    def __init__(self, centers: np.ndarray, radius: float, times: Sequence[float], name: str = "cap"):
        self.centers = np.asarray(centers, dtype=float)
        self.cos_radius = math.cos(radius)
        self.clock = _Checkpoints(times)
        self.name = name
        self.occupation = np.zeros(len(self.centers))
        self.snapshots: List[np.ndarray] = []

    def on_step(self, t, dt, state):
        self.occupation[self.centers @ state.m >= self.cos_radius] += dt
        for _ in range(self.clock.due(t)):
            self.snapshots.append(self.occupation.copy())

    def finish(self, t, state, stop):
        for _ in range(self.clock.remaining()):
            self.snapshots.append(self.occupation.copy())

    def summary(self):
        return {
            f"{self.name}{c}_{i}": float(snap[c]) for i, snap in enumerate(self.snapshots) for c in range(len(snap))
        }


class ExcursionCounter(RunHook):
    """Excursions of a coupled distance: once r reaches `a`, does it reach `low` before `2a`?"""

    def __init__(self, a: float, low: float, r0: float, name: str = "excursion"):
        self.a, self.low = a, low
        self.name = name
        self.armed = r0 <= a
        self.attempts = int(self.armed)
        self.successes = 0

    def on_step(self, t, dt, state):
        r, low = state.r, _step_min(state)
        if self.armed:
            if low <= self.low:
                self.successes += 1
                self.armed = False
            elif r >= 2 * self.a:
                self.armed = False
        elif low <= self.a:
            self.attempts += 1
            if low <= self.low:
                self.successes += 1
            else:
                self.armed = True

    def finish(self, t, state, stop):
        if self.armed:
            # unresolved at the time cap
            self.attempts -= 1
            self.armed = False

    def summary(self):
        return {f"{self.name}_attempts": self.attempts, f"{self.name}_successes": self.successes}


def merge_hook_summaries(hooks: Optional[Sequence[RunHook]]) -> Dict[str, Any]:
    out: Dict[str, Any] = {}
    for hook in hooks or ():
        out.update(hook.summary())
    return out
