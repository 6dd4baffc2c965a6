from dataclasses import dataclass


@dataclass
class StepControlConfig:
    """Time stepping and stopping rules.

    Attributes
    ----------
    dt_base : float
        Base Euler-Maruyama time step
    r_couple : float
        The particles count as coupled once their distance is at or below this
    t_max : float
        Time cap; a run reaching it stops with reason TimedOut
    lambda_guard : float
        Largest accepted |dz| |grad lambda| / lambda over a step; larger steps are halved
    sample_stride : int
        A series row is recorded every `sample_stride` steps
    max_halvings : int
        Rejected steps are halved at most this many times before the run stops with NumericalGuard
    max_refinement : float
        Cap on the proximity refinement of dt near coupling
    proximity_factor : float
        dt is divided by (proximity_factor * r_couple / r)^2 once r < proximity_factor * r_couple
    bridge_check : bool
        Also count a coupled step as coupling when the Brownian-bridge minimum of r sampled over the step
        reaches r_couple
    """

    dt_base: float = 1e-4
    r_couple: float = 1e-3
    t_max: float = 1.0
    lambda_guard: float = 0.1
    sample_stride: int = 100
    max_halvings: int = 20
    max_refinement: float = 1e4
    proximity_factor: float = 10.0
    bridge_check: bool = True
