import math
from dataclasses import dataclass, field
from typing import List, Optional


@dataclass
class StoCompTaskConfig:
    """Config for the stopped identity E[rho^2_tau - rho^2_0 - 2 tau] = 0

    Attributes
    ----------
    n_stderr : float
        Tolerance in Monte Carlo standard errors
    allowance_rel : float
        Discretization allowance relative to rho_0^2 + 2 t_max; the tolerance is the larger of the two
    """

    n_stderr: float = 4.0
    allowance_rel: float = 0.0


@dataclass
class CoordinateQVTaskConfig:
    """Config for the coordinate quadratic variation law

    Attributes
    ----------
    pairs : List[List[int]]
        1-based coordinate pairs (i, j), i <= j, to compare
    rel_tol : float
        Allowed pooled relative error
    """

    pairs: List[List[int]] = field(default_factory=lambda: [[1, 1], [2, 2], [3, 3], [1, 2], [1, 3], [2, 3]])
    rel_tol: float = 0.02


@dataclass
class GaussOccupationTaskConfig:
    """Config for the occupation of spherical caps by the Gauss map

    Attributes
    ----------
    cap_radius : float
        Angular radius of the 12 caps centred on the vertices of an icosahedron
    grid : List[float]
        Checkpoint times as fractions of t_max
    min_fraction : float
        Required fraction of trajectories whose occupation of a reachable cap grows between the middle and
        the last checkpoint
    """

    cap_radius: float = math.pi / 8
    grid: List[float] = field(default_factory=lambda: [0.25, 0.5, 0.75, 1.0])
    min_fraction: float = 0.95


@dataclass
class GaussTimeChangeTaskConfig:
    """Attributes
    ----------
    rel_tol : float
        Allowed relative error of the spherical quadratic variation against 2 int |K| ds
    """

    rel_tol: float = 0.05


@dataclass
class HalfspaceTaskConfig:
    """Config for the halfspace scenario

    Attributes
    ----------
    expect : str
        "decrease" (M not flat: the low quantile of inf r keeps dropping), "constant" (synchronous control:
        inf r never leaves r_0) or "couple" (mirror control: some trajectories couple)
    quantile : float
        Quantile level of inf r tracked across checkpoints
    grid : List[float]
        Checkpoint times as fractions of t_max
    min_drop : float
        Smallest drop of the quantile between consecutive checkpoints that counts as strictly decreasing
    constant_tol : float
        Allowed movement of inf r in the "constant" case
    """

    expect: str = "decrease"
    quantile: float = 0.1
    grid: List[float] = field(default_factory=lambda: [0.25, 0.5, 1.0])
    min_drop: float = 1e-9
    constant_tol: float = 1e-9


@dataclass
class MirrorTaskConfig:
    """Config for the mirror coupling in the plane

    Attributes
    ----------
    grid : List[float]
        Times, as fractions of t_max, at which the coupling-time CDF is compared with the oracle
    n_stderr : float
        Tolerance in binomial standard errors
    allowance : float
        Discretization allowance added to the tolerance
    sensitivity : bool
        Also couple at r_couple / 2 and compare with the first hits of r_couple
    sensitivity_tol : float
        Allowed change of the coupling probability when r_couple is halved
    """

    grid: List[float] = field(default_factory=lambda: [0.25, 0.5, 0.75, 1.0])
    n_stderr: float = 3.0
    allowance: float = 0.01
    sensitivity: bool = False
    sensitivity_tol: float = 0.005


@dataclass
class LiouvilleTaskConfig:
    """Config for two motions on one surface

    Attributes
    ----------
    grid : List[float]
        Times, as fractions of t_max, at which the coupling fraction is reported
    floor_allowance : float
        How far the coupling fraction may fall below the plane benchmark at the same r_0
    excursion_level : Optional[float]
        Level a of the excursion check P(reach r_couple before 2a | reach a); None skips it
    min_excursion_prob : float
        Required per-excursion success frequency
    n_stderr : float
        Tolerance in binomial standard errors for the excursion frequency
    """

    grid: List[float] = field(default_factory=lambda: [0.25, 0.5, 0.75, 1.0])
    floor_allowance: float = 0.1
    excursion_level: Optional[float] = None
    min_excursion_prob: float = 0.3
    n_stderr: float = 3.0


@dataclass
class MaxPrincipleTaskConfig:
    """Attributes
    ----------
    tol : float
        Allowed excess of the smallest terminal distance over r_0
    """

    tol: float = 1e-9


@dataclass
class TasksConfig:
    sto_comp: StoCompTaskConfig = field(default_factory=StoCompTaskConfig)
    coordinate_qv: CoordinateQVTaskConfig = field(default_factory=CoordinateQVTaskConfig)
    gauss_occupation: GaussOccupationTaskConfig = field(default_factory=GaussOccupationTaskConfig)
    gauss_timechange: GaussTimeChangeTaskConfig = field(default_factory=GaussTimeChangeTaskConfig)
    halfspace: HalfspaceTaskConfig = field(default_factory=HalfspaceTaskConfig)
    mirror: MirrorTaskConfig = field(default_factory=MirrorTaskConfig)
    liouville: LiouvilleTaskConfig = field(default_factory=LiouvilleTaskConfig)
    max_principle: MaxPrincipleTaskConfig = field(default_factory=MaxPrincipleTaskConfig)
