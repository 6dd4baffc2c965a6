from dataclasses import dataclass


@dataclass
class CouplingConfig:
    """Constants of the pointwise coupling law.

    Attributes
    ----------
    eps_max : float
        Largest perturbation toward independent marginals; must stay below 1/2
    delta : float
        Half-width in h of the band around Sigma0 where the perturbation is switched on
    kappa : float
        Scale of the optimal gap below which the perturbation is ramped down linearly
    tol_sigma : float
        Region classification tolerance
    tol_deg : float
        Degeneracy tolerance on the tangential part of the separation direction
    r_min : float
        Distances at or below this count as coincident particles
    tie_tol : float
        |h| at or below this is a tie between the two orientation branches, broken toward A = -1
    adequacy_margin : float
        Where the perturbation cap sits between the weakest adequate cross-coupling strength (0) and full
        strength (1); 0 < adequacy_margin < 1 keeps the drift strictly dominated off the equality set
    """

    eps_max: float = 0.25
    delta: float = 0.1
    kappa: float = 0.1
    tol_sigma: float = 1e-6
    tol_deg: float = 1e-9
    r_min: float = 1e-12
    tie_tol: float = 1e-12
    adequacy_margin: float = 0.5
