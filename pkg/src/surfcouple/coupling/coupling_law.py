"""Pointwise coupling algebra.

The motion on N is driven by O(xi_1, xi_2), O = [[A cos s, A sin s], [-sin s, cos s]] an element of O(2)
expressed in the configuration frames, optionally mixed with independent noise of weight eps_hat. The
distance r then has quadratic variation rate f and drift g / (2r):

    f = sin^2 t + sin^2 p - 2 c A sin t sin p cos s
    g = 2 + cos^2 t + cos^2 p - 2 c [cos s (A cos t cos p cos q + cos q) - sin s (cos t + A cos p) sin q]

with (t, p, q) = (theta, phi, psi) and c = sqrt(1 - eps_hat^2). Maximizing f - g over O(2) is linear in
(cos s, sin s), which gives the closed form in `gap_max`.
"""
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np

from surfcouple.coupling.config import CouplingConfig
from surfcouple.geometry.configuration import Configuration, Region
from surfcouple.utils.errors import BadParams


@dataclass(frozen=True)
class CouplingChoice:
    A: int
    sigma: float
    eps_hat: float = 0.0

    def __post_init__(self):
        if self.A not in (1, -1):
            raise BadParams(f"A must be +1 or -1, got {self.A}")
        if not 0 <= self.eps_hat < 0.5:
            raise BadParams(f"eps_hat must lie in [0, 1/2), got {self.eps_hat}")


class RatePair(NamedTuple):
    qv_rate: float
    drift_num: float


class GapMax(NamedTuple):
    value: float
    A_star: int
    sigma_star: float


@dataclass(frozen=True)
class Dispersion:
    """Diffusion matrix `a` of the product motion in the (alpha, beta, a, b) frame and a factor B B^T = a."""

    a: np.ndarray
    B: np.ndarray
    O: np.ndarray


def orthogonal_block(A: int, sigma: float) -> np.ndarray:
    c, s = math.cos(sigma), math.sin(sigma)
    return np.array([[A * c, A * s], [-s, c]])


def _coefficients(theta: float, phi: float, psi: float, A: int) -> Tuple[float, float]:
    ct, cp, st, sp = math.cos(theta), math.cos(phi), math.sin(theta), math.sin(phi)
    cq, sq = math.cos(psi), math.sin(psi)
    c1 = A * ct * cp * cq + cq - A * st * sp
    c2 = -(A * cp * sq + ct * sq)
    return c1, c2


def rate_pair(theta: float, phi: float, psi: float, sigma: float, A: int, eps_hat: float = 0.0) -> RatePair:
    c = math.sqrt(1.0 - eps_hat * eps_hat)
    ct, cp, st, sp = math.cos(theta), math.cos(phi), math.sin(theta), math.sin(phi)
    cq, sq = math.cos(psi), math.sin(psi)
    cs, ss = math.cos(sigma), math.sin(sigma)
    f = st * st + sp * sp - 2 * c * A * st * sp * cs
    cross = cs * (A * ct * cp * cq + cq) - ss * (ct + A * cp) * sq
    g = 2 + ct * ct + cp * cp - 2 * c * cross
    return RatePair(max(f, 0.0), max(g, 0.0))


def optimal_sigma(theta: float, phi: float, psi: float, A: int) -> float:
    """The sigma maximizing f - g for a fixed orientation branch A; 0 when f - g does not depend on sigma."""
    c1, c2 = _coefficients(theta, phi, psi, A)
    if math.hypot(c1, c2) <= 1e-14:
        return 0.0
    return math.atan2(c2, c1) % (2 * math.pi)


def gap_max(theta: float, phi: float, psi: float, tie_tol: float = 1e-12) -> GapMax:
    """max over O(2) of f - g, the maximizing branch A = sign(h) (-1 on ties) and its sigma."""
    h = math.cos(theta) * math.cos(phi) - math.cos(psi) * math.sin(theta) * math.sin(phi)
    A = -1 if abs(h) <= tie_tol else (1 if h > 0 else -1)
    best = max(math.hypot(*_coefficients(theta, phi, psi, 1)), math.hypot(*_coefficients(theta, phi, psi, -1)))
    value = 2 * best - 2 * (math.cos(theta) ** 2 + math.cos(phi) ** 2)
    return GapMax(value, A, optimal_sigma(theta, phi, psi, A))


def gap_max_values(theta, phi, psi) -> np.ndarray:
    """The value of `gap_max`, broadcast over arrays of angles."""
    ct, cp, st, sp = np.cos(theta), np.cos(phi), np.sin(theta), np.sin(phi)
    cq, sq = np.cos(psi), np.sin(psi)
    best = np.zeros(np.broadcast(ct, cp, cq).shape)
    for A in (1, -1):
        best = np.maximum(best, np.hypot(A * ct * cp * cq + cq - A * st * sp, A * cp * sq + ct * sq))
    return 2 * best - 2 * (ct * ct + cp * cp)


def select_on_sigma0(config: Configuration, tie_tol: float = 1e-12) -> int:
    """Orientation branch on (or near) Sigma0: the orientation-reversing one whenever the two tie."""
    if abs(config.h) <= tie_tol:
        return -1
    return 1 if config.h > 0 else -1


def adequacy_cap(theta: float, phi: float, gap: float, margin: float = 0.5) -> float:
    """Largest eps_hat that keeps g <= f at the optimal (A, sigma), pulled in by `margin`.

    With c = sqrt(1 - eps^2) the optimal f - g is c (gap + 2C) - 2C, C = cos^2 theta + cos^2 phi, which stays
    nonnegative for c >= c0 = 2C / (gap + 2C).
    """
    if gap <= 0:
        return 0.0
    C = math.cos(theta) ** 2 + math.cos(phi) ** 2
    c0 = 2 * C / (gap + 2 * C)
    c_min = c0 + margin * (1 - c0)
    return math.sqrt(max(0.0, 1 - c_min * c_min))


def bump(s: float) -> float:
    return (1 - s * s) ** 2 if abs(s) < 1 else 0.0


def eps_hat(config: Configuration, cfg: Optional[CouplingConfig] = None) -> float:
    """Perturbation weight: supported in |h| < delta, zero where the optimal gap vanishes,
    positive on Sigma0 \\ SigmaE."""
    cfg = cfg or CouplingConfig()
    if config.region == Region.SigmaE:
        return 0.0
    gap = gap_max(*config.angles, tie_tol=cfg.tie_tol).value
    if gap <= 0:
        return 0.0
    eps = cfg.eps_max * bump(config.h / cfg.delta) * min(max(gap / cfg.kappa, 0.0), 1.0)
    return min(eps, adequacy_cap(config.theta, config.phi, gap, cfg.adequacy_margin))


def dispersion_matrices(A: int, sigma: float, eps: float) -> Dispersion:
    """Block matrices for any eps in [0, 1]; eps = 1 gives independent motions."""
    O = orthogonal_block(A, sigma)
    c = math.sqrt(max(0.0, 1 - eps * eps))
    eye, zero = np.eye(2), np.zeros((2, 2))
    a = np.block([[eye, c * O.T], [c * O, eye]])
    B = np.block([[eye, zero], [c * O, eps * eye]])
    return Dispersion(a, B, O)


def dispersion(choice: CouplingChoice) -> Dispersion:
    return dispersion_matrices(choice.A, choice.sigma, choice.eps_hat)


def frame_gradient(config: Configuration, grad_x: np.ndarray, grad_y: np.ndarray) -> np.ndarray:
    """Expresses a pair of ambient gradients (at x and at y) in the (alpha, beta, a, b) basis."""
    return np.array(
        [
            np.dot(grad_x, config.alpha_dir),
            np.dot(grad_x, config.beta_dir),
            np.dot(grad_y, config.a_dir),
            np.dot(grad_y, config.b_dir),
        ]
    )


def gamma_form(choice: CouplingChoice, config: Configuration, v: np.ndarray) -> float:
    """Gamma(v, v) = |v_M + O^T v_N|^2 for the unperturbed coupling.

    `v` is either a 4-vector in the (alpha, beta, a, b) basis or a 2x3 array of ambient gradients at x and y.
    """
    v = np.asarray(v, dtype=float)
    if v.shape == (2, 3):
        v = frame_gradient(config, v[0], v[1])
    O = orthogonal_block(choice.A, choice.sigma)
    w = v[:2] + O.T @ v[2:]
    return float(np.dot(w, w))


def coupling_choice(config: Configuration, cfg: Optional[CouplingConfig] = None) -> CouplingChoice:
    """The coupling used at a configuration: optimal branch and sigma, Sigma0 tie-break, eps_hat."""
    cfg = cfg or CouplingConfig()
    best = gap_max(*config.angles, tie_tol=cfg.tie_tol)
    A = best.A_star
    if config.region in (Region.Sigma0, Region.SigmaE):
        A = select_on_sigma0(config, cfg.tie_tol)
    return CouplingChoice(A, optimal_sigma(*config.angles, A), eps_hat(config, cfg))
