"""The relative position of two surface points, reduced to three angles.

For points x on M and y on N at distance r, e3 points from y to x. theta (resp. phi) is the angle between
e3 and the normal line of M at x (resp. N at y), so that the tangential part of e3 is sin(theta) alpha_dir
(resp. sin(phi) a_dir). e2 = beta_dir lies in T_xM and is orthogonal to e3, and psi measures how far the
tangent plane of N is turned about e3 relative to that of M:

    P_N e1 = cos(phi) cos(psi) a_dir + sin(psi) b_dir
    P_N e2 = -cos(phi) sin(psi) a_dir + cos(psi) b_dir

Normals are oriented so that m.e3 >= 0 and n.e3 >= 0; e2 is reflected when needed to bring psi into [0, pi].
"""
import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Tuple

import numpy as np

from surfcouple.geometry.surfaces import SurfaceModel, SurfaceState, chart_increment
from surfcouple.utils.errors import NotOnSigmaE, ParticlesCoincident


class Region(Enum):
    """Sign of h = cos(theta)cos(phi) - cos(psi)sin(theta)sin(phi), with Sigma0 = {h = 0} and its subset SigmaE."""

    SigmaPlus = 0
    SigmaMinus = 1
    Sigma0 = 2
    SigmaE = 3


@dataclass(frozen=True)
class AdaptedAxes:
    e1: np.ndarray
    e2: np.ndarray
    e3: np.ndarray


@dataclass(frozen=True)
class Configuration:
    """Angles, adapted axes and tangent frames of a pair of points.

    Attributes
    ----------
    r : float
        Distance |X_x - X_y|
    theta : float
        In [0, pi/2]
    phi : float
        In [0, pi/2]
    psi : float
        In [0, pi], zero whenever either angle is degenerate
    axes : AdaptedAxes
        The e1, e2, e3 axes, e3 = (X_x - X_y) / r
    alpha_dir, beta_dir : np.ndarray
        Orthonormal frame of T_xM
    a_dir, b_dir : np.ndarray
        Orthonormal frame of T_yN
    theta_degenerate, phi_degenerate : bool
        Whether the tangential part of e3 was below the degeneracy tolerance
    h : float
        cos(theta)cos(phi) - cos(psi)sin(theta)sin(phi)
    region : Region
    """

    r: float
    theta: float
    phi: float
    psi: float
    axes: AdaptedAxes
    alpha_dir: np.ndarray
    beta_dir: np.ndarray
    a_dir: np.ndarray
    b_dir: np.ndarray
    theta_degenerate: bool
    phi_degenerate: bool
    h: float
    region: Region

    @property
    def angles(self) -> Tuple[float, float, float]:
        return self.theta, self.phi, self.psi


@dataclass(frozen=True)
class ShapeData:
    """The normal's derivative in an orthonormal tangent frame (dir1, dir2):

    D_dir1 m = k (cos s dir1 + sin s dir2),   D_dir2 m = k (sin s dir1 - cos s dir2)
    """

    k: float
    s: float


class ConfigDerivatives(NamedTuple):
    """Derivatives of theta + phi and of psi along the two coupled directions, at a SigmaE configuration."""

    d_alpha_sum: float
    d_beta_sum: float
    d_alpha_psi: float
    d_beta_psi: float


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def _fixed_horizontal(e3: np.ndarray) -> np.ndarray:
    u = np.array([1.0, 0.0, 0.0])
    if np.linalg.norm(np.cross(e3, u)) < 1e-6:
        u = np.array([0.0, 1.0, 0.0])
    return _unit(np.cross(e3, u))


def _tangent(v: np.ndarray, normal: np.ndarray) -> np.ndarray:
    return _unit(v - np.dot(v, normal) * normal)


def classify_region(theta: float, phi: float, psi: float, tol_sigma: float = 1e-6) -> Tuple[float, Region]:
    h = math.cos(theta) * math.cos(phi) - math.cos(psi) * math.sin(theta) * math.sin(phi)
    if abs(psi) <= tol_sigma and abs(theta + phi - math.pi / 2) <= tol_sigma:
        return h, Region.SigmaE
    if abs(h) <= tol_sigma:
        return h, Region.Sigma0
    return h, (Region.SigmaPlus if h > 0 else Region.SigmaMinus)


def compute_configuration(
    xstate: SurfaceState,
    ystate: SurfaceState,
    tol_deg: float = 1e-9,
    tol_sigma: float = 1e-6,
    r_min: float = 1e-12,
) -> Configuration:
    """Builds the adapted axes and the (theta, phi, psi) configuration of x on M and y on N.

    Parameters
    ----------
    xstate: SurfaceState
        The point on M
    ystate: SurfaceState
        The point on N
    tol_deg: float
        Below this length the tangential part of e3 counts as zero (theta or phi degenerate)
    tol_sigma: float
        Region classification tolerance
    r_min: float
        Distances at or below this raise ParticlesCoincident

    Returns
    -------
    config: Configuration
    """
    diff = xstate.X - ystate.X
    r = float(np.linalg.norm(diff))
    if not r > r_min:
        raise ParticlesCoincident(f"distance {r:.3e} is below r_min = {r_min:.0e}")
    e3 = diff / r
    m, n = xstate.m, ystate.m
    m_o = m if np.dot(m, e3) >= 0 else -m
    n_o = n if np.dot(n, e3) >= 0 else -n
    p = e3 - np.dot(e3, m) * m
    q = e3 - np.dot(e3, n) * n
    sin_theta, sin_phi = float(np.linalg.norm(p)), float(np.linalg.norm(q))
    theta_degenerate, phi_degenerate = sin_theta <= tol_deg, sin_phi <= tol_deg

    if not theta_degenerate:
        theta = math.asin(min(sin_theta, 1.0))
        alpha = p / sin_theta
        e2 = np.cross(m_o, alpha)
    else:
        theta = 0.0
        # Adapt the horizontal axes to N when it has a tangential direction, so psi = 0 is exact
        e2 = _unit(np.cross(e3, n_o)) if not phi_degenerate else _fixed_horizontal(e3)
        alpha = _tangent(np.cross(e2, e3), m)
    beta = np.cross(m_o, alpha)
    e1 = np.cross(e2, e3)

    if phi_degenerate:
        phi, psi = 0.0, 0.0
        a = _tangent(e1, n)
        b = np.cross(n_o, a)
    elif theta_degenerate:
        phi, psi = math.asin(min(sin_phi, 1.0)), 0.0
        a = q / sin_phi
        b = np.cross(a, n_o)
    else:
        phi = math.asin(min(sin_phi, 1.0))
        a = q / sin_phi
        b = np.cross(n, a)
        if math.cos(phi) >= 1e-6:
            psi = math.atan2(-np.dot(a, e2), np.dot(a, e1))
            if psi < -tol_deg:
                # reflect z2
                e2, beta, psi = -e2, -beta, -psi
            psi = max(psi, 0.0)
            if np.dot(b, math.sin(psi) * e1 + math.cos(psi) * e2) < 0:
                b = -b
        else:
            # a is (nearly) e3; psi is only visible through b, whose sign is free
            psi = math.atan2(np.dot(b, e1), np.dot(b, e2))
            if psi < 0:
                b, psi = -b, psi + math.pi

    h, region = classify_region(theta, phi, psi, tol_sigma)
    return Configuration(
        r=r,
        theta=theta,
        phi=phi,
        psi=psi,
        axes=AdaptedAxes(e1, e2, e3),
        alpha_dir=alpha,
        beta_dir=beta,
        a_dir=a,
        b_dir=b,
        theta_degenerate=theta_degenerate,
        phi_degenerate=phi_degenerate,
        h=h,
        region=region,
    )


def normal_derivative(model: SurfaceModel, state: SurfaceState, v: np.ndarray) -> np.ndarray:
    """D_v m for a tangent vector v, through the chart velocity and the quotient rule on the stereographic normal."""
    dg = state.wg_deriv * chart_increment(state, v)
    gx, gy = state.wg.real, state.wg.imag
    D = 1.0 + gx * gx + gy * gy
    N = np.array([2 * gx, 2 * gy, D - 2.0])
    dm_dgx = (np.array([2.0, 0.0, 2 * gx]) * D - N * 2 * gx) / D**2
    dm_dgy = (np.array([0.0, 2.0, 2 * gy]) * D - N * 2 * gy) / D**2
    return model.rotate(dm_dgx * dg.real + dm_dgy * dg.imag)


def shape_data(
    model: SurfaceModel, state: SurfaceState, frame: Tuple[np.ndarray, np.ndarray], orientation: float = 1.0
) -> ShapeData:
    """k = sqrt(-K) and the phase s of the Gauss map differential in `frame`.

    `orientation` is -1 when the frame's normal is the opposite of the Gauss map normal.
    """
    dir1, dir2 = frame
    k = math.sqrt(max(-state.K, 0.0))
    if k < 1e-12:
        return ShapeData(k, 0.0)
    dm = orientation * normal_derivative(model, state, dir1)
    s = math.atan2(np.dot(dm, dir2), np.dot(dm, dir1)) % (2 * math.pi)
    return ShapeData(k, s)


def sigma_e_shape_pair(
    config: Configuration, M: SurfaceModel, xstate: SurfaceState, N: SurfaceModel, ystate: SurfaceState
) -> Tuple[ShapeData, ShapeData]:
    """Shape data of both points in the configuration frames, with normals oriented along e3."""
    e3 = config.axes.e3
    orient_m = 1.0 if np.dot(xstate.m, e3) >= 0 else -1.0
    orient_n = 1.0 if np.dot(ystate.m, e3) >= 0 else -1.0
    return (
        shape_data(M, xstate, (config.alpha_dir, config.beta_dir), orient_m),
        shape_data(N, ystate, (config.a_dir, config.b_dir), orient_n),
    )


def config_derivatives(config: Configuration, shape_M: ShapeData, shape_N: ShapeData, A: int) -> ConfigDerivatives:
    """Derivatives of theta + phi and psi along the coupled directions at a SigmaE configuration (sigma = 0).

    The coupled directions are alpha_dir + A a_dir and beta_dir + b_dir; the shape data must come from
    sigma_e_shape_pair.
    """
    assert A in (1, -1), "A must be +1 or -1"
    if config.region != Region.SigmaE or not (config.theta > 0 and config.phi > 0):
        raise NotOnSigmaE(
            f"configuration {config.angles} in region {config.region.name} is not an interior SigmaE point"
        )
    k1, s1, k2, s2 = shape_M.k, shape_M.s, shape_N.k, shape_N.s
    sin_t, sin_p = math.sin(config.theta), math.sin(config.phi)
    return ConfigDerivatives(
        d_alpha_sum=(2 / config.r) * (math.cos(config.theta) - A * sin_t) - k1 * math.cos(s1) - A * k2 * math.cos(s2),
        d_beta_sum=-k1 * math.sin(s1) - k2 * math.sin(s2),
        d_alpha_psi=-k1 * math.sin(s1) / sin_t + A * k2 * math.sin(s2) / sin_p,
        d_beta_psi=k1 * math.cos(s1) / sin_t - k2 * math.cos(s2) / sin_p,
    )
