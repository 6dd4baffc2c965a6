"""Pointwise Weierstrass-Enneper formulas and chart domains.

A minimal surface is generated by a holomorphic pair (wf, wg) on a planar chart domain:

    Phi = ( wf (1 - wg^2) / 2, i wf (1 + wg^2) / 2, wf wg ),   X = Re \\int Phi dz

so that X_u = Re Phi, X_v = -Im Phi, |X_u|^2 = |X_v|^2 = lambda and the unit normal is the inverse
stereographic projection of wg.
"""
import cmath
import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from surfcouple.utils.errors import BadParams, DegenerateMetric

# |wf| below this is treated as a collapsed metric
WF_GUARD = 1e-12

DOMAIN_KINDS = ("whole", "disk", "annulus", "rectangle", "sector")


def gauss_normal(wg_val: complex) -> np.ndarray:
    """Inverse stereographic projection of the Gauss map value `wg_val`; a pole maps to (0, 0, 1)."""
    if not cmath.isfinite(wg_val):
        return np.array([0.0, 0.0, 1.0])
    gx, gy = wg_val.real, wg_val.imag
    g2 = gx * gx + gy * gy
    return np.array([2 * gx, 2 * gy, g2 - 1.0]) / (1.0 + g2)


def _check_wf(wf_val: complex):
    if abs(wf_val) < WF_GUARD:
        raise DegenerateMetric(f"|wf| = {abs(wf_val):.3e} is below the metric guard {WF_GUARD:.0e}")


def conformal_factor(wf_val: complex, wg_val: complex) -> float:
    _check_wf(wf_val)
    return (abs(wf_val) * (1 + abs(wg_val) ** 2) / 2) ** 2


def curvature(wf_val: complex, wg_val: complex, wg_deriv_val: complex) -> float:
    _check_wf(wf_val)
    return -((4 * abs(wg_deriv_val) / (abs(wf_val) * (1 + abs(wg_val) ** 2) ** 2)) ** 2)


def weierstrass_phi(wf_val: complex, wg_val: complex) -> np.ndarray:
    """The holomorphic differential Phi (X = Re of its integral), as a length-3 complex array."""
    g2 = wg_val * wg_val
    return np.array([wf_val * (1 - g2) / 2, 1j * wf_val * (1 + g2) / 2, wf_val * wg_val], dtype=complex)


def immersion_differential(wf_val: complex, wg_val: complex) -> Tuple[np.ndarray, np.ndarray]:
    """Returns the coordinate frame (X_u, X_v) = (Re Phi, -Im Phi)."""
    _check_wf(wf_val)
    phi = weierstrass_phi(wf_val, wg_val)
    return phi.real.copy(), -phi.imag


def log_lambda_gradient(wf_val: complex, wg_val: complex, wg_deriv_val: complex, wf_deriv_val: complex) -> float:
    """|grad lambda| / lambda in chart units, from log lambda = 2 log|wf| + 2 log(1 + |wg|^2) + const."""
    _check_wf(wf_val)
    dlog = wf_deriv_val / wf_val + 2 * wg_val.conjugate() * wg_deriv_val / (1 + abs(wg_val) ** 2)
    return 2 * abs(dlog)


@dataclass(frozen=True)
class ChartDomain:
    """An open chart domain in the complex plane.

    Attributes
    ----------
    kind : str
        One of "whole", "disk" (|z| < radius), "annulus" (r_in < |z| < r_out), "rectangle"
        (u_min < Re z < u_max, v_min < Im z < v_max) or "sector" (annulus intersected with
        arg_min < arg z < arg_max, principal branch).
    boundary : bool
        Whether the domain edge is a boundary of the surface (a surface-with-boundary) rather than a
        truncation of a complete surface.
    """

    kind: str = "whole"
    radius: float = 1.0
    r_in: float = 0.0
    r_out: float = 1.0
    u_min: float = -1.0
    u_max: float = 1.0
    v_min: float = -1.0
    v_max: float = 1.0
    arg_min: float = -math.pi
    arg_max: float = math.pi
    boundary: bool = False

    def __post_init__(self):
        if self.kind not in DOMAIN_KINDS:
            raise BadParams(f"unknown chart domain {self.kind!r}, expected one of {DOMAIN_KINDS}")
        if self.kind == "disk" and not self.radius > 0:
            raise BadParams(f"disk radius must be positive, got {self.radius}")
        if self.kind in ("annulus", "sector") and not 0 <= self.r_in < self.r_out:
            raise BadParams(f"annulus radii must satisfy 0 <= r_in < r_out, got ({self.r_in}, {self.r_out})")
        if self.kind == "rectangle" and not (self.u_min < self.u_max and self.v_min < self.v_max):
            raise BadParams("rectangle bounds must be ordered")
        if self.kind == "sector" and not -math.pi <= self.arg_min < self.arg_max <= math.pi:
            raise BadParams("sector angles must satisfy -pi <= arg_min < arg_max <= pi")

    def contains(self, z: complex) -> bool:
        if self.kind == "whole":
            return cmath.isfinite(z)
        if self.kind == "disk":
            return abs(z) < self.radius
        if self.kind == "annulus":
            return self.r_in < abs(z) < self.r_out
        if self.kind == "rectangle":
            return self.u_min < z.real < self.u_max and self.v_min < z.imag < self.v_max
        return self.r_in < abs(z) < self.r_out and self.arg_min < cmath.phase(z) < self.arg_max

    def center(self) -> complex:
        if self.kind in ("whole", "disk"):
            return 0j
        if self.kind == "rectangle":
            return complex((self.u_min + self.u_max) / 2, (self.v_min + self.v_max) / 2)
        rho = math.sqrt(max(self.r_in, 1e-12) * self.r_out)
        if self.kind == "annulus":
            return complex(rho, 0.0)
        return cmath.rect(rho, (self.arg_min + self.arg_max) / 2)

    def sample(self, rng: np.random.Generator, n: int, margin: float = 0.05) -> np.ndarray:
        """Draws `n` interior points, kept a relative `margin` away from the edge."""
        if self.kind in ("whole", "disk"):
            radius = 2.0 if self.kind == "whole" else self.radius * (1 - margin)
            return radius * np.sqrt(rng.uniform(size=n)) * np.exp(2j * np.pi * rng.uniform(size=n))
        if self.kind == "rectangle":
            du, dv = margin * (self.u_max - self.u_min), margin * (self.v_max - self.v_min)
            u = rng.uniform(self.u_min + du, self.u_max - du, size=n)
            v = rng.uniform(self.v_min + dv, self.v_max - dv, size=n)
            return u + 1j * v
        # log-uniform radii so that thin inner rings are sampled as often as the outer region
        lo, hi = math.log(max(self.r_in, 1e-12)), math.log(self.r_out)
        span = hi - lo
        rho = np.exp(rng.uniform(lo + margin * span, hi - margin * span, size=n))
        a_lo, a_hi = (-math.pi, math.pi) if self.kind == "annulus" else (self.arg_min, self.arg_max)
        da = margin * (a_hi - a_lo) if self.kind == "sector" else 0.0
        return rho * np.exp(1j * rng.uniform(a_lo + da, a_hi - da, size=n))


@dataclass(frozen=True)
class WeierstrassPair:
    """Weierstrass data on a chart domain.

    Attributes
    ----------
    wf : Callable[[complex], complex]
        Holomorphic and nonvanishing on the domain interior
    wg : Callable[[complex], complex]
        The stereographic Gauss map, meromorphic but pole-free on the domain
    wg_deriv : Callable[[complex], complex]
        Complex derivative of wg
    domain : ChartDomain
        Where the pair is evaluated
    wf_deriv : Optional[Callable[[complex], complex]]
        Complex derivative of wf, used by the conformal-factor step guard; estimated by a central
        difference when omitted
    """

    wf: Callable[[complex], complex]
    wg: Callable[[complex], complex]
    wg_deriv: Callable[[complex], complex]
    domain: ChartDomain
    wf_deriv: Optional[Callable[[complex], complex]] = None

    def wf_prime(self, z: complex) -> complex:
        if self.wf_deriv is not None:
            return complex(self.wf_deriv(z))
        h = 1e-6 * max(1.0, abs(z))
        return complex((self.wf(z + h) - self.wf(z - h)) / (2 * h))
