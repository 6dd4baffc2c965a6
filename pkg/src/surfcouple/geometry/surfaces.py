import cmath
import math
from dataclasses import dataclass
from typing import Any, Callable, Mapping, Optional, Union

import numpy as np
from scipy.spatial.transform import Rotation

from surfcouple.geometry.config import SurfaceConfig, SurfaceKind
from surfcouple.geometry.weierstrass import (
    ChartDomain,
    WeierstrassPair,
    conformal_factor,
    curvature,
    gauss_normal,
    immersion_differential,
    log_lambda_gradient,
    weierstrass_phi,
)
from surfcouple.utils.errors import BadParams, DegenerateMetric, DomainExit


@dataclass(frozen=True)
class SurfaceState:
    """Everything the simulation needs to know about one chart point.

    `lam` is the conformal factor (|X_u|^2 = |X_v|^2 = lam) and `K` the Gauss curvature. The raw
    Weierstrass values at z are kept so that shape computations do not re-evaluate the pair.
    """

    z: complex
    X: np.ndarray
    m: np.ndarray
    lam: float
    K: float
    frame_u: np.ndarray
    frame_v: np.ndarray
    wf: complex
    wg: complex
    wg_deriv: complex


@dataclass(frozen=True)
class SurfaceModel:
    """An immutable minimal surface: Weierstrass data, an anchor for the immersion and a rigid motion.

    Attributes
    ----------
    kind : SurfaceKind
        Catalog entry this model was built from
    pair : WeierstrassPair
        The Weierstrass data and chart domain
    basepoint : complex
        Chart point whose position is `base_X`
    base_X : np.ndarray
        Position of `basepoint` in R^3 (after the rigid motion)
    rotation : Optional[np.ndarray]
        3x3 rotation applied to the chart immersion, None for the identity
    offset : Optional[np.ndarray]
        Translation applied after the rotation, None for zero
    primitive : Optional[Callable[[complex], np.ndarray]]
        Closed-form holomorphic primitive F of Phi (X = Re F before the rigid motion); None when the
        immersion has to be integrated along chart paths
    """

    kind: SurfaceKind
    pair: WeierstrassPair
    basepoint: complex
    base_X: np.ndarray
    rotation: Optional[np.ndarray] = None
    offset: Optional[np.ndarray] = None
    primitive: Optional[Callable[[complex], np.ndarray]] = None

    @property
    def domain(self) -> ChartDomain:
        return self.pair.domain

    @property
    def is_flat(self) -> bool:
        return self.kind == SurfaceKind.Plane

    def rotate(self, v: np.ndarray) -> np.ndarray:
        return v if self.rotation is None else self.rotation @ v

    def place(self, x: np.ndarray) -> np.ndarray:
        x = self.rotate(x)
        return x if self.offset is None else x + self.offset

    def closed_form(self, z: complex) -> Optional[np.ndarray]:
        if self.primitive is None:
            return None
        return self.place(np.asarray(self.primitive(z)).real.copy())

    def phi(self, z: complex) -> np.ndarray:
        return weierstrass_phi(complex(self.pair.wf(z)), complex(self.pair.wg(z)))


# Catalog Weierstrass data. Module-level functions keep models picklable for worker processes.
def _two(z):
    return 2.0 + 0j


def _zero(z):
    return 0j


def _one(z):
    return 1.0 + 0j


def _identity(z):
    return complex(z)


def _catenoid_wf(z):
    return 2 / z**2


def _catenoid_wf_deriv(z):
    return -4 / z**3


def _helicoid_wf(z):
    return 2j / z**2


def _helicoid_wf_deriv(z):
    return -4j / z**3


def _plane_primitive(z):
    return np.array([z, 1j * z, 0j], dtype=complex)


def _enneper_primitive(z):
    return np.array([z - z**3 / 3, 1j * (z + z**3 / 3), z**2], dtype=complex)


def _catenoid_primitive(z):
    return np.array([-1 / z - z, 1j * (z - 1 / z), 2 * cmath.log(z)], dtype=complex)


def _helicoid_primitive(z):
    # Single valued only on a chart that does not cross the branch cut of log
    return 1j * _catenoid_primitive(z)


_DEFAULT_DOMAINS = {
    SurfaceKind.Plane: dict(kind="whole"),
    SurfaceKind.Enneper: dict(kind="whole"),
    SurfaceKind.Catenoid: dict(kind="annulus", r_in=0.05, r_out=20.0),
    SurfaceKind.Helicoid: dict(
        kind="sector", r_in=0.05, r_out=20.0, arg_min=-0.9 * math.pi, arg_max=0.9 * math.pi
    ),
    SurfaceKind.GenericWeierstrass: dict(kind="disk", radius=1.0),
}

_DOMAIN_KEYS = ("radius", "r_in", "r_out", "u_min", "u_max", "v_min", "v_max", "arg_min", "arg_max", "boundary")
_MOTION_KEYS = ("rotvec", "offset")
_GENERIC_KEYS = ("wf", "wg", "wg_deriv", "wf_deriv", "basepoint_X")
_ALLOWED_KEYS = set(("domain", "basepoint") + _DOMAIN_KEYS + _MOTION_KEYS + _GENERIC_KEYS)


def as_complex(value: Any) -> complex:
    """Chart points arrive either as complex numbers or as [re, im] pairs (the config-file form)."""
    if isinstance(value, (int, float, complex, np.number)):
        return complex(value)
    re, im = value
    return complex(float(re), float(im))


def _build_domain(kind: SurfaceKind, params: Mapping[str, Any]) -> ChartDomain:
    spec = dict(_DEFAULT_DOMAINS[kind])
    if params.get("domain"):
        if params["domain"] != spec["kind"]:
            spec = dict(kind=params["domain"])
    for key in _DOMAIN_KEYS:
        if params.get(key) is not None:
            spec[key] = params[key]
    domain = ChartDomain(**spec)
    pole_inside = domain.kind in ("whole", "disk") or domain.contains(0j)
    if kind in (SurfaceKind.Catenoid, SurfaceKind.Helicoid) and pole_inside:
        raise BadParams(f"{kind.name} data has a pole at z = 0, which the chart domain must exclude")
    return domain


def _rigid_motion(params: Mapping[str, Any]):
    rotvec = np.zeros(3) if params.get("rotvec") is None else np.asarray(params["rotvec"], dtype=float)
    offset = np.zeros(3) if params.get("offset") is None else np.asarray(params["offset"], dtype=float)
    if rotvec.shape != (3,) or offset.shape != (3,):
        raise BadParams("rotvec and offset must be 3-vectors")
    rotation = Rotation.from_rotvec(rotvec).as_matrix() if np.any(rotvec) else None
    return rotation, (offset if np.any(offset) else None)


def make_surface(
    kind: Union[str, SurfaceKind], params: Optional[Mapping[str, Any]] = None, n_check: int = 16
) -> SurfaceModel:
    """Builds a catalog (or generic) surface and checks its invariants at `n_check` interior points.

    Parameters
    ----------
    kind: Union[str, SurfaceKind]
        Catalog name: Plane, Enneper, Catenoid, Helicoid or GenericWeierstrass
    params: Optional[Mapping[str, Any]]
        Chart domain overrides (`domain`, `radius`, `r_in`, `r_out`, rectangle and sector bounds,
        `boundary`), a rigid motion (`rotvec`, `offset`), the `basepoint` and, for GenericWeierstrass,
        the callables `wf`, `wg`, `wg_deriv` (and optionally `wf_deriv`) plus `basepoint_X`.
    n_check: int
        Number of sample points for `validate_model`

    Returns
    -------
    model: SurfaceModel
    """
    params = dict(params or {})
    try:
        kind = SurfaceKind[kind] if isinstance(kind, str) else SurfaceKind(kind)
    except KeyError:
        raise BadParams(f"unknown surface kind {kind!r}, expected one of {[k.name for k in SurfaceKind]}")
    unknown = set(params) - _ALLOWED_KEYS
    if unknown:
        raise BadParams(f"unknown surface parameters {sorted(unknown)}")

    domain = _build_domain(kind, params)
    rotation, offset = _rigid_motion(params)

    if kind == SurfaceKind.GenericWeierstrass:
        if not all(callable(params.get(k)) for k in ("wf", "wg", "wg_deriv")):
            raise BadParams("GenericWeierstrass needs callables wf, wg and wg_deriv")
        pair = WeierstrassPair(params["wf"], params["wg"], params["wg_deriv"], domain, params.get("wf_deriv"))
        primitive = None
    else:
        wf, wf_deriv, wg, wg_deriv, primitive = {
            SurfaceKind.Plane: (_two, _zero, _zero, _zero, _plane_primitive),
            SurfaceKind.Enneper: (_two, _zero, _identity, _one, _enneper_primitive),
            SurfaceKind.Catenoid: (_catenoid_wf, _catenoid_wf_deriv, _identity, _one, _catenoid_primitive),
            SurfaceKind.Helicoid: (_helicoid_wf, _helicoid_wf_deriv, _identity, _one, _helicoid_primitive),
        }[kind]
        if kind == SurfaceKind.Helicoid and domain.kind != "sector":
            # x3 = -2 arg z is multivalued around the origin; integrate on the universal cover instead
            primitive = None
        pair = WeierstrassPair(wf, wg, wg_deriv, domain, wf_deriv)

    basepoint = as_complex(params["basepoint"]) if params.get("basepoint") is not None else domain.center()
    if not domain.contains(basepoint):
        raise BadParams(f"basepoint {basepoint} lies outside the chart domain")
    model = SurfaceModel(kind, pair, basepoint, np.zeros(3), rotation, offset, primitive)
    if primitive is not None:
        base_X = model.closed_form(basepoint)
    else:
        base_X = np.zeros(3) if params.get("basepoint_X") is None else np.asarray(params["basepoint_X"], dtype=float)
        # Catalog surfaces without a usable primitive are anchored where the sector primitive would put them
        if kind == SurfaceKind.Helicoid:
            base_X = model.place(_helicoid_primitive(basepoint).real.copy())
        else:
            base_X = model.place(base_X)
    model = SurfaceModel(kind, pair, basepoint, base_X, rotation, offset, primitive)
    validate_model(model, n_check=n_check)
    return model


def surface_from_config(cfg: SurfaceConfig, n_check: int = 16) -> SurfaceModel:
    """make_surface for a (possibly OmegaConf-wrapped) SurfaceConfig; None fields keep catalog defaults."""
    params = {}
    for key in ("domain",) + _DOMAIN_KEYS:
        value = getattr(cfg, key)
        if value is not None:
            params[key] = value
    params["rotvec"] = [float(v) for v in cfg.rotvec]
    params["offset"] = [float(v) for v in cfg.offset]
    return make_surface(cfg.kind, params, n_check=n_check)


def evaluate_state(model: SurfaceModel, z: complex, X: Optional[np.ndarray] = None) -> SurfaceState:
    """Full state at chart point `z`. `X` is computed (closed form or path integral) when not given."""
    z = complex(z)
    if not model.domain.contains(z):
        raise DomainExit(f"chart point {z} lies outside the {model.domain.kind} domain", model.domain.boundary)
    pair = model.pair
    wf, wg, wg_deriv = complex(pair.wf(z)), complex(pair.wg(z)), complex(pair.wg_deriv(z))
    lam = conformal_factor(wf, wg)
    K = curvature(wf, wg, wg_deriv)
    frame_u, frame_v = immersion_differential(wf, wg)
    if X is None:
        X = model.closed_form(z)
        if X is None:
            X = integrate_immersion(model, model.basepoint, model.base_X, z)
    return SurfaceState(
        z=z,
        X=X,
        m=model.rotate(gauss_normal(wg)),
        lam=lam,
        K=K,
        frame_u=model.rotate(frame_u),
        frame_v=model.rotate(frame_v),
        wf=wf,
        wg=wg,
        wg_deriv=wg_deriv,
    )


def _chart_path(domain: ChartDomain, z_from: complex, z_to: complex, n_sub: int) -> np.ndarray:
    """A polyline from z_from to z_to; around the origin it follows an arc then a ray so it stays in the annulus."""
    t = np.linspace(0.0, 1.0, n_sub + 1)
    if domain.kind not in ("annulus", "sector"):
        return z_from + t * (z_to - z_from)
    r0, a0 = abs(z_from), cmath.phase(z_from)
    da = cmath.phase(z_to / z_from)
    arc = r0 * np.exp(1j * (a0 + t * da))
    ray = np.exp(1j * (a0 + da)) * (r0 + t * (abs(z_to) - r0))
    return np.concatenate([arc, ray[1:]])


def integrate_immersion(model: SurfaceModel, z_from: complex, X_from: np.ndarray, z_to: complex, n_sub: int = 256):
    """Midpoint-rule integral of Re(Phi dz) along a chart path, starting from the known position X_from."""
    path = _chart_path(model.domain, complex(z_from), complex(z_to), n_sub)
    X = np.array(X_from, dtype=float)
    for a, b in zip(path[:-1], path[1:]):
        X = X + model.rotate((model.phi((a + b) / 2) * (b - a)).real)
    return X


def advance_state(model: SurfaceModel, state: SurfaceState, dz: complex, incremental: bool = False) -> SurfaceState:
    """Moves the chart point by `dz`.

    X is re-evaluated exactly for surfaces with a closed-form primitive; otherwise (or when `incremental`
    is set, which is how the two are cross-checked) it is advanced with the midpoint rule
    X' = X + Re(Phi(z + dz/2) dz).
    """
    if dz == 0:
        return state
    z1 = state.z + dz
    if not model.domain.contains(z1):
        raise DomainExit(f"step to {z1} leaves the {model.domain.kind} domain", model.domain.boundary)
    X = None
    if incremental or model.primitive is None:
        X = state.X + model.rotate((model.phi(state.z + dz / 2) * dz).real)
    return evaluate_state(model, z1, X)


def chart_increment(state: SurfaceState, v: np.ndarray) -> complex:
    """Chart displacement dz whose image under the immersion differential is the tangent vector v."""
    return complex(np.dot(v, state.frame_u), np.dot(v, state.frame_v)) / state.lam


def lambda_gradient(model: SurfaceModel, state: SurfaceState) -> float:
    """|grad lambda| / lambda at the state's chart point."""
    return log_lambda_gradient(state.wf, state.wg, state.wg_deriv, model.pair.wf_prime(state.z))


def lambda_gradient_at(model: SurfaceModel, z: complex) -> float:
    pair = model.pair
    return log_lambda_gradient(complex(pair.wf(z)), complex(pair.wg(z)), complex(pair.wg_deriv(z)), pair.wf_prime(z))


def validate_model(model: SurfaceModel, n_check: int = 16, seed: int = 0):
    """Checks the SurfaceState invariants at `n_check` interior points, raising BadParams on failure."""
    rng = np.random.default_rng(seed)
    for z in model.domain.sample(rng, n_check):
        try:
            s = evaluate_state(model, z, X=model.base_X)
        except DegenerateMetric as e:
            raise BadParams(f"{model.kind.name}: degenerate metric at sample point {z}") from e
        scale = math.sqrt(s.lam)
        problems = []
        if not (np.isfinite(s.lam) and s.lam > 0):
            problems.append(f"conformal factor {s.lam}")
        if abs(np.linalg.norm(s.m) - 1) > 1e-10:
            problems.append("normal is not a unit vector")
        if max(abs(np.dot(s.m, s.frame_u)), abs(np.dot(s.m, s.frame_v))) > 1e-10 * max(1.0, scale):
            problems.append("normal is not orthogonal to the frame")
        if max(abs(np.dot(s.frame_u, s.frame_u) - s.lam), abs(np.dot(s.frame_v, s.frame_v) - s.lam)) > 1e-9 * s.lam:
            problems.append("frame is not conformal")
        if abs(np.dot(s.frame_u, s.frame_v)) > 1e-9 * s.lam:
            problems.append("frame is not orthogonal")
        if s.K > 0:
            problems.append(f"positive curvature {s.K}")
        cross = np.cross(s.frame_u, s.frame_v)
        if np.linalg.norm(cross / np.linalg.norm(cross) - s.m) > 1e-8:
            problems.append("Gauss map disagrees with the frame orientation")
        if problems:
            raise BadParams(f"{model.kind.name} fails its invariants at z = {z}: " + "; ".join(problems))
