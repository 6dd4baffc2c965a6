import math

import numpy as np
import pytest

from surfcouple.geometry.config import SurfaceConfig, SurfaceKind
from surfcouple.geometry.surfaces import (
    advance_state,
    chart_increment,
    evaluate_state,
    make_surface,
    surface_from_config,
)
from surfcouple.geometry.weierstrass import (
    ChartDomain,
    conformal_factor,
    curvature,
    gauss_normal,
    immersion_differential,
)
from surfcouple.utils.errors import BadParams, DegenerateMetric, DomainExit

CATALOG = ["Plane", "Enneper", "Catenoid", "Helicoid"]


def test_plane_pointwise_values():
    assert np.allclose(gauss_normal(0j), [0, 0, -1])
    X_u, X_v = immersion_differential(2 + 0j, 0j)
    assert np.allclose(X_u, [1, 0, 0])
    assert np.allclose(X_v, [0, -1, 0])
    assert conformal_factor(2 + 0j, 0j) == 1.0
    assert curvature(2 + 0j, 0j, 0j) == 0.0


def test_degenerate_metric():
    with pytest.raises(DegenerateMetric):
        conformal_factor(0j, 1 + 0j)


@pytest.mark.parametrize("kind", CATALOG)
def test_curvature_identity(kind):
    # lambda (-K) = (2 |g'| / (1 + |g|^2))^2, the Gauss map being conformal with factor sqrt(-K)
    model = make_surface(kind)
    rng = np.random.default_rng(0)
    for z in model.domain.sample(rng, 1000):
        s = evaluate_state(model, z)
        expected = (2 * abs(s.wg_deriv) / (1 + abs(s.wg) ** 2)) ** 2
        assert abs(s.lam * -s.K - expected) <= 1e-10 * max(expected, 1e-300)


@pytest.mark.parametrize("kind", CATALOG)
def test_state_invariants(kind):
    model = make_surface(kind)
    rng = np.random.default_rng(1)
    for z in model.domain.sample(rng, 50):
        s = evaluate_state(model, z)
        assert abs(np.linalg.norm(s.m) - 1) < 1e-12
        assert abs(s.frame_u @ s.frame_u - s.lam) < 1e-9 * s.lam
        assert abs(s.frame_u @ s.frame_v) < 1e-9 * s.lam
        assert abs(s.m @ s.frame_u) < 1e-9 * math.sqrt(s.lam)
        assert s.K <= 0


def test_known_positions():
    catenoid = make_surface("Catenoid")
    assert np.allclose(evaluate_state(catenoid, 1 + 0j).X, [-2, 0, 0])
    assert np.allclose(evaluate_state(catenoid, -1 + 0j).X, [2, 0, 0])
    plane = make_surface("Plane")
    assert np.allclose(evaluate_state(plane, 1 + 2j).X, [1, -2, 0])


@pytest.mark.parametrize(
    "kind, z0, steps, size, atol",
    [("Enneper", 0.2 + 0.1j, 200, 1e-3, 1e-7), ("Catenoid", 1 + 0j, 1000, 2e-3, 1e-4)],
)
def test_incremental_matches_closed_form(kind, z0, steps, size, atol):
    model = make_surface(kind)
    s_exact = s_inc = evaluate_state(model, z0)
    rng = np.random.default_rng(2)
    for angle in rng.uniform(0, 2 * math.pi, size=steps):
        dz = size * complex(math.cos(angle), math.sin(angle))
        s_exact = advance_state(model, s_exact, dz)
        s_inc = advance_state(model, s_inc, dz, incremental=True)
    assert np.abs(s_exact.X - s_inc.X).max() <= atol


def test_generic_weierstrass_matches_enneper():
    generic = make_surface(
        "GenericWeierstrass",
        {"wf": lambda z: 2.0 + 0j, "wg": lambda z: z, "wg_deriv": lambda z: 1.0 + 0j, "basepoint_X": [0, 0, 0]},
    )
    enneper = make_surface("Enneper")
    z = 0.5 + 0.3j
    assert np.allclose(evaluate_state(generic, z).X, evaluate_state(enneper, z).X, atol=1e-8)


def test_helicoid_on_annulus_follows_the_universal_cover():
    sector = make_surface("Helicoid")
    annulus = make_surface("Helicoid", {"domain": "annulus", "r_in": 0.05, "r_out": 20.0})
    assert annulus.primitive is None
    z = 1.5 * np.exp(0.5j)
    assert np.allclose(evaluate_state(annulus, z).X, evaluate_state(sector, z).X, atol=1e-4)


def test_rigid_motion():
    plane = make_surface("Plane", {"rotvec": [0, math.pi / 2, 0], "offset": [3, 0, 0]})
    s = evaluate_state(plane, 0.3 - 0.4j)
    assert abs(s.X[0] - 3) < 1e-12
    assert np.allclose(np.abs(s.m), [1, 0, 0])


def test_bad_surfaces():
    with pytest.raises(BadParams):
        make_surface("Catenoid", {"domain": "disk", "radius": 1.0})
    with pytest.raises(BadParams):
        make_surface("Torus")
    with pytest.raises(BadParams):
        make_surface("Plane", {"colour": "red"})
    with pytest.raises(BadParams):
        ChartDomain("annulus", r_in=2.0, r_out=1.0)


def test_domain_exit_carries_boundary_flag():
    model = make_surface("Plane", {"domain": "disk", "radius": 0.5, "boundary": True})
    s = evaluate_state(model, 0.4 + 0j)
    with pytest.raises(DomainExit) as info:
        advance_state(model, s, 0.2 + 0j)
    assert info.value.boundary
    chart_edge = make_surface("Catenoid")
    s = evaluate_state(chart_edge, 19.9 + 0j)
    with pytest.raises(DomainExit) as info:
        advance_state(chart_edge, s, 0.2 + 0j)
    assert not info.value.boundary


def test_chart_increment_inverts_the_differential():
    model = make_surface("Catenoid")
    s = evaluate_state(model, 0.7 + 0.9j)
    v = 0.3 * s.frame_u - 0.8 * s.frame_v
    assert abs(chart_increment(s, v) - (0.3 - 0.8j)) < 1e-12


def test_surface_from_config():
    cfg = SurfaceConfig(kind=SurfaceKind.Catenoid, domain="annulus", r_in=0.5, r_out=2.0, boundary=True)
    model = surface_from_config(cfg)
    assert model.domain.boundary
    assert model.domain.r_in == 0.5
    assert not model.is_flat
