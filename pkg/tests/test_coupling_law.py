import itertools
import math

import numpy as np
import pytest

from surfcouple.coupling.config import CouplingConfig
from surfcouple.coupling.coupling_law import (
    CouplingChoice,
    adequacy_cap,
    coupling_choice,
    dispersion,
    eps_hat,
    gamma_form,
    gap_max,
    gap_max_values,
    optimal_sigma,
    rate_pair,
)
from surfcouple.coupling.procrustes import procrustes_optimal
from surfcouple.geometry.configuration import Region, compute_configuration
from surfcouple.geometry.surfaces import evaluate_state, make_surface
from surfcouple.utils.errors import BadParams

GRID = np.linspace(0, math.pi / 2, 13)
PSI_GRID = np.linspace(0, math.pi, 13)
SIGMAS = np.linspace(0, 2 * math.pi, 4096, endpoint=False)


def brute_gap(theta, phi, psi):
    best = -np.inf
    for A in (1, -1):
        for s in SIGMAS:
            f, g = rate_pair(theta, phi, psi, s, A)
            best = max(best, f - g)
    return best


def test_reference_points():
    # mirror coupling of two parallel particles on a plane
    f, g = rate_pair(math.pi / 2, math.pi / 2, 0.0, optimal_sigma(math.pi / 2, math.pi / 2, 0.0, -1), -1)
    assert abs(f - 4) < 1e-12 and abs(g) < 1e-12

    t = math.pi / 4
    f, g = rate_pair(t, t, 0.0, optimal_sigma(t, t, 0.0, -1), -1)
    assert abs(f - 2) < 1e-12 and abs(g - 2) < 1e-12

    for t in (0.1, 0.5, 0.7):
        best = gap_max(t, t, 0.0)
        assert best.A_star == 1
        f, g = rate_pair(t, t, 0.0, best.sigma_star, best.A_star)
        assert abs(f) < 1e-12 and abs(g) < 1e-12


def test_optimal_sigma_degenerate():
    # both particles see the other along the normal: f - g does not depend on sigma
    assert optimal_sigma(0.0, 0.0, math.pi / 2, -1) == 0.0


def test_gap_is_nonnegative():
    for theta, phi, psi in itertools.product(GRID, GRID, PSI_GRID):
        assert gap_max(theta, phi, psi).value >= -1e-12


def test_vectorised_gap_matches_scalar():
    T, P, Q = np.meshgrid(GRID, GRID, PSI_GRID, indexing="ij")
    values = gap_max_values(T, P, Q)
    for idx in itertools.product(range(len(GRID)), range(len(GRID)), range(len(PSI_GRID))):
        assert abs(values[idx] - gap_max(T[idx], P[idx], Q[idx]).value) < 1e-12


def test_gap_on_fine_grid():
    n = 200
    angles = np.linspace(0, math.pi / 2, n)
    psis = np.linspace(0, math.pi, n)
    step, psi_step = angles[1], psis[1]
    T, P = np.meshgrid(angles, angles, indexing="ij")
    # theta or phi = 0 is degenerate (psi is set to 0 there), and near that corner the gap is only O(theta^2 psi^2)
    interior = (T >= 0.2) & (P >= 0.2)
    for k, psi in enumerate(psis):
        values = gap_max_values(T, P, psi)
        assert values.min() >= -1e-12
        assert np.abs(values - gap_max_values(P, T, psi)).max() < 1e-10
        zero = values <= 1e-6
        if k == 0:
            diagonal = np.eye(n, dtype=bool) & (T <= math.pi / 4)
            anti_diagonal = np.fliplr(np.eye(n, dtype=bool))
            assert zero[diagonal].all() and zero[anti_diagonal].all()
        if k <= 3:
            near = (np.abs(T - P) <= 3 * step) & (T + P <= math.pi / 2 + 3 * step)
            near |= np.abs(T + P - math.pi / 2) <= 3 * step
            assert not (zero & interior & ~near).any()
        else:
            assert not (zero & interior).any(), psi / psi_step


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_closed_form_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    for _ in range(10):
        theta, phi = rng.uniform(0, math.pi / 2, size=2)
        psi = rng.uniform(0, math.pi)
        best = gap_max(theta, phi, psi)
        assert abs(best.value - brute_gap(theta, phi, psi)) < 1e-5
        f, g = rate_pair(theta, phi, psi, best.sigma_star, best.A_star)
        assert abs((f - g) - best.value) < 1e-9


def test_gap_vanishes_on_sigma_e():
    for theta in np.linspace(0.05, math.pi / 2 - 0.05, 20):
        assert abs(gap_max(theta, math.pi / 2 - theta, 0.0).value) < 1e-12


def test_branch_follows_sign_of_h():
    assert gap_max(0.2, 0.3, 0.0).A_star == 1
    assert gap_max(1.4, 1.3, 0.2).A_star == -1
    # h = 0 exactly at theta = phi = pi/4, psi = 0: the tie goes to A = -1
    assert gap_max(math.pi / 4, math.pi / 4, 0.0, tie_tol=1e-9).A_star == -1


def test_choice_validation():
    with pytest.raises(BadParams):
        CouplingChoice(0, 0.0)
    with pytest.raises(BadParams):
        CouplingChoice(1, 0.0, 0.5)


def test_dispersion_factorizes():
    for A, sigma, eps in [(1, 0.3, 0.0), (-1, 2.0, 0.2), (1, 5.5, 0.45)]:
        d = dispersion(CouplingChoice(A, sigma, eps))
        assert np.allclose(d.B @ d.B.T, d.a)
        assert np.allclose(d.O @ d.O.T, np.eye(2))
        assert abs(np.linalg.det(d.O) - A) < 1e-12


def catalog_configurations(n, seed):
    M = make_surface("Catenoid")
    N = make_surface("Enneper", {"rotvec": [0.5, 0.0, 1.0], "offset": [0.2, -0.3, 1.5]})
    rng = np.random.default_rng(seed)
    return [
        compute_configuration(evaluate_state(M, zx), evaluate_state(N, zy))
        for zx, zy in zip(M.domain.sample(rng, n), N.domain.sample(rng, n))
    ]


def test_procrustes_agrees_with_closed_form():
    for config in catalog_configurations(200, 4):
        value, choice = procrustes_optimal(config)
        assert abs(value - gap_max(*config.angles).value) < 1e-8
        f, g = rate_pair(*config.angles, choice.sigma, choice.A)
        assert abs((f - g) - value) < 1e-8


def test_gamma_form_gives_distance_rate():
    for config in catalog_configurations(50, 5):
        choice = coupling_choice(config)
        e3 = config.axes.e3
        unperturbed = CouplingChoice(choice.A, choice.sigma)
        qv_rate = rate_pair(*config.angles, choice.sigma, choice.A).qv_rate
        assert abs(gamma_form(unperturbed, config, np.stack([e3, -e3])) - qv_rate) < 1e-9


def test_perturbation_keeps_drift_dominated():
    cfg = CouplingConfig()
    for config in catalog_configurations(300, 6):
        choice = coupling_choice(config, cfg)
        assert 0 <= choice.eps_hat <= cfg.eps_max
        f, g = rate_pair(*config.angles, choice.sigma, choice.A, choice.eps_hat)
        assert g <= f + 1e-12


def test_perturbation_support():
    cfg = CouplingConfig()
    M = make_surface("Plane")
    mirror = compute_configuration(evaluate_state(M, 0j), evaluate_state(M, 1 + 0j))
    assert eps_hat(mirror, cfg) == 0.0

    wall = make_surface("Plane", {"rotvec": [0.0, math.pi / 2, 0.0], "offset": [0.0, 0.0, -2.0]})
    on_sigma_e = compute_configuration(evaluate_state(M, 0j), evaluate_state(wall, 0j))
    assert on_sigma_e.region == Region.SigmaE
    assert eps_hat(on_sigma_e, cfg) == 0.0


def test_adequacy_cap():
    assert adequacy_cap(0.3, 0.4, 0.0) == 0.0
    theta, phi, gap = 0.3, 0.4, 0.5
    eps = adequacy_cap(theta, phi, gap)
    C = math.cos(theta) ** 2 + math.cos(phi) ** 2
    c = math.sqrt(1 - eps * eps)
    assert 0 < eps < 1
    assert c * (gap + 2 * C) - 2 * C > 0


def perpendicular_planes():
    """Two points whose separation lies in both tangent planes, with the planes at right angles."""
    M = make_surface("Plane")
    N = make_surface("Plane", {"rotvec": [math.pi / 2, 0.0, 0.0], "offset": [1.0, 0.0, 0.0]})
    return compute_configuration(evaluate_state(M, 0j), evaluate_state(N, 0j))


def test_eps_hat_on_sigma0():
    config = perpendicular_planes()
    assert np.allclose(config.angles, (math.pi / 2, math.pi / 2, math.pi / 2))
    assert config.region == Region.Sigma0
    assert abs(gap_max(*config.angles).value - 2) < 1e-12
    assert abs(eps_hat(config, CouplingConfig()) - 0.25) < 1e-12
    assert coupling_choice(config).A == -1


def test_marginals_are_brownian():
    for A, sigma, eps in [(1, 0.0, 0.0), (-1, 1.1, 0.1), (1, 4.0, 0.25), (-1, 6.0, 0.49)]:
        a = dispersion(CouplingChoice(A, sigma, eps)).a
        assert np.allclose(a[:2, :2], np.eye(2), atol=1e-12)
        assert np.allclose(a[2:, 2:], np.eye(2), atol=1e-12)
    assert np.linalg.matrix_rank(dispersion(CouplingChoice(-1, 0.7)).a) == 2


def test_gamma_form_gives_drift_numerator():
    for config in catalog_configurations(50, 7) + [perpendicular_planes()]:
        choice = coupling_choice(config)
        unperturbed = CouplingChoice(choice.A, choice.sigma)
        e1, e2 = config.axes.e1, config.axes.e2
        total = sum(gamma_form(unperturbed, config, np.stack([e, -e])) for e in (e1, e2))
        drift_num = rate_pair(*config.angles, choice.sigma, choice.A).drift_num
        assert abs(total - drift_num) < 1e-9
