import math

import pandas as pd
import pytest
from omegaconf import OmegaConf

from surfcouple.data.trajectory_iterator import TrajectoryIterator
from surfcouple.geometry.surfaces import make_surface
from surfcouple.sde.engine import StepControl
from surfcouple.tasks.coupled import HalfspaceRunner, LiouvilleRunner, MaxPrincipleRunner, MirrorRunner
from surfcouple.tasks.single_surface import (
    CoordinateQVRunner,
    GaussOccupationRunner,
    GaussTimeChangeRunner,
    SingleSurfaceTask,
    StoCompRunner,
    icosahedron_centers,
)
from surfcouple.utils.errors import BadParams, MissingBoundary


def tiny(log_dir, **kw):
    hps = {
        "log_dir": str(log_dir),
        "num_trajectories": 20,
        "log_tensorboard": False,
        "series_trajectories": 2,
        "control": {"dt_base": 1e-3, "t_max": 0.1},
    }
    hps.update(kw)
    return hps


def test_icosahedron_centers():
    centers = icosahedron_centers()
    assert centers.shape == (12, 3)
    assert abs((centers**2).sum(axis=1) - 1).max() < 1e-12
    dots = centers @ centers.T
    # every vertex has 5 nearest neighbours at the same angle
    nearest = [sorted(row)[-2] for row in dots]
    assert max(nearest) - min(nearest) < 1e-12
    assert all(sum(abs(row - nearest[0]) < 1e-9) == 5 for row in dots)


def test_trajectory_iterator_covers_every_index():
    control = StepControl(dt_base=1e-2, r_couple=1e-3, t_max=0.05)
    task = SingleSurfaceTask(make_surface("Plane"), [0.0, 0.0], control)
    outcomes = list(TrajectoryIterator(task, 7, seed=1, series_trajectories=3))
    assert [i for i, _ in outcomes] == list(range(7))
    assert [o.series is not None for _, o in outcomes] == [True] * 3 + [False] * 4
    assert all(o.stop == "TimedOut" for _, o in outcomes)


def test_sto_comp_on_plane(tmp_path):
    report = StoCompRunner(tiny(tmp_path, num_trajectories=50)).run()
    assert report.passed
    for name in ("series.csv", "summary.yaml", "hps.yaml", "run.log"):
        assert (tmp_path / name).exists()
    summary = OmegaConf.load(tmp_path / "summary.yaml")
    assert summary["pass"]
    assert summary.scenario.name == "sto-comp"
    assert summary.stop_counts.TimedOut == 50
    series = pd.read_csv(tmp_path / "series.csv")
    assert series.columns[0] == "traj"
    assert set(series["traj"]) == {0, 1}


def test_runs_do_not_depend_on_workers(tmp_path):
    StoCompRunner(tiny(tmp_path / "a", num_workers=0)).run()
    StoCompRunner(tiny(tmp_path / "b", num_workers=2)).run()
    for name in ("series.csv", "summary.yaml"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_seed_changes_the_run(tmp_path):
    StoCompRunner(tiny(tmp_path / "a", seed=1)).run()
    StoCompRunner(tiny(tmp_path / "b", seed=2)).run()
    assert (tmp_path / "a" / "series.csv").read_bytes() != (tmp_path / "b" / "series.csv").read_bytes()


def test_single_trajectory_cannot_pass(tmp_path):
    report = StoCompRunner(tiny(tmp_path, num_trajectories=1)).run()
    assert math.isinf(report.statistics[0].tolerance)
    assert not report.passed


def test_bad_trajectory_count(tmp_path):
    with pytest.raises(BadParams):
        StoCompRunner(tiny(tmp_path, num_trajectories=0))


def test_existing_run_is_protected(tmp_path):
    StoCompRunner(tiny(tmp_path)).run()
    with pytest.raises(BadParams):
        StoCompRunner(tiny(tmp_path, overwrite_existing_exp=False))


def test_tensorboard_output(tmp_path):
    StoCompRunner(tiny(tmp_path, log_tensorboard=True)).run()
    assert any((tmp_path / "tb").iterdir())


def test_coordinate_qv(tmp_path):
    report = CoordinateQVRunner(tiny(tmp_path)).run()
    names = [s.name for s in report.statistics]
    assert names == [f"qv_rel_error_{p}" for p in ("11", "22", "33", "12", "13", "23")]
    assert all(math.isfinite(s.estimate) for s in report.statistics)
    assert report.extra["max_rel_error"] == max(abs(s.estimate) for s in report.statistics)


def test_coordinate_qv_rejects_bad_pairs(tmp_path):
    with pytest.raises(BadParams):
        CoordinateQVRunner(tiny(tmp_path, task={"coordinate_qv": {"pairs": [[3, 1]]}}))


def test_gauss_occupation_on_plane(tmp_path):
    hps = tiny(tmp_path, num_trajectories=5, surface_m={"kind": "Plane"}, starts={"x0": [0.0, 0.0]})
    report = GaussOccupationRunner(hps).run()
    stats = {s.name: s for s in report.statistics}
    assert stats["cap_concentration"].passed
    assert stats["cap_occupation_decreases"].estimate == 0
    # the normal of the plane is the south pole, the last center
    assert report.extra["reachable_caps"] == [11]
    assert report.passed


def test_gauss_timechange_on_plane(tmp_path):
    hps = tiny(tmp_path, num_trajectories=5, surface_m={"kind": "Plane"}, starts={"x0": [0.0, 0.0]})
    report = GaussTimeChangeRunner(hps).run()
    assert report.statistics[0].estimate == 0.0
    assert report.passed


@pytest.mark.parametrize("kind, x0", [("Catenoid", [1.0, 0.0]), ("Enneper", [0.2, 0.1])])
def test_gauss_timechange_on_curved_surfaces(tmp_path, kind, x0):
    hps = tiny(
        tmp_path,
        surface_m={"kind": kind},
        starts={"x0": x0},
        control={"dt_base": 1e-4, "t_max": 0.2},
        task={"gauss_timechange": {"rel_tol": 0.05}},
    )
    report = GaussTimeChangeRunner(hps).run()
    stat = report.statistics[0]
    assert stat.tolerance == 0.05
    assert abs(stat.estimate) <= 0.05
    assert report.passed


def parallel_planes(log_dir, disk=None, **kw):
    surface_m = {"kind": "Plane", "domain": "whole", "boundary": False}
    surface_n = dict(surface_m, rotvec=[0.0, 0.0, 0.0], offset=[0.0, 0.0, 1.0])
    if disk is not None:
        surface_m.update(domain="disk", radius=disk, boundary=True)
        surface_n.update(domain="disk", radius=disk, boundary=True)
    return tiny(log_dir, surface_m=surface_m, surface_n=surface_n, starts={"x0": [0.0, 0.0], "y0": [0.0, 0.0]}, **kw)


def test_halfspace_flat_control_stays_constant(tmp_path):
    hps = parallel_planes(tmp_path, task={"halfspace": {"expect": "constant"}})
    report = HalfspaceRunner(hps).run()
    stats = {s.name: s for s in report.statistics}
    assert stats["inf_r_deviation"].passed
    assert stats["coupled_fraction"].estimate == 0.0
    assert report.passed
    assert report.ledger["violations"] == 0


def test_halfspace_checks_its_setup(tmp_path):
    with pytest.raises(BadParams):
        HalfspaceRunner(parallel_planes(tmp_path))
    with pytest.raises(BadParams):
        HalfspaceRunner(parallel_planes(tmp_path, task={"halfspace": {"expect": "grow"}}))


def test_halfspace_default_reports_quantiles(tmp_path):
    report = HalfspaceRunner(tiny(tmp_path, num_trajectories=10)).run()
    assert [s.name for s in report.statistics] == ["inf_r_quantile_drop"]
    quantiles = report.extra["inf_r_quantiles"]
    assert all(a >= b for a, b in zip(quantiles, quantiles[1:]))
    assert quantiles[0] <= report.extra["r0"]


def test_mirror_coupling_statistics(tmp_path):
    hps = tiny(tmp_path, num_trajectories=50, control={"dt_base": 1e-3, "t_max": 0.5, "r_couple": 1e-2})
    report = MirrorRunner(hps).run()
    assert [s.name for s in report.statistics] == ["coupling_prob", "max_cdf_gap"]
    cdf = report.extra["cdf"]
    assert all(a <= b for a, b in zip(cdf, cdf[1:]))
    assert report.extra["oracle"][-1] == pytest.approx(2 * 0.2397500610934768, rel=1e-9)
    assert report.passed


def test_mirror_coupling_at_fine_step(tmp_path):
    hps = tiny(
        tmp_path,
        num_trajectories=100,
        num_workers=2,
        control={"dt_base": 1e-4, "t_max": 0.25, "r_couple": 1e-2},
    )
    report = MirrorRunner(hps).run()
    stats = {s.name: s for s in report.statistics}
    assert stats["coupling_prob"].passed
    assert stats["max_cdf_gap"].passed
    assert report.passed


def test_coarse_hitting_step_warns(tmp_path):
    coarse = {"dt_base": 1e-3, "t_max": 0.1, "bridge_check": False}
    assert MirrorRunner(tiny(tmp_path / "a", control=coarse)).config_warnings()
    assert LiouvilleRunner(tiny(tmp_path / "b", control=coarse)).config_warnings()
    assert not MirrorRunner(tiny(tmp_path / "c")).config_warnings()
    assert not MirrorRunner(tiny(tmp_path / "d", control=dict(coarse, dt_base=1e-4))).config_warnings()
    assert not HalfspaceRunner(tiny(tmp_path / "e", control=coarse)).config_warnings()


def test_mirror_sensitivity(tmp_path):
    hps = tiny(
        tmp_path,
        num_trajectories=20,
        control={"dt_base": 1e-3, "t_max": 0.5, "r_couple": 1e-2},
        task={"mirror": {"sensitivity": True}},
    )
    report = MirrorRunner(hps).run()
    stats = {s.name: s for s in report.statistics}
    assert "r_couple_sensitivity" in stats
    # coupling at half the radius comes after the first hit of the full radius
    assert 0 <= stats["r_couple_sensitivity"].estimate <= report.extra["cdf"][-1]


def test_liouville_with_excursions(tmp_path):
    hps = tiny(tmp_path, num_trajectories=10, task={"liouville": {"excursion_level": 0.5}})
    report = LiouvilleRunner(hps).run()
    names = [s.name for s in report.statistics]
    assert names == [
        "coupling_fraction_increments",
        "coupling_fraction_vs_plane",
        "domination_violations",
        "excursion_success",
    ]
    assert report.statistics[0].passed
    assert report.statistics[2].passed


def test_max_principle_parallel_disks(tmp_path):
    hps = parallel_planes(tmp_path, disk=0.3, num_trajectories=10, control={"dt_base": 1e-3, "t_max": 2.0})
    report = MaxPrincipleRunner(hps).run()
    assert report.extra["surface_boundary_stops"] == 10
    assert abs(report.extra["min_terminal_r"] - 1.0) < 1e-9
    assert report.passed


def test_max_principle_needs_a_boundary(tmp_path):
    with pytest.raises(MissingBoundary):
        MaxPrincipleRunner(parallel_planes(tmp_path))
