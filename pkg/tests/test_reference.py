import math

import numpy as np
import pandas as pd
import pytest

from surfcouple.reference.bessel import (
    BesselParams,
    bessel_hit_prob,
    bessel_step,
    bm_first_passage_prob,
    domination_report,
    simulate_bessel,
)
from surfcouple.sde.noise import NoiseSource
from surfcouple.utils.errors import BadDimension, BadParams
from surfcouple.utils.metrics import Statistic, SummaryReport, mean_stderr


def test_bm_first_passage_prob():
    assert abs(bm_first_passage_prob(1.0, 1.0) - 0.617075) < 1e-6
    assert bm_first_passage_prob(1.0, 1e-6) < 1e-12
    with pytest.raises(BadParams):
        bm_first_passage_prob(0.0, 1.0)


def test_bessel_hit_prob():
    assert bessel_hit_prob(1.0, 1.0, 2.0) == 0.5
    assert bessel_hit_prob(2.0, 1.0, 2.0) == 0.0
    assert abs(bessel_hit_prob(1.5, 1.0, 4.0) - 0.5) < 1e-12
    with pytest.raises(BadDimension):
        bessel_hit_prob(3.0, 1.0, 2.0)
    with pytest.raises(BadParams):
        bessel_hit_prob(1.0, 2.0, 1.0)


def test_bessel_paths_are_absorbed_at_zero():
    rho = bessel_step(1.0, np.array([1e-12, 0.0, 1.0]), 1.0, NoiseSource(0, 0))
    assert rho[1] == 0.0
    assert np.all(rho >= 0)


def test_simulated_hitting_probability():
    n = 4000
    out = simulate_bessel(BesselParams(1.0, 1.0), 1e-3, 20.0, NoiseSource(0, 0), upper=2.0, n_paths=n)
    assert out.resolved.all()
    p = out.hit_zero.mean()
    se = math.sqrt(p * (1 - p) / n)
    assert abs(p - bessel_hit_prob(1.0, 1.0, 2.0)) < 4 * se
    assert not (out.hit_zero & out.hit_upper).any()


def test_simulate_rejects_low_barrier():
    with pytest.raises(BadParams):
        simulate_bessel(BesselParams(1.0, 1.0), 1e-3, 1.0, NoiseSource(0, 0), upper=0.5)
    with pytest.raises(BadParams):
        BesselParams(0.0, 1.0)


def test_domination_report():
    series = pd.DataFrame(
        {"f": [4.0, 2.0, 1.0, np.nan], "g": [0.0, 2.0, 1.5, np.nan], "r": [1.0, 0.5, 0.25, 0.1]}
    )
    report = domination_report(series)
    assert report.samples == 3
    assert report.violations == 1
    assert report.equalities == 1
    assert abs(report.max_violation - 0.5) < 1e-12
    assert report.ratio_violations == 1
    assert abs(report.max_drift_ratio - 1.5) < 1e-12
    assert abs(report.mean_effective_dim - (1 + (0 + 1 + 1.5) / 3)) < 1e-12


def test_mean_stderr():
    assert math.isnan(mean_stderr([])[0])
    assert mean_stderr([2.0]) == (2.0, math.inf)
    mean, se = mean_stderr([1.0, 2.0, 3.0])
    assert mean == 2.0
    assert abs(se - 1 / math.sqrt(3)) < 1e-12


def test_statistic_sides():
    assert Statistic("a", 1.0, 0.1, 1.2, 0.3).passed
    assert not Statistic("a", 1.0, 0.1, 1.5, 0.3).passed
    assert Statistic("a", 5.0, 0.0, 0.0, 0.0, side="lower").passed
    assert not Statistic("a", 5.0, 0.0, 0.0, 0.0, side="upper").passed
    assert not Statistic("a", 1.0, math.inf, 1.0, math.inf).passed
    assert not Statistic("a", math.nan, 0.0, 1.0, 1.0).passed


def test_summary_report():
    empty = SummaryReport({"name": "x"}, [], {})
    assert not empty.passed
    report = SummaryReport(
        {"name": "x"},
        [Statistic("a", np.float64(1.0), 0.1, 1.0, 0.2)],
        {"Coupled": 3},
        ledger={"violations": np.int64(0)},
        extra={"values": [np.float64(0.5)]},
    )
    d = report.to_dict()
    assert d["pass"] and d["statistics"]["a"]["pass"]
    assert type(d["ledger"]["violations"]) is int
    assert "stop_counts" in report.to_yaml()
