import itertools
import sys

root = "/logs/single_surface_laws"
counter = itertools.count()

base_hps = {
    "num_workers": 8,
    "surface_m": {"kind": "Catenoid"},
    "starts": {"x0": [1.0, 0.0]},
}

# (scenario, hps) pairs; the Gauss occupation run uses a long horizon and a coarser step
hps = [
    (
        scenario,
        {
            **base_hps,
            **scenario_hps,
            "log_dir": f"{root}/run_{next(counter)}/",
            "seed": seed,
        },
    )
    for scenario, scenario_hps in [
        ("coordinate-qv", {"num_trajectories": 1000, "control": {"dt_base": 1e-4, "t_max": 1.0}}),
        ("gauss-timechange", {"num_trajectories": 1000, "control": {"dt_base": 1e-4, "t_max": 1.0}}),
        ("gauss-occupation", {"num_trajectories": 200, "control": {"dt_base": 1e-3, "t_max": 50.0}}),
    ]
    for seed in [1, 2, 3]
]

from surfcouple.cli import SCENARIOS

scenario, run_hps = hps[int(sys.argv[1])]
trial = SCENARIOS[scenario](run_hps)
trial.run()
