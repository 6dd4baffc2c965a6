import itertools
import sys

root = "/logs/liouville_embedded"
counter = itertools.count()

base_hps = {
    "num_trajectories": 1000,
    "num_workers": 8,
    "surface_m": {"kind": "Catenoid"},
}

hps = [
    {
        **base_hps,
        "log_dir": f"{root}/run_{next(counter)}/",
        "seed": seed,
        **setting,
    }
    for setting in [
        # opposite sides of the neck
        {"control": {"dt_base": 1e-3, "t_max": 20.0}, "starts": {"x0": [1.0, 0.0], "y0": [-1.0, 0.0]}},
        # a close pair, below the tubular scale, counting excursions
        {
            "control": {"dt_base": 1e-4, "t_max": 2.0, "r_couple": 1e-3},
            "starts": {"x0": [1.0, 0.0], "y0": [1.0, 0.01]},
            "task": {"liouville": {"excursion_level": 0.01}},
        },
    ]
    for seed in [1, 2, 3]
]

from surfcouple.tasks.coupled import LiouvilleRunner

trial = LiouvilleRunner(hps[int(sys.argv[1])])
trial.run()
