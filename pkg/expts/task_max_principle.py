import itertools
import sys

root = "/logs/max_principle_boundary"
counter = itertools.count()

base_hps = {
    "num_trajectories": 1000,
    "num_workers": 8,
    "control": {"dt_base": 1e-3, "t_max": 20.0},
}

disk = {"kind": "Plane", "domain": "disk", "radius": 1.0, "boundary": True}

hps = [
    {
        **base_hps,
        "log_dir": f"{root}/run_{next(counter)}/",
        "seed": seed,
        **setting,
    }
    for setting in [
        # a catenoid collar against the plane {x3 = 3}
        {},
        {"starts": {"x0": [1.5, 0.5], "y0": [0.0, -2.0]}},
        # parallel flat disks at distance 1: the equality case
        {
            "surface_m": disk,
            "surface_n": {**disk, "offset": [0.0, 0.0, 1.0]},
            "starts": {"x0": [0.0, 0.0], "y0": [0.0, 0.0]},
        },
    ]
    for seed in [1, 2, 3]
]

from surfcouple.tasks.coupled import MaxPrincipleRunner

trial = MaxPrincipleRunner(hps[int(sys.argv[1])])
trial.run()
