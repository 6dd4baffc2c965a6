import itertools
import math
import sys

root = "/logs/halfspace"
counter = itertools.count()

base_hps = {
    "num_trajectories": 1000,
    "num_workers": 8,
    "control": {"dt_base": 1e-3, "t_max": 5.0},
}

flat = {"kind": "Plane", "rotvec": [0.0, 0.0, 0.0], "offset": [0.0, 0.0, 1.0]}

hps = [
    {
        **base_hps,
        "log_dir": f"{root}/run_{next(counter)}/",
        "seed": seed,
        **setting,
    }
    for setting in [
        # catenoid against the plane {x1 = 3}: inf r keeps decreasing
        {},
        # catenoid against a tilted plane farther out
        {
            "surface_n": {"kind": "Plane", "rotvec": [0.0, math.pi / 2, 0.3], "offset": [5.0, 0.0, 0.0]},
            "starts": {"x0": [-1.0, 0.0], "y0": [0.0, 0.0]},
        },
        # parallel planes: synchronous coupling, r never moves
        {
            "surface_m": {"kind": "Plane"},
            "surface_n": flat,
            "starts": {"x0": [0.0, 0.0], "y0": [0.0, 0.0]},
            "task": {"halfspace": {"expect": "constant"}},
        },
        # coplanar planes: mirror coupling, the pair couples
        {
            "surface_m": {"kind": "Plane"},
            "surface_n": {"kind": "Plane", "rotvec": [0.0, 0.0, 0.0], "offset": [0.0, 0.0, 0.0]},
            "starts": {"x0": [0.0, 0.0], "y0": [1.0, 0.0]},
            "task": {"halfspace": {"expect": "couple"}},
        },
    ]
    for seed in [1, 2, 3]
]

from surfcouple.tasks.coupled import HalfspaceRunner

trial = HalfspaceRunner(hps[int(sys.argv[1])])
trial.run()
