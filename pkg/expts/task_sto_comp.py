import itertools
import sys

root = "/logs/sto_comp"
counter = itertools.count()

base_hps = {
    "num_workers": 8,
    "print_every": 1000,
    "control": {"dt_base": 1e-4, "t_max": 1.0},
}

hps = [
    {
        **base_hps,
        "log_dir": f"{root}/run_{next(counter)}/",
        "seed": seed,
        "num_trajectories": num_trajectories,
        "surface_m": {"kind": kind},
        "starts": {"x0": x0},
        "task": {"sto_comp": {"allowance_rel": allowance_rel}},
    }
    for kind, x0, num_trajectories, allowance_rel in [
        ("Plane", [0.0, 0.0], 100000, 0.0),
        ("Catenoid", [1.0, 0.0], 10000, 0.02),
    ]
    for seed in [1, 2, 3]
]

from surfcouple.tasks.single_surface import StoCompRunner

trial = StoCompRunner(hps[int(sys.argv[1])])
trial.run()
