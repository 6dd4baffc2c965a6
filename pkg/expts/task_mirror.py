import itertools
import sys

root = "/logs/mirror_coupling_plane"
counter = itertools.count()

base_hps = {
    "num_trajectories": 100000,
    "num_workers": 16,
    "print_every": 10000,
    "series_trajectories": 10,
    "control": {"dt_base": 1e-4, "t_max": 1.0, "r_couple": 1e-3},
}

hps = [
    {
        **base_hps,
        "log_dir": f"{root}/run_{next(counter)}/",
        "seed": seed,
        "task": {"mirror": {"sensitivity": sensitivity}},
    }
    for sensitivity in [False, True]
    for seed in [1, 2, 3]
]

from surfcouple.tasks.coupled import MirrorRunner

trial = MirrorRunner(hps[int(sys.argv[1])])
trial.run()
