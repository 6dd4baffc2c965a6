from dataclasses import dataclass, field

from omegaconf import MISSING

from surfcouple.coupling.config import CouplingConfig
from surfcouple.geometry.config import StartsConfig, SurfaceConfig
from surfcouple.sde.config import StepControlConfig
from surfcouple.tasks.config import TasksConfig


@dataclass
class Config:
    """Base configuration of a scenario run

    Attributes
    ----------
    log_dir : str
        The directory where series.csv, summary.yaml, hps.yaml, run.log and tensorboard files are written
    seed : int
        The base random seed (unsigned 64-bit); the scenario name is mixed into it
    num_workers : int
        The number of DataLoader workers running trajectories (0 = no multiprocessing); never changes outputs
    num_trajectories : int
        The number of independent trajectories
    print_every : int
        Log progress every this many finished trajectories
    log_tensorboard : bool
        Whether to write statistics to <log_dir>/tb
    series_trajectories : int
        The number of leading trajectories whose sampled series goes to series.csv
    overwrite_existing_exp : bool
        Whether a log_dir already holding a summary.yaml may be overwritten
    surface_m : SurfaceConfig
        The first surface (the only one for single-surface scenarios)
    surface_n : SurfaceConfig
        The second surface of coupled scenarios
    starts : StartsConfig
        Chart start points
    control : StepControlConfig
        Time stepping and stopping
    coupling : CouplingConfig
        Coupling constants and tolerances
    task : TasksConfig
        Per-scenario knobs
    """

    log_dir: str = MISSING
    seed: int = 0
    num_workers: int = 0
    num_trajectories: int = 1000
    print_every: int = 100
    log_tensorboard: bool = True
    series_trajectories: int = 10
    overwrite_existing_exp: bool = True
    surface_m: SurfaceConfig = field(default_factory=SurfaceConfig)
    surface_n: SurfaceConfig = field(default_factory=SurfaceConfig)
    starts: StartsConfig = field(default_factory=StartsConfig)
    control: StepControlConfig = field(default_factory=StepControlConfig)
    coupling: CouplingConfig = field(default_factory=CouplingConfig)
    task: TasksConfig = field(default_factory=TasksConfig)
