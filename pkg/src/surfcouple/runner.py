import os
import pathlib
from typing import Any, Dict, List, Tuple

import pandas as pd
import torch
import torch.utils.tensorboard
from omegaconf import OmegaConf
from torch.utils.data import DataLoader
from tqdm import tqdm

from surfcouple.data.trajectory_iterator import TrajectoryIterator, TrajectoryOutcome, TrajectoryTask, identity_collate
from surfcouple.sde.engine import StepControl, StopReason
from surfcouple.sde.noise import scenario_seed
from surfcouple.utils.errors import BadParams
from surfcouple.utils.metrics import Statistic, SummaryReport
from surfcouple.utils.misc import create_logger

from .config import Config


def merge_ledgers(outcomes: List[TrajectoryOutcome]) -> Dict[str, Any]:
    """Sums the per-trajectory domination ledgers (empty for single-surface runs)."""
    ledgers = [o.ledger for o in outcomes if o.ledger]
    if not ledgers:
        return {}
    total = {k: sum(int(d[k]) for d in ledgers) for k in ("steps", "violations", "equalities", "ratio_violations")}
    stepped = [float(d["max_violation"]) for d in ledgers if d["steps"] > 0]
    total["max_violation"] = max(stepped) if stepped else 0.0
    return total


def stop_counts(outcomes: List[TrajectoryOutcome]) -> Dict[str, int]:
    counts = {reason.name: 0 for reason in StopReason}
    for o in outcomes:
        counts[o.stop] += 1
    return counts


class ScenarioRunner:
    # Name used for the CLI subcommand and mixed into the seed
    name: str = "scenario"
    # Field of TasksConfig holding this scenario's knobs
    task_section: str = "sto_comp"
    # Config sections echoed in the summary besides `task`
    echo_sections: Tuple[str, ...] = ("surface_m", "starts", "control")

    def __init__(self, hps: Dict[str, Any]):
        """A Monte Carlo scenario. Runs trajectories of `self.task` in `run` and should be subclassed.

        Parameters
        ----------
        hps: Dict[str, Any]
            A dictionary of hyperparameters. These override default values obtained by the `set_default_hps` method.
        """
        # self.setup_task should at least set this up:
        self.task: TrajectoryTask

        # Config values come from the config classes, then `set_default_hps`, then `hps`
        self.cfg: Config = OmegaConf.structured(Config())
        self.set_default_hps(self.cfg)
        self.cfg = OmegaConf.merge(self.cfg, hps)  # type: ignore

        if self.cfg.num_trajectories < 1:
            raise BadParams(f"num_trajectories must be at least 1, got {self.cfg.num_trajectories}")
        self.print_every = self.cfg.print_every
        summary_path = pathlib.Path(self.cfg.log_dir) / "summary.yaml"
        if summary_path.exists() and not self.cfg.overwrite_existing_exp:
            raise BadParams(f"{self.cfg.log_dir} already holds a run. Set overwrite_existing_exp=True to replace it.")
        os.makedirs(self.cfg.log_dir, exist_ok=True)
        self.setup()

    def set_default_hps(self, base: Config):
        raise NotImplementedError()

    def setup_task(self):
        raise NotImplementedError()

    def config_warnings(self) -> List[str]:
        """Settings that run but are known to bias the statistics; logged as warnings before the run."""
        return []

    def evaluate(self, outcomes: List[TrajectoryOutcome]) -> Tuple[List[Statistic], Dict[str, Any]]:
        """Turns the per-trajectory outcomes, in index order, into checked statistics and extra reported values."""
        raise NotImplementedError()

    def setup(self):
        self.control = StepControl.from_config(self.cfg.control)
        self.seed = scenario_seed(self.cfg.seed, self.name)
        self.setup_task()

    @property
    def task_cfg(self):
        return getattr(self.cfg.task, self.task_section)

    def build_trajectory_loader(self) -> DataLoader:
        iterator = TrajectoryIterator(
            self.task,
            self.cfg.num_trajectories,
            self.seed,
            series_trajectories=self.cfg.series_trajectories,
        )
        return torch.utils.data.DataLoader(
            iterator,
            batch_size=None,
            num_workers=self.cfg.num_workers,
            persistent_workers=False,
            collate_fn=identity_collate,
        )

    def scenario_echo(self) -> Dict[str, Any]:
        echo: Dict[str, Any] = {
            "name": self.name,
            "seed": int(self.cfg.seed),
            "num_trajectories": int(self.cfg.num_trajectories),
        }
        for section in self.echo_sections:
            echo[section] = OmegaConf.to_container(self.cfg[section], resolve=True, enum_to_str=True)
        echo["task"] = OmegaConf.to_container(self.task_cfg, resolve=True, enum_to_str=True)
        return echo

    def write_series(self, outcomes: List[TrajectoryOutcome]) -> pathlib.Path:
        path = pathlib.Path(self.cfg.log_dir) / "series.csv"
        frames = [o.series.assign(traj=o.index) for o in outcomes if o.series is not None]
        if frames:
            df = pd.concat(frames, ignore_index=True)
            df = df[["traj"] + [c for c in df.columns if c != "traj"]]
        else:
            df = pd.DataFrame(columns=["traj"])
        df.to_csv(path, index=False, float_format="%.17g")
        return path

    def run(self, logger=None) -> SummaryReport:
        """Runs `num_trajectories` trajectories, then evaluates and writes the scenario's statistics."""
        if logger is None:
            logger = create_logger(logfile=self.cfg.log_dir + "/run.log")
        n = self.cfg.num_trajectories
        with open(pathlib.Path(self.cfg.log_dir) / "hps.yaml", "w") as f:
            f.write(OmegaConf.to_yaml(self.cfg))
        logger.info(f"Starting scenario {self.name} : {n} trajectories, {self.cfg.num_workers} workers")
        for message in self.config_warnings():
            logger.warning(message)

        outcomes: Dict[int, TrajectoryOutcome] = {}
        for index, outcome in tqdm(self.build_trajectory_loader(), total=n, desc=self.name, disable=None):
            outcomes[index] = outcome
            done = len(outcomes)
            if done % self.print_every == 0 or done == n:
                counts = stop_counts(list(outcomes.values()))
                logger.info(f"trajectory {done}/{n} : " + " ".join(f"{k}:{v}" for k, v in counts.items()))
        assert len(outcomes) == n, "every trajectory index must be run exactly once"
        ordered = [outcomes[i] for i in range(n)]

        series_path = self.write_series(ordered)
        statistics, extra = self.evaluate(ordered)
        report = SummaryReport(self.scenario_echo(), statistics, stop_counts(ordered), merge_ledgers(ordered), extra)
        summary_path = pathlib.Path(self.cfg.log_dir) / "summary.yaml"
        with open(summary_path, "w") as f:
            f.write(report.to_yaml())

        for s in statistics:
            logger.info(
                f"{s.name} : estimate:{s.estimate:.6g} stderr:{s.stderr:.3g} target:{s.target:.6g} "
                f"tolerance:{s.tolerance:.3g} pass:{s.passed}"
            )
            if self.cfg.log_tensorboard:
                self.log({"estimate": s.estimate, "target": s.target, "pass": float(s.passed)}, 0, s.name)
        if report.ledger:
            logger.info("domination ledger : " + " ".join(f"{k}:{v}" for k, v in report.ledger.items()))
        if self.cfg.log_tensorboard:
            self.log({k: float(v) for k, v in report.stop_counts.items()}, 0, "stop")
            self._summary_writer.close()
            del self._summary_writer
        logger.info(f"Wrote {series_path} and {summary_path}")
        logger.info(f"Scenario {self.name} {'passed' if report.passed else 'failed'}")
        return report

    def log(self, info, index, key):
        if not hasattr(self, "_summary_writer"):
            self._summary_writer = torch.utils.tensorboard.SummaryWriter(str(pathlib.Path(self.cfg.log_dir) / "tb"))
        for k, v in info.items():
            self._summary_writer.add_scalar(f"{key}_{k}", v, index)
