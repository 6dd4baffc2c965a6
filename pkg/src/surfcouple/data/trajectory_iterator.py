from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np
import pandas as pd
import torch
from torch.utils.data import IterableDataset

from surfcouple.sde.noise import NoiseSource


@dataclass
class TrajectoryOutcome:
    """What a worker sends back for one trajectory. The series is only kept for the first few indices."""

    index: int
    stop: str
    summary: Dict[str, Any]
    ledger: Dict[str, Any]
    series: Optional[pd.DataFrame] = None


class TrajectoryTask:
    """Runs one trajectory of a scenario. Subclasses hold the (immutable) surfaces and step control."""

    def run_trajectory(self, index: int, noise: NoiseSource, keep_series: bool) -> TrajectoryOutcome:
        raise NotImplementedError()


class TrajectoryIterator(IterableDataset):
    """Yields (index, outcome) for trajectories 0..n-1, split into contiguous chunks across DataLoader workers.

    Every trajectory draws from its own NoiseSource(seed, index), so the set of outcomes does not depend
    on the number of workers; the consumer reorders them by index.
    """

    def __init__(self, task: TrajectoryTask, num_trajectories: int, seed: int, series_trajectories: int = 0):
        """Parameters
        ----------
        task: TrajectoryTask
            The scenario's per-trajectory logic
        num_trajectories: int
            Total number of trajectories over all workers
        seed: int
            The scenario-level seed; trajectory i uses the stream (seed, i)
        series_trajectories: int
            Trajectories with index below this send back their sampled series
        """
        self.task = task
        self.num_trajectories = num_trajectories
        self.seed = seed
        self.series_trajectories = series_trajectories

    def _idx_range(self) -> range:
        worker_info = torch.utils.data.get_worker_info()
        n = self.num_trajectories
        if worker_info is None:  # no multi-processing
            start, end = 0, n
        else:  # split the indices into chunks (per-worker)
            nw = worker_info.num_workers
            wid = worker_info.id
            start, end = int(np.round(n / nw * wid)), int(np.round(n / nw * (wid + 1)))
        return range(start, end)

    def __iter__(self):
        for index in self._idx_range():
            noise = NoiseSource(self.seed, index)
            yield index, self.task.run_trajectory(index, noise, index < self.series_trajectories)


def identity_collate(item):
    return item
