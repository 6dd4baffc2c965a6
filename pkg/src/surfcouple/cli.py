"""Command line: one subcommand per scenario.

    surfcouple mirror-coupling-plane --traj 10000 --out logs/mirror
    surfcouple halfspace --config halfspace.yaml --seed 7 --workers 8 --out logs/halfspace

Exit code 0 when every statistic passes, 1 when one fails, 2 on a configuration error.
"""
import argparse
import sys
from typing import Dict, List, Optional, Type

from omegaconf import DictConfig, OmegaConf
from omegaconf.errors import OmegaConfBaseException

from surfcouple.runner import ScenarioRunner
from surfcouple.tasks.coupled import HalfspaceRunner, LiouvilleRunner, MaxPrincipleRunner, MirrorRunner
from surfcouple.tasks.single_surface import (
    CoordinateQVRunner,
    GaussOccupationRunner,
    GaussTimeChangeRunner,
    StoCompRunner,
)
from surfcouple.utils.errors import BadParams, DegenerateMetric, DomainExit, MissingBoundary
from surfcouple.utils.misc import create_logger

SCENARIOS: Dict[str, Type[ScenarioRunner]] = {
    cls.name: cls
    for cls in (
        StoCompRunner,
        CoordinateQVRunner,
        GaussOccupationRunner,
        GaussTimeChangeRunner,
        HalfspaceRunner,
        MirrorRunner,
        LiouvilleRunner,
        MaxPrincipleRunner,
    )
}

CONFIG_ERRORS = (OmegaConfBaseException, BadParams, MissingBoundary, DomainExit, DegenerateMetric, OSError)

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="surfcouple", description="Coupled Brownian motions on minimal surfaces")
    subparsers = parser.add_subparsers(dest="scenario", required=True)
    for name, runner_cls in SCENARIOS.items():
        doc = (runner_cls.__doc__ or "").strip().splitlines()
        sub = subparsers.add_parser(name, help=doc[0] if doc else None)
        sub.add_argument("--config", type=str, default=None, help="YAML file with Config overrides")
        sub.add_argument("--seed", type=int, default=None, help="Base seed (unsigned 64-bit)")
        sub.add_argument("--traj", type=int, default=None, help="Number of trajectories")
        sub.add_argument("--dt", type=float, default=None, help="Base time step")
        sub.add_argument("--tmax", type=float, default=None, help="Time cap")
        sub.add_argument("--out", type=str, default=None, help="Output directory (log_dir)")
        sub.add_argument("--workers", type=int, default=None, help="DataLoader workers; outputs do not depend on it")
    return parser


def hps_from_args(args: argparse.Namespace) -> DictConfig:
    """Config file values, then command line flags on top."""
    hps = OmegaConf.load(args.config) if args.config else OmegaConf.create()
    flags = {
        "seed": args.seed,
        "num_trajectories": args.traj,
        "log_dir": args.out,
        "num_workers": args.workers,
        "control": {"dt_base": args.dt, "t_max": args.tmax},
    }
    flags["control"] = {k: v for k, v in flags["control"].items() if v is not None}
    overrides = {k: v for k, v in flags.items() if v is not None and v != {}}
    return OmegaConf.merge(hps, overrides)  # type: ignore


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        runner = SCENARIOS[args.scenario](hps_from_args(args))
        report = runner.run()
    except CONFIG_ERRORS as e:
        create_logger().error(f"configuration error in {args.scenario}: {e}")
        return EXIT_CONFIG
    return EXIT_PASS if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
