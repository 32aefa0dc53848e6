"""Command-line interface.

Subcommands::

    recipcal calibrate              one internal calibration round
    recipcal fig6                   noiseless coefficient recovery table
    recipcal fig7                   partition-scheme (K, L) sweep
    recipcal fig8                   transmit/receive noise split sweep
    recipcal fig9                   downlink CSIT error grid
    recipcal dl-nmse                downlink CSIT error at one point
    recipcal fully-connected-check  reference-link calibration smoke check

Exit codes: 0 success, 2 configuration error, 3 numerical failure
(underdetermined system, degenerate eigenproblem, failed check), 4 file
format / I/O error. ``RECIPCAL_THREADS`` caps worker threads for sweeps.
"""

from __future__ import annotations

import argparse
import sys

from .config import (
    NOISE_MODES,
    PARTITION_SCHEMES,
    ScenarioConfig,
    apply_values,
    parse_config_file,
    validate_scenario,
)
from .errors import (
    ConfigError,
    ContractViolationError,
    CsvFormatError,
    InvalidInputError,
    InvalidParameterError,
    SingularCalibrationError,
    SingularHardwareError,
    UnderdeterminedSystemError,
    UnsupportedArchitectureError,
    UnsupportedPartitionError,
)
from . import experiments

# Per-command overrides applied between the package defaults and any config file.
COMMAND_DEFAULTS: dict[str, dict[str, str]] = {
    "fig6": {"noise.mode": "none", "calibration.k": "32", "calibration.l": "5"},
    "fully-connected-check": {"noise.mode": "none"},
}

# CLI flag -> dotted config key
FLAG_KEYS = (
    ("seed", "seed"),
    ("trials", "sweep.trials"),
    ("partition", "partition.scheme"),
    ("noise", "noise.mode"),
    ("k", "calibration.k"),
    ("l", "calibration.l"),
    ("mc_trials", "csit.mc_trials"),
    ("grid_points", "csit.grid_points"),
)


def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", metavar="PATH", help="config file (key = value lines)")
    sp.add_argument("--seed", type=int, help="root random seed")
    sp.add_argument("--out", metavar="PATH", help="output CSV path")
    sp.add_argument("--trials", type=int, help="Monte Carlo trials per sweep cell")
    sp.add_argument("--partition", choices=PARTITION_SCHEMES, help="antenna partition scheme")
    sp.add_argument("--noise", choices=NOISE_MODES, help="noise sources to enable")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="recipcal",
        description="Reciprocity calibration simulator for hybrid beamforming arrays.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("calibrate", help="run one internal calibration round")
    _add_common(sp)
    sp.add_argument("--k", type=int, help="number of pilot beams")
    sp.add_argument("--l", type=int, help="number of combiners")
    sp.add_argument("--channel-csv", metavar="PATH", help="load the intra-array channel")

    for name, help_text in (
        ("fig6", "noiseless coefficient recovery table"),
        ("fig7", "partition-scheme (K, L) sweep"),
        ("fig8", "transmit/receive noise split sweep"),
    ):
        sp = sub.add_parser(name, help=help_text)
        _add_common(sp)
        if name == "fig6":
            sp.add_argument("--k", type=int, help="number of pilot beams")
            sp.add_argument("--l", type=int, help="number of combiners")

    sp = sub.add_parser("fig9", help="downlink CSIT error grid")
    _add_common(sp)
    sp.add_argument("--mc-trials", type=int, dest="mc_trials")
    sp.add_argument("--grid-points", type=int, dest="grid_points")

    sp = sub.add_parser("dl-nmse", help="downlink CSIT error at one point")
    _add_common(sp)
    sp.add_argument("--nmse-f", type=float, required=True, dest="nmse_f")
    sp.add_argument("--nmse-ul", type=float, required=True, dest="nmse_ul")
    sp.add_argument("--mc-trials", type=int, dest="mc_trials")

    sp = sub.add_parser("fully-connected-check", help="reference-link calibration check")
    _add_common(sp)
    return parser


def build_config(args: argparse.Namespace) -> ScenarioConfig:
    cfg = ScenarioConfig()
    cfg = apply_values(cfg, COMMAND_DEFAULTS.get(args.command, {}), "defaults")
    if getattr(args, "config", None):
        cfg = apply_values(cfg, parse_config_file(args.config), args.config)
    flag_values = {}
    for attr, key in FLAG_KEYS:
        val = getattr(args, attr, None)
        if val is not None:
            flag_values[key] = str(val)
    cfg = apply_values(cfg, flag_values, "command line")
    validate_scenario(cfg, args.command)
    return cfg


def _dispatch(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    command = args.command
    if command == "calibrate":
        res = experiments.run_calibrate(cfg, out=args.out, channel_csv=args.channel_csv)
        print(
            f"calibrate: k={cfg.cal_k} l={cfg.cal_l} partition={cfg.partition_scheme} "
            f"noise={cfg.noise_mode} seed={cfg.seed}"
        )
        print(
            f"  nmse_f={res.nmse:.6e} residual={res.solution.residual:.6e} "
            f"eigen_gap={res.solution.eigen_gap:.6e}"
        )
        if args.out:
            print(f"  wrote {args.out}")
        if res.solution.degenerate:
            print("  solution is degenerate", file=sys.stderr)
            return 3
        return 0
    if command == "fig6":
        out = args.out or "fig6.csv"
        res = experiments.run_fig6(cfg, out=out)
        print(
            f"fig6: nmse_f={res.nmse:.6e} max_abs_dev={res.max_abs_dev:.6e} "
            f"rows={cfg.n_ant} -> {out}"
        )
        return 0
    if command in ("fig7", "fig8"):
        out = args.out or f"{command}.csv"
        runner = experiments.run_fig7 if command == "fig7" else experiments.run_fig8
        rows = runner(cfg, out=out)
        print(f"{command}: wrote {len(rows)} rows -> {out}")
        return 0
    if command == "fig9":
        out = args.out or "fig9.csv"
        rows = experiments.run_fig9(cfg, out=out)
        print(f"fig9: wrote {len(rows)} rows -> {out}")
        return 0
    if command == "dl-nmse":
        closed, mc = experiments.run_dl_nmse(cfg, args.nmse_f, args.nmse_ul)
        print(
            f"dl-nmse: nmse_f={args.nmse_f:g} nmse_ul={args.nmse_ul:g} "
            f"closed={closed:.6e} monte_carlo={mc:.6e}"
        )
        return 0
    if command == "fully-connected-check":
        res = experiments.run_fully_connected_check(cfg, out=args.out)
        print(
            f"fully-connected-check: nmse_bs={res.nmse_bs:.6e} "
            f"nmse_joint={res.nmse_joint:.6e} threshold={res.threshold:g}"
        )
        print(
            f"  composite_reciprocity_dev={res.composite_reciprocity_dev:.3e} "
            f"internal_calibration_refused={res.internal_calibration_refused}"
        )
        if args.out:
            print(f"  wrote {args.out}")
        if not res.ok:
            print("  CHECK FAILED", file=sys.stderr)
            return 3
        print("  CHECK PASSED")
        return 0
    raise ConfigError(f"unknown command {command!r}")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (
        ConfigError,
        InvalidParameterError,
        UnsupportedArchitectureError,
        UnsupportedPartitionError,
    ) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (
        UnderdeterminedSystemError,
        ContractViolationError,
        SingularHardwareError,
        SingularCalibrationError,
        InvalidInputError,
    ) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except CsvFormatError as exc:
        print(f"file format error: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
