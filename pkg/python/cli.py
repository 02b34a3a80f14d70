"""
Command-line front end.

Every subcommand loads a RunConfig (--config, or the built-in defaults),
applies the global flags on top, runs one analysis and writes a CSV table or
a JSON document to standard output (or --output). Logs go to standard error.

Exit codes: 0 success, 1 numeric or validation failure, 2 usage or config error.

Examples:
  python python/cli.py q-table --a-min 0.5 --a-max 0.5 --steps 1
  python python/cli.py equilibrium --config configs/symmetric_rayleigh.json
  python python/cli.py simulate --trials 1000000 --threads 4
  python python/cli.py gain-curve --isr-db -3:12:1 --snr-db 20
  python python/cli.py disagreement --scales 20,40,60,80 --a-other 0.5
  python python/cli.py sweep --config configs/nakagami.json --param m1 --values 0.5,0.75,1
"""

import argparse
import logging
import sys
from typing import List, Optional

import numpy as np
import pandas as pd

from channel_models import tail_condition
from config import RunConfig, db_to_linear, load_config, override
from equilibrium import (
    build_profile,
    find_fixed_points,
    interior_points,
    response_curves,
    select_point,
)
from errors import ConfigError, DomainError, GameError, NumericError, ValidationError
from io_tables import FORMATS, write_result
from montecarlo import disagreement_frame, disagreement_rate, gain_curve, run_trials, sweep_param
from threshold import approximation_map, tabulate
from validation import validate_table

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NUMERIC = 1
EXIT_USAGE = 2

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


# -------------------------
# ARGUMENT PARSING
# -------------------------
def parse_range(text: str) -> np.ndarray:
    """'start:stop:step' in dB, stop included."""
    try:
        start, stop, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise DomainError(f"range must look like start:stop:step (got '{text}')")
    if step <= 0 or stop < start:
        raise DomainError(f"range needs step > 0 and stop >= start (got '{text}')")
    return np.arange(start, stop + step / 2.0, step)


def parse_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise DomainError(f"expected a comma-separated list of numbers (got '{text}')")


# values such as "-3:12:1" or "-6,0" would otherwise be read as option names
VALUE_FLAGS = ("--isr-db", "--snr-db", "--scales", "--values")


def glue_negative_values(argv: List[str]) -> List[str]:
    out: List[str] = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else None
        if tok in VALUE_FLAGS and nxt is not None and nxt.startswith("-") and not nxt.startswith("--"):
            out.append(f"{tok}={nxt}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def _global_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", "-c", help="RunConfig JSON document (default: built-in defaults)")
    common.add_argument("--format", "-f", choices=FORMATS, help="Output format (default: config output.format)")
    common.add_argument("--output", "-o", help="Output file (default: config output.path, else stdout)")
    common.add_argument("--threads", type=int, help="Monte Carlo worker threads")
    common.add_argument("--seed", type=int, help="Monte Carlo seed")
    common.add_argument("--trials", type=int, help="Monte Carlo trial count")
    common.add_argument("--grid", type=int, help="Fixed-point scan grid size")
    noise = common.add_mutually_exclusive_group()
    noise.add_argument("--verbose", "-v", action="store_true", help="Debug logging")
    noise.add_argument("--quiet", "-q", action="store_true", help="Warnings and errors only")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags()
    parser = argparse.ArgumentParser(
        prog="interference-game",
        description="Bayesian interference game: thresholds, equilibria and Monte Carlo checks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("q-table", parents=[common], help="Tabulate the ISR threshold q(a)")
    p.add_argument("--a-min", type=float, default=0.01)
    p.add_argument("--a-max", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=100)

    sub.add_parser("equilibrium", parents=[common], help="All fixed points of the threshold best-response system")

    p = sub.add_parser("simulate", parents=[common], help="Play an equilibrium profile over sampled channels")
    p.add_argument("--point", type=int, default=0, help="Interior point index (default: first)")
    p.add_argument("--mode", choices=("exact", "threshold"), default="exact")

    p = sub.add_parser("gain-curve", parents=[common], help="dB gain over pure-FS along an ISR grid")
    p.add_argument("--isr-db", default="-3:12:1", help="start:stop:step in dB")
    p.add_argument("--snr-db", type=float, help="Reference SNR in dB (default: each player's mean SNR)")
    p.add_argument("--point", type=int, default=0)

    p = sub.add_parser("disagreement", parents=[common], help="Exact vs threshold best-response disagreement")
    p.add_argument("--scales", default="20,40,60,80", help="Comma-separated power scales in dB")
    p.add_argument("--a-other", type=float, default=0.5)
    p.add_argument("--player", type=int, choices=(1, 2), default=1)

    p = sub.add_parser("sweep", parents=[common], help="Re-solve the fixed points while one parameter varies")
    p.add_argument("--param", required=True, help="Alias (m1, m2, k1, k2, isr_bar_db, power_db) or dotted config path")
    p.add_argument("--values", required=True, help="Comma-separated values")

    p = sub.add_parser("curves", parents=[common], help="Best-response probability curves R1(a), R2(a)")
    p.add_argument("--steps", type=int, default=201)

    p = sub.add_parser("br-map", parents=[common], help="Exact vs threshold best response over (SNR, ISR)")
    p.add_argument("--a", type=float, default=0.5, help="Opponent FDM probability")
    p.add_argument("--snr-db", default="-10:30:5", help="start:stop:step in dB")
    p.add_argument("--isr-db", default="-10:10:1", help="start:stop:step in dB")

    return parser


def setup_logging(args: argparse.Namespace) -> None:
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults < config file < flags."""
    config = load_config(args.config)
    flags = {
        "montecarlo.seed": args.seed,
        "montecarlo.trials": args.trials,
        "montecarlo.threads": args.threads,
        "solver.grid": args.grid,
        "output.format": args.format,
        "output.path": args.output,
    }
    for path, value in flags.items():
        if value is not None:
            config = override(config, path, value)
    return config


# -------------------------
# COMMANDS
# -------------------------
def cmd_q_table(args, config: RunConfig) -> pd.DataFrame:
    return tabulate(args.a_min, args.a_max, args.steps).to_frame()


def cmd_equilibrium(args, config: RunConfig) -> dict:
    p1, p2 = config.player_models()
    points = find_fixed_points(p1, p2, config.grid, config.tol)
    interior = interior_points(points)
    if interior:
        message = f"{len(interior)} interior equilibrium point(s) besides pure-FS"
    else:
        message = "only the pure-FS equilibrium (0, 0) exists for this configuration"
        logger.warning(f"⚠️  {message}")
    return {
        "points": [p.to_dict() for p in points],
        "interior_count": len(interior),
        "tail_condition": [tail_condition(p1), tail_condition(p2)],
        "message": message,
    }


def cmd_simulate(args, config: RunConfig) -> pd.DataFrame:
    p1, p2 = config.player_models()
    point = select_point(find_fixed_points(p1, p2, config.grid, config.tol), args.point)
    profile = build_profile(point, args.mode)
    stats = run_trials(profile, p1, p2, config.trials, config.seed, config.threads)
    return stats.to_frame()


def cmd_gain_curve(args, config: RunConfig) -> pd.DataFrame:
    p1, p2 = config.player_models()
    point = select_point(find_fixed_points(p1, p2, config.grid, config.tol), args.point)
    if point.is_trivial:
        logger.warning("⚠️  no interior equilibrium; gains are 0 dB against pure-FS")
    isr = db_to_linear(parse_range(args.isr_db))
    snr = None if args.snr_db is None else db_to_linear(args.snr_db)
    return gain_curve(point, p1, p2, isr, snr)


def cmd_disagreement(args, config: RunConfig) -> pd.DataFrame:
    player = config.player_models()[args.player - 1]
    scales = [db_to_linear(s) for s in parse_list(args.scales)]
    points = disagreement_rate(player, args.a_other, scales, config.trials, config.seed, config.threads)
    return disagreement_frame(points)


def cmd_sweep(args, config: RunConfig) -> pd.DataFrame:
    return sweep_param(config, args.param, parse_list(args.values))


def cmd_curves(args, config: RunConfig) -> pd.DataFrame:
    p1, p2 = config.player_models()
    return response_curves(p1, p2, args.steps)


def cmd_br_map(args, config: RunConfig) -> pd.DataFrame:
    snr = db_to_linear(parse_range(args.snr_db))
    isr = db_to_linear(parse_range(args.isr_db))
    return approximation_map(args.a, snr, isr)


COMMANDS = {
    "q-table": (cmd_q_table, "q_table"),
    "equilibrium": (cmd_equilibrium, None),
    "simulate": (cmd_simulate, "simulate"),
    "gain-curve": (cmd_gain_curve, "gain_curve"),
    "disagreement": (cmd_disagreement, "disagreement"),
    "sweep": (cmd_sweep, "sweep"),
    "curves": (cmd_curves, "curves"),
    "br-map": (cmd_br_map, "br_map"),
}


# -------------------------
# MAIN
# -------------------------
def run(args: argparse.Namespace) -> None:
    config = resolve_config(args)
    handler, schema = COMMANDS[args.command]
    result = handler(args, config)

    if schema is not None and not validate_table(schema, result):
        raise ValidationError(f"{args.command} produced a table that breaks the '{schema}' schema")

    fmt = config.output_format
    if args.command == "equilibrium":
        # the points document is JSON unless csv is asked for on the command line
        fmt = args.format or "json"
        if fmt == "csv":
            result = pd.DataFrame(result["points"])
            if not validate_table("equilibria", result):
                raise ValidationError("equilibrium points break the 'equilibria' schema")
    write_result(result, fmt, config.output_path)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(glue_negative_values(sys.argv[1:] if argv is None else list(argv)))
    except SystemExit as e:
        # argparse exits 2 on usage errors and 0 on --help
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK

    setup_logging(args)
    try:
        run(args)
    except (ConfigError, DomainError) as e:
        logger.error(f"❌ {e}")
        return EXIT_USAGE
    except (NumericError, ValidationError) as e:
        logger.error(f"❌ {e}")
        return EXIT_NUMERIC
    except GameError as e:
        logger.error(f"❌ {e}")
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
