"""
End-to-end analysis run for one RunConfig:

tabulate q -> find equilibria -> response curves -> simulate the selected
equilibrium and pure-FS -> epsilon estimate -> gain curve -> disagreement
decay -> validate every table -> write them into one output directory.

    python python/pipeline.py [config.json] [output_dir]
"""

import logging
import sys
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np
import pandas as pd

from config import RunConfig, db_to_linear, load_config
from equilibrium import (
    StrategyProfile,
    PureFS,
    build_profile,
    epsilon_estimate,
    find_fixed_points,
    response_curves,
    select_point,
)
from io_tables import write_result
from montecarlo import disagreement_frame, disagreement_rate, gain_curve, run_trials
from threshold import tabulate
from validation import run_validation

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

Q_TABLE_STEPS = 100
GAIN_ISR_DB = np.arange(-3.0, 12.5, 1.0)
DISAGREEMENT_SCALES_DB = (20.0, 40.0, 60.0, 80.0)
DISAGREEMENT_A_OTHER = 0.5


def run_pipeline(config: RunConfig, output_dir: Union[str, Path] = "results") -> Dict[str, pd.DataFrame]:
    output_dir = Path(output_dir)
    p1, p2 = config.player_models()
    logger.info(
        f"Pipeline start: ISRbar {p1.isr_bar:.4g} / {p2.isr_bar:.4g}, "
        f"{config.trials:,} trials, seed {config.seed}"
    )

    # Step 1: thresholds
    tables: Dict[str, pd.DataFrame] = {"q_table": tabulate(1.0 / Q_TABLE_STEPS, 1.0, Q_TABLE_STEPS).to_frame()}

    # Step 2: equilibria
    points = find_fixed_points(p1, p2, config.grid, config.tol)
    tables["equilibria"] = pd.DataFrame([p.to_dict() for p in points])
    tables["curves"] = response_curves(p1, p2)
    point = select_point(points)
    if point.is_trivial:
        logger.warning("⚠️  No interior equilibrium; simulating pure-FS only")

    # Step 3: Monte Carlo
    eq_stats = run_trials(build_profile(point), p1, p2, config.trials, config.seed, config.threads)
    fs_stats = run_trials(StrategyProfile(PureFS(), PureFS()), p1, p2, config.trials, config.seed, config.threads)
    tables["simulate"] = eq_stats.to_frame()
    if not point.is_trivial:
        tables["epsilon"] = pd.DataFrame(
            [e.to_dict() for e in epsilon_estimate(point, p1, p2, max(config.trials, 10_000), config.seed)]
        )

    # Step 4: gains and disagreement decay
    tables["gain_curve"] = gain_curve(point, p1, p2, db_to_linear(GAIN_ISR_DB))
    decay = disagreement_rate(
        p1, DISAGREEMENT_A_OTHER, [db_to_linear(s) for s in DISAGREEMENT_SCALES_DB],
        config.trials, config.seed, config.threads,
    )
    tables["disagreement"] = disagreement_frame(decay)

    # Step 5: validate, then write
    run_validation(tables)
    for name, df in tables.items():
        write_result(df, "csv", output_dir / f"{name}.csv")
    write_result(
        {
            "config": config.to_dict(),
            "selected_point": point.to_dict(),
            "network_utility": eq_stats.network_utility,
            "network_fs_utility": fs_stats.network_utility,
        },
        "json",
        output_dir / "summary.json",
    )

    logger.info(
        f"Pipeline complete: network utility {eq_stats.network_utility:.4f} bits "
        f"vs pure-FS {fs_stats.network_utility:.4f} bits"
    )
    return tables


def main(argv: Optional[list] = None) -> None:
    argv = sys.argv[1:] if argv is None else argv
    logging.basicConfig(level=logging.INFO, format=LOG_FORMAT, stream=sys.stderr)
    config = load_config(argv[0] if argv else None)
    run_pipeline(config, argv[1] if len(argv) > 1 else "results")


if __name__ == "__main__":
    main()
