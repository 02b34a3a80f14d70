"""
Plays the game over sampled channel realizations.

- run_trials        : both players act on private draws, utilities scored from the payoff table
- disagreement_rate : how often the exact and threshold best responses differ, per power scale
- gain_curve        : conditional dB gain of an equilibrium over pure-FS along an ISR grid
- sweep_param       : re-solve the fixed points while one config field varies

Trials are split into fixed-size chunks; chunk c draws from the stream derived
from (seed, c), and chunk results are combined in chunk order, so the thread
count never changes a result.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from channel_models import (
    STREAM_DISAGREEMENT,
    STREAM_TRIALS,
    PlayerModel,
    derive_stream,
    sample_gain,
    sample_pairs,
)
from config import RunConfig, linear_to_db, override
from equilibrium import EquilibriumPoint, StrategyProfile, conditional_gain_db, find_fixed_points, interior_points
from errors import DomainError, GameError
from payoff_core import Action, check_probability, exact_fdm_mask, realized_utility, threshold_fdm_mask, utility
from threshold import solve_q

logger = logging.getLogger(__name__)

CHUNK_SIZE = 1 << 16
N_BATCHES = 100

SWEEP_ALIASES = {
    "m1": "players.direct.shape",
    "m2": "players.cross.shape",
    "k1": "players.direct.shape",
    "k2": "players.cross.shape",
    "power_db": "players.power_db",
}
# ISRbar in dB is cross.mean_db - direct.mean_db, so it is set per player
ISR_BAR_ALIAS = "isr_bar_db"


# -------------------------
# CHUNKING
# -------------------------
def _chunks(trials: int) -> List[Tuple[int, int, int]]:
    """(chunk index, first trial, size) for every chunk."""
    return [
        (c, start, min(CHUNK_SIZE, trials - start))
        for c, start in enumerate(range(0, trials, CHUNK_SIZE))
    ]


def _map_chunks(worker: Callable, chunks: Sequence, threads: int) -> list:
    if threads < 1:
        raise DomainError(f"threads must be >= 1 (got {threads})")
    if threads == 1 or len(chunks) == 1:
        return [worker(c) for c in chunks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        # map keeps chunk order, so the reduction order is fixed
        return list(pool.map(worker, chunks))


# -------------------------
# TRIALS
# -------------------------
@dataclass(frozen=True)
class PlayerStats:
    player: int
    fdm_freq: float
    mean_utility: float
    mean_fs_utility: float
    stderr: float            # of mean_utility
    stderr_gain: float       # of the paired difference mean_utility - mean_fs_utility
    stderr_fdm_freq: float


@dataclass(frozen=True)
class TrialStats:
    players: Tuple[PlayerStats, PlayerStats]
    trials: int
    seed: int

    @property
    def network_utility(self) -> float:
        return sum(p.mean_utility for p in self.players)

    @property
    def network_fs_utility(self) -> float:
        return sum(p.mean_fs_utility for p in self.players)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [
                {
                    "player": p.player,
                    "fdm_freq": p.fdm_freq,
                    "mean_utility": p.mean_utility,
                    "mean_fs_utility": p.mean_fs_utility,
                    "stderr": p.stderr,
                }
                for p in self.players
            ]
        )


# per player: FDM indicator, realized utility, pure-FS utility, their difference
_N_SERIES = 4


def _batch_means(sums: np.ndarray, counts: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Overall means and batch-means standard errors, one per series row."""
    means = sums.sum(axis=1) / counts.sum()
    batch = sums / counts
    n = batch.shape[1]
    if n < 2:
        return means, np.full(means.shape, math.nan)
    return means, batch.std(axis=1, ddof=1) / math.sqrt(n)


def run_trials(
    profile: StrategyProfile,
    p1: PlayerModel,
    p2: PlayerModel,
    trials: int,
    seed: int,
    threads: int = 1,
) -> TrialStats:
    """
    Play `trials` independent rounds; each player sees only its own (x, y).

    Standard errors come from batch means over 100 equal batches of the trial
    index range (fewer when trials < 100).
    """
    if trials < 1:
        raise DomainError(f"trials must be >= 1 (got {trials})")
    n_batches = min(N_BATCHES, trials)

    def worker(chunk: Tuple[int, int, int]) -> Tuple[np.ndarray, np.ndarray]:
        c, start, n = chunk
        rng = derive_stream(seed, STREAM_TRIALS, c)
        x1, y1 = sample_pairs(p1, rng, n)
        x2, y2 = sample_pairs(p2, rng, n)
        f1 = profile.player1.fdm_mask(x1, y1)
        f2 = profile.player2.fdm_mask(x2, y2)
        u1 = realized_utility(f1, f2, x1, y1)
        u2 = realized_utility(f2, f1, x2, y2)
        fs1 = utility(Action.FS, Action.FS, x1, y1)
        fs2 = utility(Action.FS, Action.FS, x2, y2)
        batch = (start + np.arange(n)) * n_batches // trials
        series = (f1.astype(float), u1, fs1, u1 - fs1, f2.astype(float), u2, fs2, u2 - fs2)
        sums = np.stack([np.bincount(batch, weights=s, minlength=n_batches) for s in series])
        counts = np.bincount(batch, minlength=n_batches).astype(float)
        return sums, counts

    results = _map_chunks(worker, _chunks(trials), threads)
    sums = np.zeros((2 * _N_SERIES, n_batches))
    counts = np.zeros(n_batches)
    for s, n in results:
        sums += s
        counts += n
    means, errs = _batch_means(sums, counts)

    players = []
    for idx in range(2):
        o = idx * _N_SERIES
        players.append(
            PlayerStats(
                player=idx + 1,
                fdm_freq=float(means[o]),
                mean_utility=float(means[o + 1]),
                mean_fs_utility=float(means[o + 2]),
                stderr=float(errs[o + 1]),
                stderr_gain=float(errs[o + 3]),
                stderr_fdm_freq=float(errs[o]),
            )
        )
    stats = TrialStats(players=tuple(players), trials=trials, seed=seed)
    logger.info(
        f"{trials:,} trials ({profile.describe()}): FDM freq "
        f"{players[0].fdm_freq:.4f} / {players[1].fdm_freq:.4f}, network utility "
        f"{stats.network_utility:.4f} vs pure-FS {stats.network_fs_utility:.4f} bits"
    )
    return stats


# -------------------------
# DISAGREEMENT
# -------------------------
@dataclass(frozen=True)
class DisagreementPoint:
    scale: float
    rate: float
    stderr: float


def disagreement_rate(
    player: PlayerModel,
    a_other: float,
    power_scales: Iterable[float],
    trials: int,
    seed: int,
    threads: int = 1,
) -> List[DisagreementPoint]:
    """
    Fraction of draws where the exact and threshold best responses differ.

    Every scale reuses the same unit-power gain draws (common random numbers),
    so differences between scales are not sampling noise.
    """
    check_probability(a_other, "a_other")
    if a_other <= 0:
        raise DomainError("a_other must be in (0, 1]")
    scales = [float(s) for s in power_scales]
    if not scales or any(s <= 0 for s in scales) or any(b <= a for a, b in zip(scales, scales[1:])):
        raise DomainError("power scales must be positive and strictly increasing")
    if trials < 1:
        raise DomainError(f"trials must be >= 1 (got {trials})")
    q = solve_q(a_other)

    def worker(chunk: Tuple[int, int, int]) -> np.ndarray:
        c, _, n = chunk
        rng = derive_stream(seed, STREAM_DISAGREEMENT, c)
        gx = sample_gain(player.direct, rng, n)
        gy = sample_gain(player.cross, rng, n)
        counts = np.empty(len(scales))
        for k, s in enumerate(scales):
            x, y = s * gx, s * gy
            counts[k] = np.count_nonzero(exact_fdm_mask(x, y, a_other) != threshold_fdm_mask(x, y, q))
        return counts

    total = np.zeros(len(scales))
    for counts in _map_chunks(worker, _chunks(trials), threads):
        total += counts

    out = []
    for s, hits in zip(scales, total):
        rate = hits / trials
        out.append(DisagreementPoint(scale=s, rate=rate, stderr=math.sqrt(rate * (1.0 - rate) / trials)))
        logger.debug(f"disagreement at scale {s:.3e}: {rate:.3e}")
    return out


def disagreement_frame(points: List[DisagreementPoint]) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "scale_db": [linear_to_db(p.scale) for p in points],
            "rate": [p.rate for p in points],
            "stderr": [p.stderr for p in points],
        }
    )


# -------------------------
# GAIN CURVE
# -------------------------
def gain_curve(
    point: EquilibriumPoint,
    p1: PlayerModel,
    p2: PlayerModel,
    isr_grid: Iterable[float],
    snr_ref: Optional[float] = None,
) -> pd.DataFrame:
    """
    conditional_gain_db at (x = snr_ref, y = isr * snr_ref) for both players.

    Without snr_ref each player is evaluated at its own mean SNR.
    """
    isr = np.asarray(list(isr_grid), dtype=float)
    if isr.size == 0 or np.any(~(isr > 0)) or np.any(~np.isfinite(isr)):
        raise DomainError("ISR grid must be non-empty, positive and finite")
    snr = {
        idx: (snr_ref if snr_ref is not None else p.snr_law().mean)
        for idx, p in ((1, p1), (2, p2))
    }
    return pd.DataFrame(
        {
            "isr_db": 10.0 * np.log10(isr),
            "isr": isr,
            "snr_p1": snr[1],
            "snr_p2": snr[2],
            "gain_db_p1": conditional_gain_db(point, snr[1], isr * snr[1], 1),
            "gain_db_p2": conditional_gain_db(point, snr[2], isr * snr[2], 2),
        }
    )


# -------------------------
# PARAMETER SWEEP
# -------------------------
SWEEP_COLUMNS = ["value", "n_interior", "point", "a1", "a2", "q1", "q2", "residual", "converged", "error"]


def apply_sweep_value(base: RunConfig, param: str, value: float) -> RunConfig:
    """`base` with one sweep parameter set; `isr_bar_db` moves each cross link relative to its direct link."""
    if param == ISR_BAR_ALIAS:
        config = base
        for idx, player in enumerate(base.doc["players"], start=1):
            config = override(config, f"player{idx}.cross.mean_db", player["direct"]["mean_db"] + value)
        return config
    return override(base, SWEEP_ALIASES.get(param, param), value)


def sweep_param(base: RunConfig, param: str, values: Iterable[float]) -> pd.DataFrame:
    """
    Re-solve the fixed points for each value of one config field.

    `param` is `isr_bar_db`, an alias from SWEEP_ALIASES or a dotted config path
    (`players.`, `player1.` or `player2.` prefix). One row per interior point;
    a value with no interior point gets a single row with n_interior = 0, and
    a value whose solve failed records the error inline.
    """
    rows = []
    for value in values:
        empty = {"value": value, "n_interior": 0, "point": None, "a1": None, "a2": None,
                 "q1": None, "q2": None, "residual": None, "converged": None, "error": ""}
        try:
            config = apply_sweep_value(base, param, value)
            p1, p2 = config.player_models()
            interior = interior_points(find_fixed_points(p1, p2, config.grid, config.tol))
        except GameError as e:
            logger.warning(f"❌ sweep {param}={value}: {e}")
            rows.append({**empty, "error": str(e).replace("\n", "; ")})
            continue
        if not interior:
            logger.warning(f"⚠️  sweep {param}={value}: only the pure-FS point exists")
            rows.append(empty)
        for k, p in enumerate(interior):
            rows.append({
                "value": value, "n_interior": len(interior), "point": k,
                "a1": p.a1, "a2": p.a2, "q1": p.q1, "q2": p.q2,
                "residual": p.residual, "converged": p.converged, "error": "",
            })
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)
