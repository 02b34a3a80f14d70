"""
Fixed points of the threshold best-response system, strategy profiles built
from them, Pareto gains over pure-FS, and Monte Carlo estimates of epsilon.

Each player's best response to an opponent FDM probability a is the threshold
rule with cutoff q(a); the probability it plays FDM is

    R_i(a) = 1 - F_{Z_i}(q(a))

and the equilibria are the solutions of a1 = R_1(a2), a2 = R_2(a1). The
system is a chain, so every solution is a root of g(a1) = a1 - R_1(R_2(a1)).
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Union

import numpy as np
import pandas as pd
from scipy.optimize import bisect

from channel_models import STREAM_EPSILON, PlayerModel, derive_stream, isr_cdf, sample_pairs
from errors import DomainError, GameError
from payoff_core import (
    Action,
    check_probability,
    conditional_payoffs,
    exact_fdm_mask,
    payoff_gap,
    threshold_fdm_mask,
    utility,
)
from threshold import Q_INFINITE, solve_q

logger = logging.getLogger(__name__)

DEFAULT_GRID = 2000
MIN_GRID = 100
ROOT_XTOL = 1e-12
ROOT_TOL = 1e-10
ACCEPT_RESIDUAL = 1e-8
DEDUP_DISTANCE = 1e-6
MIN_EPSILON_SAMPLES = 10_000

TRIVIAL_FS = "trivial-FS"
INTERIOR = "interior"


# -------------------------
# TYPES
# -------------------------
@dataclass(frozen=True)
class EquilibriumPoint:
    """(a1, a2) with q1 = q(a2) governing player 1 and q2 = q(a1) governing player 2."""

    a1: float
    a2: float
    q1: float
    q2: float
    residual: float
    kind: str
    converged: bool = True
    message: str = ""

    @property
    def is_trivial(self) -> bool:
        return self.kind == TRIVIAL_FS

    def opponent_probability(self, player_index: int) -> float:
        if player_index == 1:
            return self.a2
        if player_index == 2:
            return self.a1
        raise DomainError(f"player_index must be 1 or 2 (got {player_index})")

    def to_dict(self) -> dict:
        return {
            "a1": self.a1,
            "a2": self.a2,
            "q1": self.q1,
            "q2": self.q2,
            "residual": self.residual,
            "kind": self.kind,
            "converged": self.converged,
            "message": self.message,
        }


TRIVIAL_POINT = EquilibriumPoint(0.0, 0.0, Q_INFINITE, Q_INFINITE, 0.0, TRIVIAL_FS)


@dataclass(frozen=True)
class PureFS:
    kind: str = field(default="pure-FS", init=False)

    def fdm_mask(self, x, y) -> np.ndarray:
        return np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape, dtype=bool)


@dataclass(frozen=True)
class ExactBestResponse:
    a_opponent: float
    kind: str = field(default="exact-BR", init=False)

    def fdm_mask(self, x, y) -> np.ndarray:
        return exact_fdm_mask(x, y, self.a_opponent)


@dataclass(frozen=True)
class ThresholdRule:
    isr_cutoff: float
    kind: str = field(default="threshold", init=False)

    def __post_init__(self):
        if not (self.isr_cutoff >= 0.5):
            raise DomainError(f"threshold cutoff must be >= 1/2 or inf (got {self.isr_cutoff})")

    def fdm_mask(self, x, y) -> np.ndarray:
        return threshold_fdm_mask(x, y, self.isr_cutoff)


StrategyKind = Union[PureFS, ExactBestResponse, ThresholdRule]


@dataclass(frozen=True)
class StrategyProfile:
    player1: StrategyKind
    player2: StrategyKind

    def describe(self) -> str:
        return f"{_describe(self.player1)} / {_describe(self.player2)}"


def _describe(s: StrategyKind) -> str:
    if isinstance(s, ExactBestResponse):
        return f"exact-BR(a={s.a_opponent:.6g})"
    if isinstance(s, ThresholdRule):
        return f"threshold(q={s.isr_cutoff:.6g})"
    return "pure-FS"


# -------------------------
# FIXED POINTS
# -------------------------
def response_prob(player: PlayerModel, a_other: float) -> float:
    """P(threshold rule with cutoff q(a_other) plays FDM) = 1 - F_Z(q(a_other))."""
    check_probability(a_other, "a_other")
    q = solve_q(float(a_other))
    if math.isinf(q):
        return 0.0
    return 1.0 - isr_cdf(player, q)


def _make_point(p1: PlayerModel, p2: PlayerModel, a1: float) -> EquilibriumPoint:
    # a2 is defined through R_2, so the only defect left is on the a1 equation
    a2 = response_prob(p2, a1)
    residual = abs(a1 - response_prob(p1, a2))
    converged = residual <= ACCEPT_RESIDUAL
    return EquilibriumPoint(
        a1=a1,
        a2=a2,
        q1=solve_q(a2),
        q2=solve_q(a1),
        residual=residual,
        kind=INTERIOR,
        converged=converged,
        message="" if converged else f"residual {residual:.2e} above {ACCEPT_RESIDUAL:.0e}",
    )


def find_fixed_points(
    p1: PlayerModel,
    p2: PlayerModel,
    grid: int = DEFAULT_GRID,
    tol: float = ROOT_TOL,
) -> List[EquilibriumPoint]:
    """
    All solutions of the fixed-point system, the trivial (0, 0) point first.

    Scans g(a1) = a1 - R_1(R_2(a1)) on a1 = k/grid, k = 1..grid, refines every
    sign change by bisection and drops points closer than 1e-6 to one already
    found. `tol` is the |g| level at which a grid node counts as a root.
    Interior points that fail to reach the residual bound are still
    returned, flagged converged=False.
    """
    if grid < MIN_GRID:
        raise DomainError(f"grid must be >= {MIN_GRID} (got {grid})")

    def g(a1: float) -> float:
        return a1 - response_prob(p1, response_prob(p2, a1))

    nodes = np.arange(1, grid + 1) / grid
    values = np.array([g(a) for a in nodes])
    logger.debug(f"g scanned on {grid} nodes: min {values.min():.3e}, max {values.max():.3e}")

    roots: List[float] = []
    for k, (a, v) in enumerate(zip(nodes, values)):
        if abs(v) <= tol:
            roots.append(float(a))
        if k + 1 < len(nodes) and v * values[k + 1] < 0:
            lo, hi = float(a), float(nodes[k + 1])
            try:
                root = bisect(g, lo, hi, xtol=min(ROOT_XTOL, tol), maxiter=200)
            except (GameError, RuntimeError, ValueError) as e:
                logger.warning(f"Bisection failed on [{lo:.6g}, {hi:.6g}]: {e}")
                root = 0.5 * (lo + hi)
            roots.append(float(root))

    points: List[EquilibriumPoint] = [TRIVIAL_POINT]
    for root in sorted(roots):
        if any(abs(root - p.a1) < DEDUP_DISTANCE for p in points[1:]):
            continue
        point = _make_point(p1, p2, root)
        if not point.converged:
            logger.warning(f"⚠️  Fixed point near a1={root:.6g} did not converge: {point.message}")
        points.append(point)

    logger.info(f"Found {len(points) - 1} interior fixed point(s) on a {grid}-node grid")
    return points


def interior_points(points: List[EquilibriumPoint]) -> List[EquilibriumPoint]:
    return [p for p in points if not p.is_trivial]


def select_point(points: List[EquilibriumPoint], index: int = 0) -> EquilibriumPoint:
    """The index-th interior point, or the trivial point when there are none."""
    interior = interior_points(points)
    if not interior:
        return TRIVIAL_POINT
    if not 0 <= index < len(interior):
        raise DomainError(f"point index {index} out of range ({len(interior)} interior points)")
    return interior[index]


def response_curves(p1: PlayerModel, p2: PlayerModel, steps: int = 201) -> pd.DataFrame:
    """R_1 and R_2 over a grid of opponent probabilities; their crossings are the equilibria."""
    if steps < 2:
        raise DomainError(f"steps must be >= 2 (got {steps})")
    a = np.linspace(0.0, 1.0, steps)
    return pd.DataFrame(
        {
            "a": a,
            "r1": [response_prob(p1, v) for v in a],
            "r2": [response_prob(p2, v) for v in a],
        }
    )


# -------------------------
# PROFILES AND GAINS
# -------------------------
def build_profile(point: EquilibriumPoint, mode: str = "exact") -> StrategyProfile:
    """Exact mode: exact-BR to the opponent's probability. Threshold mode: cutoffs q1, q2."""
    if mode not in ("exact", "threshold"):
        raise DomainError(f"mode must be 'exact' or 'threshold' (got {mode})")
    if point.is_trivial:
        return StrategyProfile(PureFS(), PureFS())
    if mode == "exact":
        return StrategyProfile(ExactBestResponse(point.a2), ExactBestResponse(point.a1))
    return StrategyProfile(ThresholdRule(point.q1), ThresholdRule(point.q2))


def equilibrium_payoffs(point: EquilibriumPoint, x, y, player_index: int):
    """(equilibrium conditional payoff, pure-FS payoff) in bits; the trivial point plays FS."""
    a_opp = point.opponent_probability(player_index)
    fs = utility(Action.FS, Action.FS, x, y)
    if point.is_trivial:
        return fs, fs
    pi_fdm, pi_fs = conditional_payoffs(x, y, a_opp)
    return np.maximum(pi_fdm, pi_fs), fs


def conditional_gain_db(point: EquilibriumPoint, x, y, player_index: int):
    """10 log10 of the equilibrium conditional payoff over the pure-FS payoff."""
    eq, fs = equilibrium_payoffs(point, x, y, player_index)
    gain = 10.0 * np.log10(np.asarray(eq) / np.asarray(fs))
    return float(gain) if np.ndim(gain) == 0 else gain


# -------------------------
# EPSILON
# -------------------------
@dataclass(frozen=True)
class EpsilonEstimate:
    player: int
    a_hat: float           # opponent probability the equilibrium strategy responds to
    a_tilde: float         # opponent's actual FDM probability under its exact-BR strategy
    epsilon: float         # sample max of the deviation gain
    disagreement: float    # fraction of draws where deviating changes the action
    gap_bound: float       # sample max of |e(x, y, a_tilde) - e(x, y, a_hat)|
    samples: int

    def to_dict(self) -> dict:
        return {
            "player": self.player,
            "a_hat": self.a_hat,
            "a_tilde": self.a_tilde,
            "epsilon": self.epsilon,
            "disagreement": self.disagreement,
            "gap_bound": self.gap_bound,
            "samples": self.samples,
        }


def epsilon_estimate(
    point: EquilibriumPoint,
    p1: PlayerModel,
    p2: PlayerModel,
    sample_count: int = 100_000,
    seed: int = 42,
) -> List[EpsilonEstimate]:
    """
    Monte Carlo estimate of how much each player gains by deviating.

    For player i facing j: a_tilde_j is the probability that j's exact best
    response to a_hat_i plays FDM; the deviation gain at (x_i, y_i) is the
    payoff of the best response to a_tilde_j minus that of the equilibrium
    action (best response to a_hat_j), both evaluated at a_tilde_j.

    a_tilde_j uses the threshold rule as a control variate: its FDM
    probability R_j(a_hat_i) is known exactly, so only the sampled
    disagreement between the exact and threshold rules carries noise.
    """
    if sample_count < MIN_EPSILON_SAMPLES:
        raise DomainError(f"sample_count must be >= {MIN_EPSILON_SAMPLES} (got {sample_count})")

    players = {1: p1, 2: p2}
    own_prob = {1: point.a1, 2: point.a2}
    estimates: List[EpsilonEstimate] = []
    for i, j in ((1, 2), (2, 1)):
        rng = derive_stream(seed, STREAM_EPSILON, i)
        xj, yj = sample_pairs(players[j], rng, sample_count)
        exact_j = exact_fdm_mask(xj, yj, own_prob[i])
        threshold_j = threshold_fdm_mask(xj, yj, solve_q(own_prob[i]))
        correction = np.mean(exact_j.astype(float) - threshold_j.astype(float))
        a_tilde = float(np.clip(response_prob(players[j], own_prob[i]) + correction, 0.0, 1.0))
        a_hat = own_prob[j]

        xi, yi = sample_pairs(players[i], rng, sample_count)
        played = exact_fdm_mask(xi, yi, a_hat)
        best = exact_fdm_mask(xi, yi, a_tilde)
        pi_fdm, pi_fs = conditional_payoffs(xi, yi, a_tilde)
        gain = np.where(best, pi_fdm, pi_fs) - np.where(played, pi_fdm, pi_fs)
        bound = np.abs(np.asarray(payoff_gap(xi, yi, a_tilde)) - np.asarray(payoff_gap(xi, yi, a_hat)))

        est = EpsilonEstimate(
            player=i,
            a_hat=a_hat,
            a_tilde=a_tilde,
            epsilon=float(np.max(np.maximum(gain, 0.0))),
            disagreement=float(np.mean(best != played)),
            gap_bound=float(np.max(bound)),
            samples=sample_count,
        )
        logger.info(
            f"epsilon player {i}: {est.epsilon:.3e} bits "
            f"(a_hat={a_hat:.6f}, a_tilde={a_tilde:.6f}, disagreement={est.disagreement:.2e})"
        )
        estimates.append(est)
    return estimates
