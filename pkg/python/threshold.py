"""
High-SNR indifference function t(z, a) and the ISR threshold q(a).

t(z, a) is the x -> inf limit of payoff_gap(x, z x, a):

    t(z, a) = 1/2 [ a (1 - log2(1 + 1/(2z))) + (1 - a) log2(1 - 1/(z + 1)^2) ]

(the (1 - a) part is log2(1 + 2/z) - 2 log2(1 + 1/z) collapsed into one
logarithm, which keeps it accurate for large z). t is strictly increasing in z,
tends to a/2 as z -> inf, and q(a) is its unique root: the ISR above which the
threshold rule picks FDM. q(0) is the +inf sentinel, q(1) = 1/2 exactly.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Tuple, Union

import numpy as np
import pandas as pd
from scipy.optimize import bisect

from errors import DomainError, NumericError
from payoff_core import check_probability, exact_fdm_mask, threshold_fdm_mask

logger = logging.getLogger(__name__)

Q_INFINITE = math.inf
Q_AT_FULL_FDM = 0.5

BRACKET_LOW = 0.5 + 1e-12
BRACKET_HIGH = 4.0
BRACKET_CAP = 1e12
Q_XTOL = 5e-11
Q_RTOL = 5e-11
DERIVATIVE_STEP = 1e-6
Q_RESIDUAL_TOL = 1e-9

LN2 = math.log(2.0)


def _t_scalar(z: float, a: float) -> float:
    return 0.5 * (
        a * (1.0 - math.log1p(1.0 / (2.0 * z)) / LN2)
        + (1.0 - a) * math.log1p(-1.0 / ((z + 1.0) ** 2)) / LN2
    )


def indifference(z: Union[float, np.ndarray], a: Union[float, np.ndarray]):
    """t(z, a): limiting FDM-minus-FS payoff at ISR z against opponent FDM probability a."""
    a_arr = check_probability(a)
    z_arr = np.asarray(z, dtype=float)
    if np.any(~(z_arr > 0)):
        raise DomainError("ISR z must be > 0")
    if z_arr.ndim == 0 and a_arr.ndim == 0:
        return _t_scalar(float(z_arr), float(a_arr))
    return 0.5 * (
        a_arr * (1.0 - np.log1p(1.0 / (2.0 * z_arr)) / LN2)
        + (1.0 - a_arr) * np.log1p(-1.0 / (z_arr + 1.0) ** 2) / LN2
    )


@lru_cache(maxsize=65536)
def _solve_q_cached(a: float) -> float:
    if a == 0.0:
        return Q_INFINITE
    if a == 1.0 or _t_scalar(BRACKET_LOW, a) >= 0.0:
        return Q_AT_FULL_FDM

    high = BRACKET_HIGH
    while _t_scalar(high, a) < 0.0:
        high *= 2.0
        if high > BRACKET_CAP:
            logger.debug(f"q({a:.3e}): no sign change below {BRACKET_CAP:.0e}, returning inf")
            return Q_INFINITE

    try:
        root = bisect(_t_scalar, BRACKET_LOW, high, args=(a,), xtol=Q_XTOL, rtol=Q_RTOL, maxiter=500)
    except RuntimeError as e:
        raise NumericError(f"q({a}) bisection failed: {e}") from e
    logger.debug(f"q({a:.6g}) = {root:.12g} (bracket high {high:g})")
    return float(root)


def solve_q(a: float) -> float:
    """
    Unique root of t(., a) on (1/2, inf).

    The bracket starts at [1/2 + 1e-12, 4] and doubles its upper end until the
    sign changes; past 1e12 the inf sentinel is returned. Bisection gives the
    root to 1e-10 absolute (relative once q > 1).
    """
    check_probability(a)
    return _solve_q_cached(float(a))


def threshold_residual(q: float, a: float) -> float:
    """|t(q, a)| for a finite threshold; the inf sentinel has no root to check and scores 0."""
    if math.isinf(q):
        return 0.0
    return abs(_t_scalar(q, a))


def solve_q_residual(a: float) -> float:
    """How far t(q(a), a) is from zero."""
    return threshold_residual(solve_q(a), float(a))


def q_derivative(a: float) -> float:
    """q'(a) = -(dt/da) / (dt/dz) at (q(a), a), partials by central differences."""
    if not 0.0 < a < 1.0:
        raise DomainError(f"q_derivative needs a in (0, 1) (got {a})")
    q = solve_q(a)
    if math.isinf(q):
        raise DomainError(f"q({a}) is the infinite sentinel; no derivative")

    h = DERIVATIVE_STEP
    dt_dz = (_t_scalar(q + h, a) - _t_scalar(q - h, a)) / (2.0 * h)
    a_lo, a_hi = max(a - h, 0.0), min(a + h, 1.0)
    dt_da = (_t_scalar(q, a_hi) - _t_scalar(q, a_lo)) / (a_hi - a_lo)
    if dt_dz <= 0.0:
        raise NumericError(f"dt/dz is not positive at q({a}) = {q}")
    return -dt_da / dt_dz


@dataclass(frozen=True)
class ThresholdCurve:
    """(a, q(a)) nodes; a strictly increasing, q non-increasing, |t(q, a)| <= Q_RESIDUAL_TOL for finite q."""

    grid: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        a_vals = [a for a, _ in self.grid]
        q_vals = [q for _, q in self.grid]
        if any(a1 <= a0 for a0, a1 in zip(a_vals, a_vals[1:])):
            raise DomainError("ThresholdCurve nodes must have strictly increasing a")
        if any(q1 > q0 for q0, q1 in zip(q_vals, q_vals[1:])):
            raise NumericError("ThresholdCurve q values must be non-increasing in a")
        for a, q in self.grid:
            residual = threshold_residual(q, a)
            if residual > Q_RESIDUAL_TOL:
                raise NumericError(f"ThresholdCurve node a={a}: |t(q, a)| = {residual:.3e} exceeds {Q_RESIDUAL_TOL:g}")

    @property
    def residuals(self) -> Tuple[float, ...]:
        return tuple(threshold_residual(q, a) for a, q in self.grid)

    def to_frame(self) -> pd.DataFrame:
        df = pd.DataFrame(list(self.grid), columns=["a", "q"])
        df["residual"] = self.residuals
        return df


def tabulate(a_min: float, a_max: float, steps: int) -> ThresholdCurve:
    """q(a) on an evenly spaced grid; equal endpoints collapse to one node."""
    if not (0.0 < a_min <= a_max <= 1.0):
        raise DomainError(f"tabulate needs 0 < a_min <= a_max <= 1 (got {a_min}, {a_max})")
    if steps < 1:
        raise DomainError(f"steps must be >= 1 (got {steps})")
    if a_min == a_max:
        nodes: Iterable[float] = [a_min]
    elif steps == 1:
        raise DomainError("a single step needs a_min == a_max")
    else:
        nodes = np.linspace(a_min, a_max, steps)
    return ThresholdCurve(tuple((float(a), solve_q(float(a))) for a in nodes))


def approximation_map(a: float, snr_grid: Iterable[float], isr_grid: Iterable[float]) -> pd.DataFrame:
    """
    Exact vs threshold best response over an (SNR, ISR) grid.

    Shows where the ISR threshold rule reproduces the exact rule at moderate
    SNR, where the high-SNR argument does not apply.
    """
    q = solve_q(a)
    snr, isr = np.meshgrid(np.asarray(list(snr_grid), dtype=float), np.asarray(list(isr_grid), dtype=float), indexing="ij")
    snr, isr = snr.ravel(), isr.ravel()
    inr = isr * snr
    exact = exact_fdm_mask(snr, inr, a)
    approx = threshold_fdm_mask(snr, inr, q)
    table = pd.DataFrame(
        {
            "snr": snr,
            "isr": isr,
            "exact_fdm": exact,
            "threshold_fdm": approx,
            "agree": exact == approx,
        }
    )
    logger.info(f"approximation map at a={a}: q={q:.6g}, agreement {table['agree'].mean():.4f}")
    return table
