"""
One-shot payoffs of the two-player interference game and the best-response rules.

All rates are in bits per channel use (log base 2). x is the SNR and y the INR,
both linear. Functions accept floats or numpy arrays (broadcast elementwise);
the scalar best-response rules return an Action, the *_mask forms return
boolean arrays where True means FDM.

Payoff table (row player's utility):

                 other FDM                          other FS
    own FDM   1/2 log(1 + x)                    1/2 log(1 + x / (1 + y/2))
    own FS    1/2 log(1 + x/2)                  log(1 + (x/2) / (1 + y/2))
              + 1/2 log(1 + (x/2) / (1 + y))
"""

from enum import Enum
from typing import Dict, Tuple, Union

import numpy as np

from errors import DomainError

ArrayLike = Union[float, np.ndarray]

ISR_DOMINANCE = 0.5   # FS strictly dominates when y/x <= 1/2


class Action(str, Enum):
    FDM = "FDM"   # theta = 1: own pre-assigned half band
    FS = "FS"     # theta = 1/2: full spread over the whole band

    @property
    def theta(self) -> float:
        return 1.0 if self is Action.FDM else 0.5

    @classmethod
    def from_fdm(cls, fdm: bool) -> "Action":
        return cls.FDM if fdm else cls.FS


# -------------------------
# DOMAIN CHECKS
# -------------------------
def _check_snr(x: ArrayLike) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)) or np.any(x <= 0):
        raise DomainError("SNR x must be finite and > 0")
    return x


def _check_inr(y: ArrayLike) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if np.any(~np.isfinite(y)) or np.any(y < 0):
        raise DomainError("INR y must be finite and >= 0")
    return y


def check_probability(a: ArrayLike, name: str = "a") -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if np.any(~np.isfinite(a)) or np.any(a < 0) or np.any(a > 1):
        raise DomainError(f"{name} must be a probability in [0, 1]")
    return a


def _out(v: np.ndarray) -> ArrayLike:
    return float(v) if np.ndim(v) == 0 else v


# -------------------------
# TABLE 1
# -------------------------
def _cells(x: np.ndarray, y: np.ndarray) -> Dict[Tuple[Action, Action], np.ndarray]:
    half_x = x / 2.0
    return {
        (Action.FDM, Action.FDM): 0.5 * np.log2(1.0 + x),
        (Action.FDM, Action.FS): 0.5 * np.log2(1.0 + x / (1.0 + y / 2.0)),
        (Action.FS, Action.FDM): 0.5 * np.log2(1.0 + half_x) + 0.5 * np.log2(1.0 + half_x / (1.0 + y)),
        (Action.FS, Action.FS): np.log2(1.0 + half_x / (1.0 + y / 2.0)),
    }


def utility_cells(x: ArrayLike, y: ArrayLike) -> Dict[Tuple[Action, Action], np.ndarray]:
    """All four payoff cells at once, keyed by (own, other)."""
    return _cells(_check_snr(x), _check_inr(y))


def utility(own: Action, other: Action, x: ArrayLike, y: ArrayLike) -> ArrayLike:
    """Rate of a player choosing `own` while the opponent chooses `other`."""
    own, other = Action(own), Action(other)
    return _out(utility_cells(x, y)[(own, other)])


def realized_utility(own_fdm: np.ndarray, other_fdm: np.ndarray, x: ArrayLike, y: ArrayLike) -> np.ndarray:
    """Per-draw utility for boolean action arrays (True = FDM)."""
    cells = utility_cells(x, y)
    own_fdm = np.asarray(own_fdm, dtype=bool)
    other_fdm = np.asarray(other_fdm, dtype=bool)
    return np.where(
        own_fdm,
        np.where(other_fdm, cells[(Action.FDM, Action.FDM)], cells[(Action.FDM, Action.FS)]),
        np.where(other_fdm, cells[(Action.FS, Action.FDM)], cells[(Action.FS, Action.FS)]),
    )


# -------------------------
# CONDITIONAL EXPECTED PAYOFFS
# -------------------------
def conditional_payoffs(x: ArrayLike, y: ArrayLike, a_other: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
    """(pi_FDM, pi_FS) when the opponent plays FDM with probability a_other."""
    a = check_probability(a_other, "a_other")
    cells = utility_cells(x, y)
    pi_fdm = a * cells[(Action.FDM, Action.FDM)] + (1.0 - a) * cells[(Action.FDM, Action.FS)]
    pi_fs = a * cells[(Action.FS, Action.FDM)] + (1.0 - a) * cells[(Action.FS, Action.FS)]
    return _out(pi_fdm), _out(pi_fs)


def expected_payoff(own: Action, a_other: ArrayLike, x: ArrayLike, y: ArrayLike) -> ArrayLike:
    pi_fdm, pi_fs = conditional_payoffs(x, y, a_other)
    return pi_fdm if Action(own) is Action.FDM else pi_fs


def payoff_gap(x: ArrayLike, y: ArrayLike, a: ArrayLike) -> ArrayLike:
    """
    e(x, y, a) = pi_FDM - pi_FS, built from the payoff table cells.

    Affine in a: e = a * (FDM,FDM - FS,FDM) + (1 - a) * (FDM,FS - FS,FS).
    """
    a = check_probability(a)
    cells = utility_cells(x, y)
    vs_fdm = cells[(Action.FDM, Action.FDM)] - cells[(Action.FS, Action.FDM)]
    vs_fs = cells[(Action.FDM, Action.FS)] - cells[(Action.FS, Action.FS)]
    return _out(a * vs_fdm + (1.0 - a) * vs_fs)


def approx_payoff_gap(x: ArrayLike, y: ArrayLike, a: ArrayLike) -> ArrayLike:
    """
    High-SNR surrogate of payoff_gap: 1 + x replaced by x and 1 + y by y.

    Every term of the a-weighted bracket carries the factor a/2, so that
    approx_payoff_gap(x, z x, a) equals the limit t(z, a) for every x.
    """
    a = check_probability(a)
    x = _check_snr(x)
    y = _check_inr(y)
    if np.any(y == 0):
        raise DomainError("approx_payoff_gap is undefined at y = 0")
    ratio = x / y
    gap = (
        (a / 2.0) * np.log2(x)
        - (a / 2.0) * np.log2(x / 2.0)
        - (a / 2.0) * np.log2(1.0 + ratio / 2.0)
        - (1.0 - a) * np.log2(1.0 + ratio)
        + ((1.0 - a) / 2.0) * np.log2(1.0 + 2.0 * ratio)
    )
    return _out(gap)


# -------------------------
# BEST RESPONSES
# -------------------------
def exact_fdm_mask(x: ArrayLike, y: ArrayLike, a_other: ArrayLike) -> np.ndarray:
    """FDM iff e(x, y, a) > 0 and y/x > 1/2; ties go to FS."""
    x = _check_snr(x)
    y = _check_inr(y)
    gap = np.asarray(payoff_gap(x, y, a_other))
    return (gap > 0) & (y / x > ISR_DOMINANCE)


def threshold_fdm_mask(x: ArrayLike, y: ArrayLike, isr_cutoff: float) -> np.ndarray:
    """FDM iff y/x > cutoff; an infinite cutoff always yields FS."""
    x = _check_snr(x)
    y = _check_inr(y)
    if np.isnan(isr_cutoff) or isr_cutoff <= 0:
        raise DomainError(f"ISR cutoff must be positive or inf (got {isr_cutoff})")
    if np.isinf(isr_cutoff):
        return np.zeros(np.broadcast(x, y).shape, dtype=bool)
    return y / x > isr_cutoff


def exact_best_response(x: float, y: float, a_other: float) -> Action:
    return Action.from_fdm(bool(exact_fdm_mask(x, y, a_other)))


def threshold_best_response(x: float, y: float, isr_cutoff: float) -> Action:
    return Action.from_fdm(bool(threshold_fdm_mask(x, y, isr_cutoff)))
