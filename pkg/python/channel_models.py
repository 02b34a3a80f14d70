"""
Squared channel-gain laws, samplers and the induced ISR distribution.

A GainDistribution describes |H|^2 with a given mean (linear):
  - rayleigh           : exponential
  - nakagami (m >= .5) : gamma with shape m, scale mean / m
  - rician (K >= 0)    : |LOS + CN(0, mean/(K+1))|^2 with LOS power K/(K+1) * mean
                         (scaled noncentral chi-square, 2 degrees of freedom)

A PlayerModel pairs its direct link (SNR X) and cross link (INR Y) with a
power scale p/sigma^2. The ISR Z = Y/X does not depend on the power scale.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple, Union

import numpy as np
from scipy import special, stats

from errors import DomainError
from numerics import betainc_cf, integrate_half_line

logger = logging.getLogger(__name__)

RAYLEIGH = "rayleigh"
NAKAGAMI = "nakagami"
RICIAN = "rician"
MODELS = (RAYLEIGH, NAKAGAMI, RICIAN)

NAKAGAMI_MIN_M = 0.5
RICIAN_MAX_K = 1e3
CDF_EPSABS = 1e-8
PDF_EPSABS = 1e-10


@dataclass(frozen=True)
class GainDistribution:
    model: str
    mean: float
    shape: Optional[float] = None   # m for nakagami, K for rician

    def __post_init__(self):
        if self.model not in MODELS:
            raise DomainError(f"Unknown fading model '{self.model}' (expected one of {MODELS})")
        if not (math.isfinite(self.mean) and self.mean > 0):
            raise DomainError(f"Gain mean must be positive and finite (got {self.mean})")
        if self.model == RAYLEIGH and self.shape is not None:
            raise DomainError("rayleigh takes no shape parameter")
        if self.model == NAKAGAMI and not (self.shape is not None and NAKAGAMI_MIN_M <= self.shape < math.inf):
            raise DomainError(f"nakagami needs m >= {NAKAGAMI_MIN_M} (got {self.shape})")
        if self.model == RICIAN and not (self.shape is not None and 0.0 <= self.shape <= RICIAN_MAX_K):
            raise DomainError(f"rician needs 0 <= K <= {RICIAN_MAX_K:g} (got {self.shape})")

    @classmethod
    def rayleigh(cls, mean: float = 1.0) -> "GainDistribution":
        return cls(RAYLEIGH, mean)

    @classmethod
    def nakagami(cls, m: float, mean: float = 1.0) -> "GainDistribution":
        return cls(NAKAGAMI, mean, m)

    @classmethod
    def rician(cls, k: float, mean: float = 1.0) -> "GainDistribution":
        return cls(RICIAN, mean, k)

    @property
    def gamma_shape(self) -> Optional[float]:
        """Gamma shape of the squared gain when it has one (rayleigh is m = 1)."""
        if self.model == RAYLEIGH:
            return 1.0
        if self.model == NAKAGAMI:
            return float(self.shape)
        return None

    def scaled(self, factor: float) -> "GainDistribution":
        return replace(self, mean=self.mean * factor)

    def _rician_scale(self) -> Tuple[float, float]:
        k = float(self.shape)
        return self.mean / (2.0 * (k + 1.0)), 2.0 * k

    def cdf(self, x):
        """P(|H|^2 <= x); scipy.special ufuncs, so scalars stay cheap inside quadrature."""
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        if self.model == NAKAGAMI:
            out = special.gammainc(self.shape, self.shape * x / self.mean)
        elif self.model == RICIAN and self.shape > 0:
            scale, nc = self._rician_scale()
            out = special.chndtr(x / scale, 2.0, nc)
        else:
            out = -np.expm1(-x / self.mean)
        return float(out) if np.ndim(out) == 0 else out

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if self.model == NAKAGAMI:
                m = self.shape
                rate = m / self.mean
                log_pdf = m * np.log(rate) + special.xlogy(m - 1.0, x) - rate * x - special.gammaln(m)
                out = np.where(x >= 0, np.exp(log_pdf), 0.0)
            elif self.model == RICIAN and self.shape > 0:
                scale, nc = self._rician_scale()
                u = np.maximum(x / scale, 0.0)
                root = np.sqrt(nc * u)
                out = np.where(x >= 0, 0.5 * np.exp(root - 0.5 * (u + nc)) * special.i0e(root) / scale, 0.0)
            else:
                out = np.where(x >= 0, np.exp(-x / self.mean) / self.mean, 0.0)
        return float(out) if np.ndim(out) == 0 else out


def sample_gain(dist: GainDistribution, rng: np.random.Generator, size=None) -> Union[float, np.ndarray]:
    """Draw squared gains from `dist` using the caller's stream."""
    if dist.model == RAYLEIGH:
        out = rng.exponential(dist.mean, size)
    elif dist.model == NAKAGAMI:
        out = rng.gamma(dist.shape, dist.mean / dist.shape, size)
    else:
        k = float(dist.shape)
        los = math.sqrt(k / (k + 1.0) * dist.mean)
        sigma = math.sqrt(dist.mean / (k + 1.0) / 2.0)
        re = los + sigma * rng.standard_normal(size)
        im = sigma * rng.standard_normal(size)
        out = re * re + im * im
    return float(out) if size is None else out


@dataclass(frozen=True)
class PlayerModel:
    direct: GainDistribution
    cross: GainDistribution
    power_scale: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.power_scale) and self.power_scale > 0):
            raise DomainError(f"power_scale must be positive and finite (got {self.power_scale})")

    @property
    def isr_bar(self) -> float:
        """E[Y] / E[X]."""
        return self.cross.mean / self.direct.mean

    def snr_law(self) -> GainDistribution:
        return self.direct.scaled(self.power_scale)

    def inr_law(self) -> GainDistribution:
        return self.cross.scaled(self.power_scale)

    def with_power_scale(self, power_scale: float) -> "PlayerModel":
        return replace(self, power_scale=power_scale)


def sample_pairs(player: PlayerModel, rng: np.random.Generator, size: int) -> Tuple[np.ndarray, np.ndarray]:
    """(SNR, INR) draws for one player; direct link drawn first."""
    x = sample_gain(player.snr_law(), rng, size)
    y = sample_gain(player.inr_law(), rng, size)
    return x, y


# -------------------------
# ISR DISTRIBUTION
# -------------------------
def _is_gamma_pair(player: PlayerModel) -> bool:
    return player.direct.gamma_shape is not None and player.cross.gamma_shape is not None


def _isr_cdf_beta(player: PlayerModel, z: float) -> float:
    m1 = player.direct.gamma_shape
    m2 = player.cross.gamma_shape
    u = m2 * z / (m2 * z + m1 * player.isr_bar)
    return betainc_cf(m2, m1, u)


def _isr_cdf_quadrature(player: PlayerModel, z: float) -> float:
    value = integrate_half_line(
        lambda x: player.cross.cdf(z * x) * player.direct.pdf(x),
        scale=player.direct.mean,
        epsabs=CDF_EPSABS,
    )
    return min(max(value, 0.0), 1.0)


def _check_z(z, strict: bool) -> float:
    z = float(z)
    if math.isnan(z) or z < 0 or (strict and z == 0):
        raise DomainError(f"ISR must be {'> 0' if strict else '>= 0'} (got {z})")
    return z


def isr_cdf(player: PlayerModel, z: float, method: str = "auto") -> float:
    """
    F_Z(z) for Z = Y/X.

    Gamma-type pairs (rayleigh/nakagami on both links) use the closed form
    I_u(m2, m1) with u = m2 z / (m2 z + m1 ISRbar); any pair with a rician
    link integrates F_Y(z x) f_X(x) over x. `method` forces either path.
    """
    z = _check_z(z, strict=False)
    if z == 0.0:
        return 0.0
    if math.isinf(z):
        return 1.0
    if method not in ("auto", "beta", "quadrature"):
        raise DomainError(f"Unknown isr_cdf method '{method}'")
    if method == "beta" and not _is_gamma_pair(player):
        raise DomainError("The incomplete-beta path needs rayleigh/nakagami links on both sides")
    if method == "quadrature" or (method == "auto" and not _is_gamma_pair(player)):
        return _isr_cdf_quadrature(player, z)
    return _isr_cdf_beta(player, z)


def isr_pdf(player: PlayerModel, z: float) -> float:
    """f_Z(z): closed form for gamma-type pairs, otherwise the integral of x f_Y(z x) f_X(x)."""
    z = _check_z(z, strict=True)
    if _is_gamma_pair(player):
        m1 = player.direct.gamma_shape
        m2 = player.cross.gamma_shape
        isr_bar = player.isr_bar
        log_norm = (
            m1 * math.log(isr_bar) + m1 * math.log(m1) + m2 * math.log(m2)
            + math.lgamma(m1 + m2) - math.lgamma(m1) - math.lgamma(m2)
        )
        return math.exp(
            log_norm + (m2 - 1.0) * math.log(z) - (m1 + m2) * math.log(m2 * z + isr_bar * m1)
        )
    return integrate_half_line(
        lambda x: x * player.cross.pdf(z * x) * player.direct.pdf(x),
        scale=player.direct.mean,
        epsabs=PDF_EPSABS,
    )


def tail_condition(player: PlayerModel) -> bool:
    """
    Whether f_Z(b) b^2 log(b) -> inf, which guarantees an interior equilibrium.

    Only the direct link decides it: the ISR tail behaves like b^-(1 + m1) for
    nakagami, and like b^-2 whenever the direct squared gain has positive
    density at 0 (rayleigh, rician).
    """
    if player.direct.model == NAKAGAMI:
        return float(player.direct.shape) <= 1.0
    return True


def _isr_cdf_beta_vec(player: PlayerModel, z: np.ndarray) -> np.ndarray:
    m1 = player.direct.gamma_shape
    m2 = player.cross.gamma_shape
    z = np.asarray(z, dtype=float)
    return special.betainc(m2, m1, m2 * z / (m2 * z + m1 * player.isr_bar))


def ks_distance(player: PlayerModel, samples_z: np.ndarray, quantile_count: int = 1000) -> float:
    """
    sup |empirical F_Z - F_Z|.

    Gamma-type pairs get the exact statistic over every order statistic.
    Other pairs evaluate F_Z at `quantile_count` empirical quantiles and return
    an upper bound: between neighbouring nodes both CDFs are monotone, so
    the gap there is capped by the values at the two ends.
    """
    ordered = np.sort(np.asarray(samples_z, dtype=float))
    n = ordered.size
    if n == 0:
        raise DomainError("ks_distance needs at least one sample")
    if _is_gamma_pair(player):
        return float(stats.kstest(ordered, lambda z: _isr_cdf_beta_vec(player, z)).statistic)

    nodes = np.quantile(ordered, (np.arange(quantile_count) + 0.5) / quantile_count)
    analytic = np.array([isr_cdf(player, z) for z in nodes])
    at = np.searchsorted(ordered, nodes, side="right") / n
    below = np.searchsorted(ordered, nodes, side="left") / n
    f = np.concatenate(([0.0], analytic, [1.0]))
    f_at = np.concatenate(([0.0], at, [1.0]))
    f_below = np.concatenate(([0.0], below, [1.0]))
    between = np.maximum(f_below[1:] - f[:-1], f[1:] - f_at[:-1])
    on_nodes = np.maximum(np.abs(at - analytic), np.abs(below - analytic))
    return float(max(on_nodes.max(), between.max()))


# -------------------------
# STREAMS
# -------------------------
STREAM_TRIALS = 0
STREAM_EPSILON = 1
STREAM_DISAGREEMENT = 2
STREAM_CHECKS = 3


def derive_stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for (seed, key...); same inputs, same stream, whatever the thread layout."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key)))
