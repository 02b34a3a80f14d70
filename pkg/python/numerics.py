"""
Numeric kernels used by the channel models.

- betainc_cf          : regularized incomplete beta I_x(a, b) by continued fraction
- integrate_half_line : adaptive quadrature over (0, inf) after mapping onto (0, 1)
"""

import logging
import math
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.special import gammaln

from errors import DomainError, NumericError

logger = logging.getLogger(__name__)

CF_MAX_ITER = 10_000
CF_EPS = 1.0e-15
CF_TINY = 1.0e-300


def _beta_cf(a: float, b: float, x: float) -> float:
    """Continued fraction for I_x(a, b), modified Lentz evaluation."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < CF_TINY:
        d = CF_TINY
    d = 1.0 / d
    h = d

    for m in range(1, CF_MAX_ITER + 1):
        m2 = 2 * m
        # even step
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < CF_TINY:
            d = CF_TINY
        c = 1.0 + aa / c
        if abs(c) < CF_TINY:
            c = CF_TINY
        d = 1.0 / d
        h *= d * c
        # odd step
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < CF_TINY:
            d = CF_TINY
        c = 1.0 + aa / c
        if abs(c) < CF_TINY:
            c = CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < CF_EPS:
            return h

    raise NumericError(
        f"Incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})"
    )


def betainc_cf(a: float, b: float, x: float) -> float:
    """
    Regularized incomplete beta function I_x(a, b).

    Uses the continued fraction directly when x < (a+1)/(a+b+2) and the
    symmetry I_x(a, b) = 1 - I_{1-x}(b, a) otherwise, so the fraction is
    always evaluated where it converges quickly.
    """
    if not (a > 0 and b > 0 and math.isfinite(a) and math.isfinite(b)):
        raise DomainError(f"Incomplete beta needs a, b > 0 (got a={a}, b={b})")
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"Incomplete beta needs 0 <= x <= 1 (got x={x})")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0

    log_front = (
        gammaln(a + b) - gammaln(a) - gammaln(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def integrate_half_line(
    f: Callable[[float], float],
    scale: float = 1.0,
    epsabs: float = 1.0e-8,
    limit: int = 100_000,
) -> float:
    """
    Integrate f over (0, inf) via x = scale * v / (1 - v), v in (0, 1).

    `scale` should be the natural size of the integrand's support (e.g. the
    mean of the integrating density) so the mapped integrand is not squeezed
    against either endpoint. Any quadrature warning is raised as NumericError.
    """
    if not (scale > 0 and math.isfinite(scale)):
        raise DomainError(f"Quadrature scale must be positive and finite (got {scale})")

    def mapped(v: float) -> float:
        if v >= 1.0:
            return 0.0
        one_minus = 1.0 - v
        x = scale * v / one_minus
        val = f(x) * scale / (one_minus * one_minus)
        return val if np.isfinite(val) else 0.0

    out = quad(mapped, 0.0, 1.0, epsabs=epsabs, limit=limit, full_output=1)
    if len(out) > 3:
        value, abserr, _, message = out[:4]
        raise NumericError(
            f"Quadrature failed (value={value:.3e}, abserr={abserr:.1e}): {message}"
        )
    value, abserr = out[0], out[1]
    logger.debug(f"quad on (0, inf): value={value:.12g} abserr={abserr:.1e}")
    return float(value)
