import math

import numpy as np
import pytest
from scipy import stats

from channel_models import (
    STREAM_CHECKS,
    GainDistribution,
    PlayerModel,
    derive_stream,
    isr_cdf,
    isr_pdf,
    ks_distance,
    sample_gain,
    sample_pairs,
    tail_condition,
)
from errors import DomainError
from numerics import integrate_half_line


def nakagami_pair(m1: float, m2: float, isr_bar: float = 1.0) -> PlayerModel:
    return PlayerModel(GainDistribution.nakagami(m1, 1.0), GainDistribution.nakagami(m2, isr_bar))


def rician_pair(k: float, isr_bar: float = 1.0) -> PlayerModel:
    return PlayerModel(GainDistribution.rician(k, 1.0), GainDistribution.rician(k, isr_bar))


# -------------------------
# GAIN LAWS
# -------------------------
@pytest.mark.parametrize(
    "model, mean, shape",
    [("rayleigh", 0.0, None), ("rayleigh", 1.0, 2.0), ("nakagami", 1.0, 0.4), ("nakagami", 1.0, None),
     ("rician", 1.0, -1.0), ("rician", 1.0, 1e4), ("lognormal", 1.0, None), ("rayleigh", math.inf, None)],
)
def test_gain_distribution_validation(model, mean, shape):
    with pytest.raises(DomainError):
        GainDistribution(model, mean, shape)


def test_nakagami_law_matches_gamma():
    dist = GainDistribution.nakagami(2.5, 3.0)
    ref = stats.gamma(2.5, scale=3.0 / 2.5)
    x = np.linspace(0.01, 15.0, 50)
    assert np.allclose(dist.cdf(x), ref.cdf(x), atol=1e-12)
    assert np.allclose(dist.pdf(x), ref.pdf(x), rtol=1e-10)


def test_rician_law_matches_scaled_ncx2():
    k, mean = 3.0, 2.0
    dist = GainDistribution.rician(k, mean)
    ref = stats.ncx2(2, 2 * k, scale=mean / (2 * (k + 1)))
    x = np.linspace(0.01, 12.0, 50)
    assert np.allclose(dist.cdf(x), ref.cdf(x), atol=1e-10)
    assert np.allclose(dist.pdf(x), ref.pdf(x), rtol=1e-8)


def test_rician_without_los_is_rayleigh():
    x = np.linspace(0.0, 5.0, 20)
    assert np.allclose(GainDistribution.rician(0.0, 1.5).cdf(x), GainDistribution.rayleigh(1.5).cdf(x))
    assert np.allclose(GainDistribution.rician(0.0, 1.5).pdf(x), GainDistribution.rayleigh(1.5).pdf(x))


@pytest.mark.parametrize(
    "dist",
    [GainDistribution.rayleigh(2.0), GainDistribution.nakagami(0.5, 2.0), GainDistribution.nakagami(3.0, 2.0),
     GainDistribution.rician(5.0, 2.0)],
)
def test_sample_mean_matches_law(dist):
    rng = derive_stream(1, STREAM_CHECKS, 0)
    draws = sample_gain(dist, rng, 200_000)
    assert draws.mean() == pytest.approx(dist.mean, rel=0.02)
    assert np.all(draws >= 0)


@pytest.mark.parametrize(
    "dist",
    [GainDistribution.rayleigh(2.0), GainDistribution.nakagami(1.5, 1.0), GainDistribution.nakagami(3.0, 0.5),
     GainDistribution.rician(3.0, 1.0), GainDistribution.rician(10.0, 2.0)],
)
def test_gain_pdf_integrates_to_one(dist):
    assert integrate_half_line(dist.pdf, scale=dist.mean) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize(
    "dist, seed",
    [(GainDistribution.nakagami(1.0, 1.0), 0), (GainDistribution.rician(0.0, 1.0), 1)],
    ids=["nakagami-m1", "rician-k0"],
)
def test_sampler_reduces_to_rayleigh(dist, seed):
    draws = sample_gain(dist, derive_stream(77, STREAM_CHECKS, seed), 1_000_000)
    assert stats.kstest(draws, GainDistribution.rayleigh(1.0).cdf).statistic < 0.005


def test_scalar_draw():
    assert isinstance(sample_gain(GainDistribution.rayleigh(), derive_stream(0, 0)), float)


# -------------------------
# PLAYER MODEL
# -------------------------
def test_player_model_scaling():
    p = PlayerModel(GainDistribution.rayleigh(2.0), GainDistribution.rayleigh(0.5), 100.0)
    assert p.isr_bar == pytest.approx(0.25)
    assert p.snr_law().mean == pytest.approx(200.0)
    assert p.inr_law().mean == pytest.approx(50.0)
    assert p.with_power_scale(1.0).snr_law().mean == pytest.approx(2.0)
    with pytest.raises(DomainError):
        p.with_power_scale(0.0)


def test_sample_pairs_shapes():
    p = PlayerModel(GainDistribution.rayleigh(), GainDistribution.rayleigh(), 10.0)
    x, y = sample_pairs(p, derive_stream(3, STREAM_CHECKS, 1), 1000)
    assert x.shape == y.shape == (1000,)


# -------------------------
# ISR LAW
# -------------------------
@pytest.mark.parametrize("isr_bar", [0.25, 1.0, 4.0])
def test_rayleigh_isr_cdf_closed_form(isr_bar):
    p = PlayerModel(GainDistribution.rayleigh(1.0), GainDistribution.rayleigh(isr_bar))
    for z in (0.1, 0.5, 1.0, 3.0, 20.0):
        assert isr_cdf(p, z) == pytest.approx(z / (z + isr_bar), abs=1e-12)


def test_symmetric_rayleigh_median_is_one():
    p = PlayerModel(GainDistribution.rayleigh(), GainDistribution.rayleigh())
    assert isr_cdf(p, 1.0) == pytest.approx(0.5, abs=1e-12)


def test_isr_cdf_endpoints_and_domain():
    p = nakagami_pair(0.5, 2.0)
    assert isr_cdf(p, 0.0) == 0.0
    assert isr_cdf(p, math.inf) == 1.0
    with pytest.raises(DomainError):
        isr_cdf(p, -1.0)
    with pytest.raises(DomainError):
        isr_cdf(p, 1.0, method="simpson")
    with pytest.raises(DomainError):
        isr_cdf(rician_pair(3.0), 1.0, method="beta")


def test_isr_cdf_monotone():
    for p in (nakagami_pair(0.7, 1.5, 0.5), rician_pair(2.0, 2.0)):
        values = [isr_cdf(p, z) for z in np.logspace(-2, 2, 30)]
        assert all(b >= a for a, b in zip(values, values[1:]))
        assert 0.0 <= values[0] and values[-1] <= 1.0


def test_isr_law_ignores_power_scale():
    p = nakagami_pair(0.8, 1.2, 0.5)
    assert isr_cdf(p.with_power_scale(1e6), 0.9) == pytest.approx(isr_cdf(p, 0.9), abs=1e-12)


@pytest.mark.parametrize("m1, m2", [(0.5, 2.0), (1.5, 0.7), (1.0, 1.0), (3.0, 3.0)])
def test_beta_and_quadrature_paths_agree(m1, m2):
    p = nakagami_pair(m1, m2, 0.8)
    for z in (0.3, 1.0, 3.0):
        assert isr_cdf(p, z, method="beta") == pytest.approx(isr_cdf(p, z, method="quadrature"), abs=1e-6)


@pytest.mark.parametrize("player", [nakagami_pair(0.5, 2.0), nakagami_pair(2.0, 1.0, 0.3), rician_pair(3.0)])
def test_isr_pdf_is_cdf_derivative(player):
    h = 1e-3
    for z in (0.4, 1.0, 2.5):
        numeric = (isr_cdf(player, z + h) - isr_cdf(player, z - h)) / (2 * h)
        assert isr_pdf(player, z) == pytest.approx(numeric, rel=1e-3, abs=1e-6)


def test_isr_pdf_domain():
    with pytest.raises(DomainError):
        isr_pdf(nakagami_pair(1.0, 1.0), 0.0)


@pytest.mark.slow
@pytest.mark.parametrize(
    "player",
    [
        PlayerModel(GainDistribution.rayleigh(), GainDistribution.rayleigh()),
        nakagami_pair(0.5, 2.0),
        rician_pair(3.0),
    ],
)
def test_isr_cdf_matches_sampled_ratio(player):
    rng = derive_stream(2024, STREAM_CHECKS, 7)
    x, y = sample_pairs(player, rng, 1_000_000)
    assert ks_distance(player, y / x) < 0.005


def test_isr_tail_reaches_one():
    assert isr_cdf(nakagami_pair(1.0, 1.0), 1e6) > 1 - 1e-3
    assert isr_cdf(nakagami_pair(0.5, 1.0), 1e6) > 0.99


# -------------------------
# TAIL CONDITION AND STREAMS
# -------------------------
def test_tail_condition():
    assert tail_condition(nakagami_pair(0.5, 2.0))
    assert tail_condition(nakagami_pair(1.0, 2.0))
    assert not tail_condition(nakagami_pair(1.5, 0.5))
    assert tail_condition(rician_pair(3.0))
    assert tail_condition(PlayerModel(GainDistribution.rayleigh(), GainDistribution.nakagami(4.0)))


def test_derive_stream_is_reproducible():
    a = derive_stream(42, 0, 5).standard_normal(10)
    b = derive_stream(42, 0, 5).standard_normal(10)
    c = derive_stream(42, 0, 6).standard_normal(10)
    d = derive_stream(43, 0, 5).standard_normal(10)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)


@pytest.mark.parametrize(
    "player",
    [PlayerModel(GainDistribution.rayleigh(), GainDistribution.rayleigh(0.5)), nakagami_pair(1.5, 2.0, 0.8)],
)
def test_isr_pdf_integrates_to_one(player):
    total = integrate_half_line(lambda z: isr_pdf(player, z), scale=player.isr_bar)
    assert total == pytest.approx(1.0, abs=1e-6)


def test_ks_distance_exact_for_gamma_pairs():
    player = PlayerModel(GainDistribution.rayleigh(), GainDistribution.rayleigh(2.0))
    x, y = sample_pairs(player, derive_stream(8, STREAM_CHECKS, 2), 20_000)
    reference = stats.kstest(y / x, lambda z: z / (z + 2.0)).statistic
    assert ks_distance(player, y / x) == pytest.approx(reference, abs=1e-9)


def test_ks_distance_bounds_the_sup_between_quantiles():
    # rician with K = 0 is rayleigh, so the exact statistic is known in closed form
    player = rician_pair(0.0)
    x, y = sample_pairs(player, derive_stream(8, STREAM_CHECKS, 3), 20_000)
    exact = stats.kstest(y / x, lambda z: z / (z + 1.0)).statistic
    bound = ks_distance(player, y / x, quantile_count=200)
    assert exact - 1e-6 <= bound <= exact + 2.0 / 200


def test_ks_distance_needs_samples():
    with pytest.raises(DomainError):
        ks_distance(nakagami_pair(1.0, 1.0), np.array([]))
