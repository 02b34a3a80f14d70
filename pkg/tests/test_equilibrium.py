import math

import numpy as np
import pytest

from channel_models import GainDistribution, PlayerModel, tail_condition
from config import db_to_linear
from conftest import HIGH_POWER, rayleigh_player
from equilibrium import (
    TRIVIAL_POINT,
    ExactBestResponse,
    PureFS,
    ThresholdRule,
    build_profile,
    conditional_gain_db,
    epsilon_estimate,
    equilibrium_payoffs,
    find_fixed_points,
    interior_points,
    response_curves,
    response_prob,
    select_point,
)
from errors import DomainError
from threshold import solve_q


def nakagami_player(m1: float, m2: float, isr_bar: float) -> PlayerModel:
    return PlayerModel(GainDistribution.nakagami(m1, 1.0), GainDistribution.nakagami(m2, isr_bar), HIGH_POWER)


# Direct-link shape m1 <= 1 on both sides
TAIL_CONDITION_CASES = [
    (rayleigh_player(1.0), rayleigh_player(1.0)),
    (rayleigh_player(0.25), rayleigh_player(0.25)),
    (rayleigh_player(0.25), rayleigh_player(1.0)),
    (rayleigh_player(4.0), rayleigh_player(0.5)),
    (nakagami_player(0.5, 1.0, 1.0), nakagami_player(0.5, 1.0, 1.0)),
    (nakagami_player(0.5, 2.0, 0.5), nakagami_player(0.75, 2.0, 0.5)),
    (nakagami_player(0.75, 0.5, 2.0), nakagami_player(1.0, 3.0, 0.25)),
    (nakagami_player(1.0, 2.0, 1.0), rayleigh_player(0.5)),
    (nakagami_player(0.6, 1.5, 0.3), nakagami_player(0.9, 0.8, 3.0)),
    (nakagami_player(0.5, 4.0, 0.25), nakagami_player(0.5, 4.0, 0.25)),
]


# -------------------------
# RESPONSE PROBABILITIES
# -------------------------
def test_response_prob_endpoints(symmetric_player):
    assert response_prob(symmetric_player, 0.0) == 0.0
    # q(1) = 1/2 and F(1/2) = 1/3 for symmetric rayleigh
    assert response_prob(symmetric_player, 1.0) == pytest.approx(2.0 / 3.0, abs=1e-9)
    assert response_prob(symmetric_player, 0.5) == pytest.approx(0.5, abs=1e-9)


def test_response_prob_rejects_bad_probability(symmetric_player):
    with pytest.raises(DomainError):
        response_prob(symmetric_player, 1.5)


def test_response_curves_table(symmetric_player, strong_player):
    df = response_curves(symmetric_player, strong_player, steps=51)
    assert list(df.columns) == ["a", "r1", "r2"]
    assert len(df) == 51
    assert df["r1"].is_monotonic_increasing
    # more interference on the cross link means more FDM
    assert (df["r1"] >= df["r2"]).all()


# -------------------------
# FIXED POINTS
# -------------------------
def test_symmetric_rayleigh_equilibrium(symmetric_player):
    points = find_fixed_points(symmetric_player, symmetric_player)
    assert points[0] is TRIVIAL_POINT
    assert points[0].q1 == math.inf
    interior = interior_points(points)
    match = [p for p in interior if abs(p.a1 - 0.5) < 1e-6 and abs(p.a2 - 0.5) < 1e-6]
    assert match
    assert match[0].q1 == pytest.approx(1.0, abs=1e-6)
    assert match[0].q2 == pytest.approx(1.0, abs=1e-6)
    assert match[0].converged
    assert match[0].residual <= 1e-8


def test_fixed_points_ignore_power_scale():
    lo = find_fixed_points(rayleigh_player(0.5, 10.0), rayleigh_player(2.0, 10.0))
    hi = find_fixed_points(rayleigh_player(0.5, 1e6), rayleigh_player(2.0, 1e6))
    assert [p.a1 for p in lo] == pytest.approx([p.a1 for p in hi], abs=1e-12)


def test_strong_strong_equilibrium_is_rare_fdm(strong_player):
    interior = interior_points(find_fixed_points(strong_player, strong_player))
    assert interior
    assert all(p.a1 < 0.1 and p.a2 < 0.1 for p in interior)
    assert any(p.a1 == pytest.approx(p.a2, abs=1e-6) for p in interior)


@pytest.mark.parametrize("p1, p2", TAIL_CONDITION_CASES)
def test_tail_condition_gives_interior_point(p1, p2):
    assert tail_condition(p1) and tail_condition(p2)
    interior = interior_points(find_fixed_points(p1, p2))
    assert interior
    for p in interior:
        assert 0.0 < p.a1 <= 1.0 and 0.0 < p.a2 <= 1.0
        assert p.a1 == pytest.approx(response_prob(p1, p.a2), abs=1e-8)
        assert p.a2 == pytest.approx(response_prob(p2, p.a1), abs=1e-8)
        assert p.q1 == pytest.approx(solve_q(p.a2))


def test_grid_too_small(symmetric_player):
    with pytest.raises(DomainError):
        find_fixed_points(symmetric_player, symmetric_player, grid=10)


def test_select_point(symmetric_point):
    assert select_point([TRIVIAL_POINT]) is TRIVIAL_POINT
    assert select_point([TRIVIAL_POINT, symmetric_point]) is symmetric_point
    with pytest.raises(DomainError):
        select_point([TRIVIAL_POINT, symmetric_point], index=3)


# -------------------------
# PROFILES AND GAINS
# -------------------------
def test_build_profile_modes(symmetric_point):
    exact = build_profile(symmetric_point, "exact")
    assert isinstance(exact.player1, ExactBestResponse)
    assert exact.player1.a_opponent == symmetric_point.a2
    threshold = build_profile(symmetric_point, "threshold")
    assert isinstance(threshold.player2, ThresholdRule)
    assert threshold.player2.isr_cutoff == symmetric_point.q2
    trivial = build_profile(TRIVIAL_POINT, "threshold")
    assert isinstance(trivial.player1, PureFS) and isinstance(trivial.player2, PureFS)
    with pytest.raises(DomainError):
        build_profile(symmetric_point, "greedy")


def test_threshold_rule_cutoff_range():
    with pytest.raises(DomainError):
        ThresholdRule(0.4)
    assert not ThresholdRule(math.inf).fdm_mask(1.0, 1e9)


def test_gain_is_zero_at_trivial_point():
    assert conditional_gain_db(TRIVIAL_POINT, 100.0, 300.0, 1) == 0.0


@pytest.mark.parametrize("p1, p2", TAIL_CONDITION_CASES[:5])
def test_equilibrium_never_loses_to_pure_fs(p1, p2):
    rng = np.random.default_rng(11)
    x = 10.0 ** rng.uniform(-2, 6, 10_000)
    y = 10.0 ** rng.uniform(-3, 7, 10_000)
    for point in interior_points(find_fixed_points(p1, p2)):
        for idx in (1, 2):
            assert np.all(conditional_gain_db(point, x, y, idx) >= -1e-9)


def test_equilibrium_payoffs_in_bits(symmetric_point):
    eq, fs = equilibrium_payoffs(symmetric_point, 100.0, 200.0, 1)
    assert eq >= fs > 0
    assert conditional_gain_db(symmetric_point, 100.0, 200.0, 1) == pytest.approx(10 * math.log10(eq / fs))


def test_gain_grows_with_isr_beyond_one(symmetric_point):
    isr = db_to_linear(np.arange(0.0, 12.5, 0.5))
    gains = conditional_gain_db(symmetric_point, 100.0, 100.0 * isr, 1)
    assert np.all(np.diff(gains) > 0)


# -------------------------
# EPSILON
# -------------------------
def test_epsilon_estimate_bounded_by_gap(symmetric_player, symmetric_point):
    estimates = epsilon_estimate(symmetric_point, symmetric_player, symmetric_player, sample_count=50_000, seed=5)
    assert [e.player for e in estimates] == [1, 2]
    for e in estimates:
        assert e.a_hat == pytest.approx(0.5, abs=1e-6)
        assert e.a_tilde == pytest.approx(0.5, abs=0.02)
        assert 0.0 <= e.epsilon <= e.gap_bound + 1e-12
        assert 0.0 <= e.disagreement <= 1.0
        assert set(e.to_dict()) == {"player", "a_hat", "a_tilde", "epsilon", "disagreement", "gap_bound", "samples"}


def test_epsilon_estimate_is_seeded(symmetric_player, symmetric_point):
    a = epsilon_estimate(symmetric_point, symmetric_player, symmetric_player, sample_count=10_000, seed=9)
    b = epsilon_estimate(symmetric_point, symmetric_player, symmetric_player, sample_count=10_000, seed=9)
    assert a == b


def test_epsilon_estimate_needs_samples(symmetric_player, symmetric_point):
    with pytest.raises(DomainError):
        epsilon_estimate(symmetric_point, symmetric_player, symmetric_player, sample_count=100)


@pytest.fixture(scope="module")
def weak_strong_point():
    point = select_point(find_fixed_points(rayleigh_player(0.25), rayleigh_player(1.0)))
    assert not point.is_trivial
    return point


def epsilons_over_power(point, scales, seed=5):
    out = []
    for scale in scales:
        p1, p2 = rayleigh_player(0.25, scale), rayleigh_player(1.0, scale)
        out.append({e.player: e for e in epsilon_estimate(point, p1, p2, sample_count=100_000, seed=seed)})
    return out


def test_epsilon_shrinks_with_power(weak_strong_point):
    runs = epsilons_over_power(weak_strong_point, (1e2, 1e4, 1e6))
    eps1 = [r[1].epsilon for r in runs]
    eps2 = [r[2].epsilon for r in runs]
    assert eps1[0] > eps1[1] >= eps1[2]
    assert eps2[2] <= eps2[0]
    for r in runs:
        for e in r.values():
            assert 0.0 <= e.epsilon <= e.gap_bound + 1e-12


def test_epsilon_disagreement_small_at_high_power(weak_strong_point):
    (run,) = epsilons_over_power(weak_strong_point, (1e6,))
    for e in run.values():
        assert e.disagreement < 0.01
        assert e.a_tilde == pytest.approx(e.a_hat, abs=1e-3)


def test_symmetric_epsilon_not_larger_at_higher_power(symmetric_point):
    low = epsilon_estimate(symmetric_point, rayleigh_player(1.0, 1e2), rayleigh_player(1.0, 1e2), 50_000, seed=3)
    high = epsilon_estimate(symmetric_point, rayleigh_player(1.0, 1e4), rayleigh_player(1.0, 1e4), 50_000, seed=3)
    for lo, hi in zip(low, high):
        assert hi.epsilon <= lo.epsilon


def test_epsilon_is_zero_at_trivial_point(symmetric_player):
    for e in epsilon_estimate(TRIVIAL_POINT, symmetric_player, symmetric_player, sample_count=10_000):
        assert e.a_hat == 0.0
        assert e.a_tilde == 0.0
        assert e.epsilon == 0.0
        assert e.disagreement == 0.0
