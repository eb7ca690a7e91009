import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from app.game.channel import (
    PATH_LOSS_INTERCEPT_DB,
    channel_gain_db,
    equilibrium_payoff_curve,
    noise_power_mw,
    payoff_curves,
    receiver_utility,
    shadowing_draws,
    snjr,
    spectral_efficiency,
    value,
)
from app.game.models import PositionPair, ScenarioConfig
from app.utils.errors import DomainError

pytestmark = pytest.mark.order(2)


@pytest.fixture(scope="session")
def vehicular():
    return ScenarioConfig.vehicular(2.0)


def test_value_examples():
    assert value(20.0, 10.0, 2.0) == pytest.approx(0.25)
    assert value(15.0, 10.0, 2.0) == pytest.approx(1 / 9)
    assert value(10.0, 10.0, 2.0) == 0.0
    assert value(10.0, 50.0, 2.0) == pytest.approx(16.0)


def test_value_vectorized():
    xs = np.array([10.0, 20.0])
    assert np.allclose(value(xs, 10.0, 2.0), [0.0, 0.25])


def test_value_rejects_nonpositive_receiver():
    with pytest.raises(DomainError):
        value(0.0, 10.0, 2.0)


def test_channel_gain_db():
    assert channel_gain_db(1.0, 2.0) == pytest.approx(-PATH_LOSS_INTERCEPT_DB)
    assert channel_gain_db(10.0, 3.0, shadow=2.0) == pytest.approx(-(47.86 + 30.0 + 2.0))
    # clamped below one meter
    assert channel_gain_db(0.25, 2.0) == channel_gain_db(1.0, 2.0)
    with pytest.raises(DomainError):
        channel_gain_db(0.0, 2.0)


def test_noise_power(vehicular):
    assert noise_power_mw(ScenarioConfig.small()) == 0.0
    assert noise_power_mw(vehicular) == pytest.approx(10 ** (-17.4) * 20e6)


def test_snjr_regression(vehicular):
    gamma = snjr(PositionPair(x=100.0, y=500.0), vehicular)
    assert gamma == pytest.approx(16.0 / (1.0 + 10 ** (-2.40885)), rel=1e-4)
    assert gamma == pytest.approx(15.938, abs=1e-3)


def test_snjr_outside_segment(vehicular):
    with pytest.raises(ValueError):
        snjr(PositionPair(x=5.0, y=500.0), vehicular)


def test_noise_free_snjr_equals_value():
    cfg = ScenarioConfig(l=10.0, m=50.0, alpha=2.5)
    xs = np.linspace(10.0, 50.0, 41)
    for x in xs:
        for y in xs:
            if abs(x - y) < 1.0:
                continue
            assert snjr(PositionPair(x=x, y=y), cfg) == pytest.approx(value(x, y, 2.5), rel=1e-12)


def test_spectral_efficiency_regression():
    cfg = ScenarioConfig.gain(2.0).model_copy(update={"shadow_var_db": 0.0})
    se = spectral_efficiency(PositionPair(x=10.0, y=570.0), cfg)
    ratio = 10 ** ((-174 + 10 * np.log10(2e7) - (23 - 47.86 - 20 * np.log10(560))) / 10)
    assert se == pytest.approx(np.log2(1 + 3136 / (1 + ratio)), rel=1e-9)
    assert se == pytest.approx(11.604, abs=1e-3)


def test_spectral_efficiency_needs_rng_with_shadowing():
    cfg = ScenarioConfig.gain(2.0)
    with pytest.raises(ValueError):
        spectral_efficiency(PositionPair(x=10.0, y=570.0), cfg)
    a = spectral_efficiency(PositionPair(x=10.0, y=570.0), cfg, np.random.default_rng(1))
    b = spectral_efficiency(PositionPair(x=10.0, y=570.0), cfg, np.random.default_rng(1))
    assert a == b


def test_shadowing_draws_statistics():
    cfg = ScenarioConfig.gain(2.0)
    draws = shadowing_draws(cfg, np.random.default_rng(0), size=200_000)
    assert draws.mean() == pytest.approx(0.0, abs=0.02)
    assert draws.var() == pytest.approx(2.5, rel=0.02)
    assert shadowing_draws(ScenarioConfig.small(), np.random.default_rng(0)) == 0.0


@given(
    x=st.floats(10.0, 50.0),
    d1=st.floats(0.1, 20.0),
    d2=st.floats(0.1, 20.0),
    alpha=st.floats(1.0, 4.0),
)
def test_value_increases_with_jammer_distance(x, d1, d2, alpha):
    if abs(d1 - d2) < 1e-6:
        return
    near, far = sorted((d1, d2))
    assert value(x, x + near, alpha) < value(x, x + far, alpha)
    assert value(x, x - near, alpha) < value(x, x - far, alpha)


def test_value_bounded_when_jammer_near_ap():
    l, m = 10.0, 50.0
    xs = np.linspace(l, m, 401)
    ys = np.linspace(l, 2 * l, 201)
    for alpha in (1.0, 2.0, 3.0):
        grid = value(xs[:, None], ys[None, :], alpha)
        assert np.all(grid <= 1.0 + 1e-12)
        # equality only with R on the AP boundary and J at 2L
        assert np.all(grid[:, :-1] < 1.0)
        assert grid[0, -1] == pytest.approx(1.0)


def test_receiver_utility_modes(vehicular):
    assert receiver_utility(20.0, 10.0, ScenarioConfig.small()) == pytest.approx(0.25)
    gamma = snjr(PositionPair(x=100.0, y=500.0), vehicular)
    assert receiver_utility(100.0, 500.0, vehicular) == pytest.approx(gamma)


def test_receiver_utility_vanishing_noise_is_value():
    cfg = ScenarioConfig(l=10.0, m=50.0, alpha=2.0, noise_density_dbm_hz=-400.0)
    assert receiver_utility(50.0, 50 / 3, cfg) == pytest.approx(4 / 9, rel=1e-9)
    assert receiver_utility(10.0, 50 / 3, cfg) == pytest.approx(4 / 9, rel=1e-9)


@given(p_low=st.floats(-10.0, 40.0), extra=st.floats(0.1, 20.0), x=st.floats(10.0, 570.0), y=st.floats(10.0, 570.0))
def test_spectral_efficiency_nonincreasing_in_jammer_power(p_low, extra, x, y):
    base = ScenarioConfig.gain(2.0).model_copy(update={"shadow_var_db": 0.0})
    weak = base.model_copy(update={"p_j_dbm": p_low})
    strong = base.model_copy(update={"p_j_dbm": p_low + extra})
    pair = PositionPair(x=x, y=y)
    assert spectral_efficiency(pair, strong) <= spectral_efficiency(pair, weak)


def test_payoff_curves():
    cfg = ScenarioConfig.small()
    xs, curves = payoff_curves(cfg, [10.0, 20.0, 30.0], n_points=41)
    assert xs.shape == (41,)
    assert curves.shape == (3, 41)
    assert curves[1, 0] == pytest.approx(value(10.0, 20.0, 2.0))


def test_equilibrium_payoff_curve_touches_value_at_both_ends():
    cfg = ScenarioConfig.small()
    xs, curve = equilibrium_payoff_curve(cfg, n_points=101)
    assert curve[0] == pytest.approx(4 / 9)
    assert curve[-1] == pytest.approx(4 / 9)
    assert curve.min() == pytest.approx(0.0, abs=0.01)
