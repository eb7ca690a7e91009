import numpy as np
import pytest

from app.harness.metrics import (
    joint_occupancy,
    late_window_stats,
    moving_average,
    plateau_step,
    weighted_reward_grid,
)
from app.utils.errors import ContractViolation

pytestmark = pytest.mark.order(11)


def test_moving_average_partial_window():
    assert moving_average([1, 2, 3], 2).tolist() == [1.0, 1.5, 2.5]
    assert moving_average([4, 4, 4, 4], 3).tolist() == [4.0] * 4
    series = np.random.default_rng(0).random(50)
    assert np.allclose(moving_average(series, 1), series)
    with pytest.raises(ContractViolation):
        moving_average([1.0], 0)


def test_joint_occupancy():
    single = joint_occupancy([(2, 3)] * 5, 9)
    assert single[2, 3] == 1.0
    assert single.sum() == 1.0
    with pytest.raises(ContractViolation):
        joint_occupancy(np.zeros((0, 2)), 9)


def test_joint_occupancy_uniform_trace():
    n = 1_000_000
    trace = np.random.default_rng(1).integers(0, 9, size=(n, 2))
    occ = joint_occupancy(trace, 9)
    p = 1 / 81
    assert occ.sum() == pytest.approx(1.0, abs=1e-9)
    assert np.all(np.abs(occ - p) < 4.5 * np.sqrt(p * (1 - p) / n))


def test_weighted_reward_grid():
    occ = np.full((2, 2), 0.25)
    payoff = np.array([[0.0, 1.0], [2.0, 0.0]])
    assert np.allclose(weighted_reward_grid(occ, payoff), [[0.0, 0.25], [0.5, 0.0]])
    with pytest.raises(ContractViolation):
        weighted_reward_grid(occ, np.zeros((3, 3)))


def test_late_window_stats():
    series = np.concatenate([np.zeros(90), np.full(10, 2.0)])
    assert late_window_stats(series) == (2.0, 0.0)
    mean, _ = late_window_stats(series, fraction=0.2)
    assert mean == pytest.approx(1.0)
    with pytest.raises(ContractViolation):
        late_window_stats([])


def test_plateau_step():
    series = np.concatenate([np.linspace(0.0, 1.0, 100), np.ones(900)])
    step = plateau_step(series, window=10)
    assert 90 <= step <= 110
    assert plateau_step(np.ones(50), window=5) == 0
