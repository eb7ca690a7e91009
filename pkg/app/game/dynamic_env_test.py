import numpy as np
import pytest

from app.game.dynamic_env import (
    EnvState,
    legal_actions,
    observe,
    payoff_table,
    reset,
    reward,
    state_action_count,
    step_sequential,
    step_simultaneous,
)
from app.game.models import GridSpec, ScenarioConfig
from app.types.general import GameVariant, Player
from app.utils.errors import ContractViolation

pytestmark = pytest.mark.order(5)


@pytest.fixture(scope="session")
def cfg():
    return ScenarioConfig.small()


@pytest.fixture(scope="session")
def grid(cfg):
    return GridSpec.for_scenario(cfg, n_positions=9, max_step=2)


def test_grid_positions(grid):
    assert grid.step == 5.0
    assert grid.positions()[0] == 10.0
    assert grid.positions()[-1] == 50.0
    assert grid.nearest_index(50 / 3) == 1


def test_legal_actions(grid):
    assert legal_actions(0, grid) == [0, 1, 2]
    assert legal_actions(1, grid) == [-1, 0, 1, 2]
    assert legal_actions(4, grid) == [-2, -1, 0, 1, 2]
    assert legal_actions(8, grid) == [-2, -1, 0]
    assert sum(len(legal_actions(i, grid)) for i in range(9)) == 39
    with pytest.raises(ContractViolation):
        legal_actions(9, grid)


def test_state_action_count(grid):
    assert state_action_count(grid, GameVariant.BLIND) == 39
    assert state_action_count(grid, GameVariant.SEQUENTIAL) == 9 * 39
    small_step = grid.model_copy(update={"max_step": 1})
    assert state_action_count(small_step, GameVariant.BLIND) == 25


def test_payoff_table_is_cached_and_read_only(grid, cfg):
    table = payoff_table(grid, cfg)
    assert table is payoff_table(grid, cfg)
    assert table[2, 0] == pytest.approx(0.25)
    with pytest.raises(ValueError):
        table[0, 0] = 1.0


def test_reset_uniform(grid):
    rng = np.random.default_rng(11)
    n = 100_000
    counts = np.zeros((9, 9))
    first_r = 0
    for _ in range(n):
        state = reset(grid, GameVariant.SEQUENTIAL, rng)
        counts[state.x_idx, state.y_idx] += 1
        first_r += state.turn is Player.RECEIVER
        assert state.t == 0
    p = 1 / 81
    sigma = np.sqrt(p * (1 - p) / n)
    assert np.all(np.abs(counts / n - p) < 4 * sigma)
    assert abs(first_r / n - 0.5) < 4 * np.sqrt(0.25 / n)


def test_reset_reproducible_and_turnless_for_simultaneous(grid):
    a = [reset(grid, GameVariant.SIMULTANEOUS, np.random.default_rng(5)) for _ in range(2)]
    assert a[0] == a[1]
    assert a[0].turn is None


def test_step_sequential_examples(grid, cfg):
    state = EnvState(x_idx=1, y_idx=0, turn=Player.RECEIVER)
    nxt, r_r, r_j = step_sequential(state, 0, grid, cfg)
    assert r_r == pytest.approx(1 / 9)
    assert r_r + r_j == 0
    assert nxt.turn is Player.JAMMER
    assert nxt.t == 1
    caught, r_r, r_j = step_sequential(nxt, 1, grid, cfg)
    assert (caught.x_idx, caught.y_idx) == (1, 1)
    assert r_r == 0.0
    assert caught.prev_y_idx == 0


def test_step_sequential_rejects_illegal(grid, cfg):
    with pytest.raises(ContractViolation):
        step_sequential(EnvState(x_idx=0, y_idx=4, turn=Player.RECEIVER), -1, grid, cfg)
    with pytest.raises(ContractViolation):
        step_sequential(EnvState(x_idx=4, y_idx=4, turn=Player.JAMMER), 3, grid, cfg)
    with pytest.raises(ContractViolation):
        step_sequential(EnvState(x_idx=4, y_idx=4), 0, grid, cfg)


def test_step_simultaneous_examples(grid, cfg):
    state = EnvState(x_idx=2, y_idx=0)
    nxt, r_r, r_j = step_simultaneous(state, 0, 0, grid, cfg)
    assert r_r == pytest.approx(0.25)
    assert r_j == -r_r
    swapped, r_r, _ = step_simultaneous(EnvState(x_idx=3, y_idx=4), 1, -1, grid, cfg)
    assert (swapped.x_idx, swapped.y_idx) == (4, 3)
    assert r_r > 0
    with pytest.raises(ContractViolation):
        step_simultaneous(EnvState(x_idx=8, y_idx=0), 1, 0, grid, cfg)


def test_stay_moves_commute(grid, cfg):
    state = EnvState(x_idx=5, y_idx=2, turn=Player.RECEIVER)
    half, _, _ = step_sequential(state, 0, grid, cfg)
    seq, r_seq, _ = step_sequential(half, 0, grid, cfg)
    sim, r_sim, _ = step_simultaneous(EnvState(x_idx=5, y_idx=2), 0, 0, grid, cfg)
    assert (seq.x_idx, seq.y_idx) == (sim.x_idx, sim.y_idx)
    assert r_seq == r_sim


def test_zero_sum_and_containment(grid, cfg):
    rng = np.random.default_rng(2)
    state = reset(grid, GameVariant.SIMULTANEOUS, rng)
    for _ in range(2_000):
        a_r = rng.choice(legal_actions(state.x_idx, grid))
        a_j = rng.choice(legal_actions(state.y_idx, grid))
        state, r_r, r_j = step_simultaneous(state, int(a_r), int(a_j), grid, cfg)
        assert r_r + r_j == 0
        assert 0 <= state.x_idx < 9 and 0 <= state.y_idx < 9


def test_observe(grid):
    state = EnvState(x_idx=3, y_idx=7, turn=Player.RECEIVER)
    assert observe(state, Player.RECEIVER, GameVariant.SEQUENTIAL).key == (3, 7)
    assert observe(state, Player.JAMMER, GameVariant.SEQUENTIAL).key == (7, 3)
    assert observe(state, Player.RECEIVER, GameVariant.BLIND).opponent is None
    assert observe(state, Player.JAMMER, GameVariant.BLIND).key == (7,)


def test_observe_simultaneous_sees_opponent_one_step_late(grid, cfg):
    start = EnvState(x_idx=2, y_idx=6)
    assert observe(start, Player.RECEIVER, GameVariant.SIMULTANEOUS).key == (2, 6)
    state, _, _ = step_simultaneous(start, 1, -2, grid, cfg)
    assert observe(state, Player.RECEIVER, GameVariant.SIMULTANEOUS).key == (3, 6)
    assert observe(state, Player.JAMMER, GameVariant.SIMULTANEOUS).key == (4, 2)
    assert observe(state, Player.RECEIVER, GameVariant.SEQUENTIAL).key == (3, 4)
    state, _, _ = step_simultaneous(state, 0, 1, grid, cfg)
    assert observe(state, Player.RECEIVER, GameVariant.SIMULTANEOUS).key == (3, 4)


@pytest.mark.parametrize("max_step", [1, 2])
def test_moving_away_is_worse_for_jammer(cfg, max_step):
    grid = GridSpec.for_scenario(cfg, 9, max_step)
    for x in range(9):
        for y in range(9):
            if x == y:
                continue
            direction = -1 if y < x else 1
            state = EnvState(x_idx=x, y_idx=y, turn=Player.JAMMER)
            _, _, previous = step_sequential(state, 0, grid, cfg)
            for size in range(1, max_step + 1):
                away = direction * size
                if away not in legal_actions(y, grid):
                    break
                _, _, away_j = step_sequential(state, away, grid, cfg)
                assert away_j < previous
                previous = away_j


def test_value_bounded_with_jammer_near_ap(grid, cfg):
    table = payoff_table(grid, cfg)
    near_ap = grid.positions() <= 2 * cfg.l
    assert np.all(table[:, near_ap] <= 1.0)
    at_one = np.argwhere(np.isclose(table[:, near_ap], 1.0))
    assert at_one.tolist() == [[0, 2]]


def test_spectral_reward_uses_rng(grid):
    cfg = ScenarioConfig.gain(2.0)
    gain_grid = GridSpec.for_scenario(cfg, 15, 1)
    a = reward(0, 14, gain_grid, cfg, np.random.default_rng(4))
    b = reward(0, 14, gain_grid, cfg, np.random.default_rng(4))
    assert a == b
    assert a > 0
