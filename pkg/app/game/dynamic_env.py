"""
Discrete mobility game on N equally spaced positions.

Three information structures share the same moves and payoffs:
  g1  alternating moves, both positions always visible
  g2  simultaneous moves, the opponent's position is seen one step late
  g3  simultaneous moves, a player only ever sees its own position
"""

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from app.game.channel import spectral_efficiency, value
from app.game.models import GridSpec, PositionPair, ScenarioConfig
from app.types.general import Action, GameVariant, Player, RewardMode
from app.utils.errors import ContractViolation
from app.utils.logger import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class EnvState:
    x_idx: int
    y_idx: int
    turn: Player | None = None
    t: int = 0
    prev_x_idx: int | None = None
    prev_y_idx: int | None = None

    def index_of(self, player: Player) -> int:
        return self.x_idx if player is Player.RECEIVER else self.y_idx


@dataclass(frozen=True)
class Observation:
    own: int
    opponent: int | None = None

    @property
    def key(self) -> tuple[int, ...]:
        return (self.own,) if self.opponent is None else (self.own, self.opponent)


@lru_cache(maxsize=64)
def _legal_actions(pos_idx: int, n_positions: int, max_step: int) -> tuple[Action, ...]:
    return tuple(d for d in range(-max_step, max_step + 1) if 0 <= pos_idx + d < n_positions)


def legal_actions(pos_idx: int, grid: GridSpec) -> list[Action]:
    if not 0 <= pos_idx < grid.n_positions:
        raise ContractViolation(f"position index {pos_idx} outside [0, {grid.n_positions - 1}]")
    return list(_legal_actions(pos_idx, grid.n_positions, grid.max_step))


def state_action_count(grid: GridSpec, variant: GameVariant) -> int:
    """Number of (state, action) entries in one player's table."""
    per_position = sum(len(_legal_actions(i, grid.n_positions, grid.max_step)) for i in range(grid.n_positions))
    return per_position if variant is GameVariant.BLIND else grid.n_positions * per_position


@lru_cache(maxsize=64)
def payoff_table(grid: GridSpec, cfg: ScenarioConfig) -> np.ndarray:
    """value(x_i, y_j) for every pair of grid positions; rows are R's index."""
    positions = grid.positions()
    table = value(positions[:, None], positions[None, :], cfg.alpha)
    table.setflags(write=False)
    return table


def reward(x_idx: int, y_idx: int, grid: GridSpec, cfg: ScenarioConfig, rng: np.random.Generator | None = None) -> float:
    if cfg.reward is RewardMode.SPECTRAL_EFFICIENCY:
        pair = PositionPair(x=grid.coordinate(x_idx), y=grid.coordinate(y_idx))
        return spectral_efficiency(pair, cfg, rng)
    return float(payoff_table(grid, cfg)[x_idx, y_idx])


def reset(grid: GridSpec, variant: GameVariant, rng: np.random.Generator) -> EnvState:
    x_idx, y_idx = (int(v) for v in rng.integers(0, grid.n_positions, size=2))
    turn = None
    if variant is GameVariant.SEQUENTIAL:
        turn = Player.RECEIVER if rng.random() < 0.5 else Player.JAMMER
    return EnvState(x_idx=x_idx, y_idx=y_idx, turn=turn, t=0)


def _check_legal(pos_idx: int, action: Action, grid: GridSpec, who: Player):
    if abs(action) > grid.max_step or not 0 <= pos_idx + action < grid.n_positions:
        raise ContractViolation(f"illegal action {action:+d} for {who} at index {pos_idx}")


def step_sequential(
    state: EnvState,
    action: Action,
    grid: GridSpec,
    cfg: ScenarioConfig,
    rng: np.random.Generator | None = None,
) -> tuple[EnvState, float, float]:
    mover = state.turn
    if mover is None:
        raise ContractViolation("sequential step on a state without a mover")
    _check_legal(state.index_of(mover), action, grid, mover)
    x_idx, y_idx = state.x_idx, state.y_idx
    if mover is Player.RECEIVER:
        x_idx += action
    else:
        y_idx += action
    reward_r = reward(x_idx, y_idx, grid, cfg, rng)
    next_state = EnvState(
        x_idx=x_idx,
        y_idx=y_idx,
        turn=mover.opponent,
        t=state.t + 1,
        prev_x_idx=state.x_idx,
        prev_y_idx=state.y_idx,
    )
    return next_state, reward_r, -reward_r


def step_simultaneous(
    state: EnvState,
    action_r: Action,
    action_j: Action,
    grid: GridSpec,
    cfg: ScenarioConfig,
    rng: np.random.Generator | None = None,
) -> tuple[EnvState, float, float]:
    _check_legal(state.x_idx, action_r, grid, Player.RECEIVER)
    _check_legal(state.y_idx, action_j, grid, Player.JAMMER)
    x_idx, y_idx = state.x_idx + action_r, state.y_idx + action_j
    reward_r = reward(x_idx, y_idx, grid, cfg, rng)
    next_state = replace(
        state,
        x_idx=x_idx,
        y_idx=y_idx,
        t=state.t + 1,
        prev_x_idx=state.x_idx,
        prev_y_idx=state.y_idx,
    )
    return next_state, reward_r, -reward_r


def observe(state: EnvState, player: Player, variant: GameVariant) -> Observation:
    """
    Information available to `player` when choosing its next move.

    In g2 the opponent coordinate is the one it held before the last
    resolved step.
    """
    own = state.index_of(player)
    if variant is GameVariant.BLIND:
        return Observation(own=own)
    opponent = state.index_of(player.opponent)
    if variant is GameVariant.SIMULTANEOUS:
        lagged = state.prev_y_idx if player is Player.RECEIVER else state.prev_x_idx
        # before the first step there is nothing older than the start position
        if lagged is not None:
            opponent = lagged
    return Observation(own=own, opponent=opponent)
