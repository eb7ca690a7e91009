"""
Tabular Q-learning with an epsilon-greedy behaviour policy.

Tables are dense (state, action-slot) arrays where slot = delta + max_step;
slots of illegal moves are masked out and never read or written.
"""

import math
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.agents.base import Agent
from app.game.dynamic_env import Observation, legal_actions
from app.game.models import GridSpec
from app.types.general import Action, GameVariant
from app.utils.errors import ConfigError, ContractViolation, ExportError
from app.utils.logger import get_logger

logger = get_logger(__name__)

# Per-variant tabular learning rates (g1, g2, g3).
DEFAULT_LEARNING_RATES = {
    GameVariant.SEQUENTIAL: 1e-4,
    GameVariant.SIMULTANEOUS: 5e-2,
    GameVariant.BLIND: 1e-2,
}


class LearningConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    learning_rate: float = Field(1e-4, gt=0, le=1)
    discount: float = Field(0.99, ge=0, lt=1)
    eps_min: float = Field(0.01, gt=0, lt=1)
    total_steps: int = Field(1_500_000, ge=1)
    decay_horizon: int | None = Field(None, ge=1)

    @model_validator(mode="after")
    def check_horizon(self):
        if self.decay_horizon is not None and self.decay_horizon > self.total_steps:
            raise ValueError(f"decay_horizon {self.decay_horizon} exceeds total_steps {self.total_steps}")
        return self

    @property
    def horizon(self) -> int:
        return self.decay_horizon if self.decay_horizon is not None else max(1, 2 * self.total_steps // 3)

    @classmethod
    def for_variant(cls, variant: GameVariant, **overrides) -> "LearningConfig":
        return cls(**{"learning_rate": DEFAULT_LEARNING_RATES[variant], **overrides})


class QTable:
    def __init__(self, grid: GridSpec, variant: GameVariant):
        self.grid = grid
        self.variant = variant
        n = grid.n_positions
        self.n_states = n if variant is GameVariant.BLIND else n * n
        self.values = np.zeros((self.n_states, grid.n_actions))
        self.mask = np.zeros((self.n_states, grid.n_actions), dtype=bool)
        for s in range(self.n_states):
            for a in legal_actions(self.own_index(s), grid):
                self.mask[s, a + grid.max_step] = True

    def own_index(self, s: int) -> int:
        return s if self.variant is GameVariant.BLIND else s // self.grid.n_positions

    def encode(self, obs: Observation) -> int:
        if self.variant is GameVariant.BLIND:
            return obs.own
        if obs.opponent is None:
            raise ContractViolation(f"{self.variant} table needs the opponent position")
        return obs.own * self.grid.n_positions + obs.opponent

    def slot(self, s: int, a: Action) -> int:
        if not 0 <= s < self.n_states:
            raise ContractViolation(f"unknown state {s}")
        k = a + self.grid.max_step
        if not 0 <= k < self.grid.n_actions or not self.mask[s, k]:
            raise ContractViolation(f"action {a:+d} is not legal in state {s}")
        return k

    def get(self, s: int, a: Action) -> float:
        return float(self.values[s, self.slot(s, a)])

    def set(self, s: int, a: Action, q: float):
        self.values[s, self.slot(s, a)] = q

    def masked(self, s: int) -> np.ndarray:
        return np.where(self.mask[s], self.values[s], -np.inf)

    def value_grid(self) -> np.ndarray:
        v = np.array([state_value(self, s) for s in range(self.n_states)])
        if self.variant is GameVariant.BLIND:
            return v
        return v.reshape(self.grid.n_positions, self.grid.n_positions)


def q_update(table: QTable, s: int, a: Action, r: float, s_next: int, cfg: LearningConfig) -> QTable:
    k = table.slot(s, a)
    target = r + cfg.discount * state_value(table, s_next)
    table.values[s, k] = (1 - cfg.learning_rate) * table.values[s, k] + cfg.learning_rate * target
    return table


def greedy_action(table: QTable, s: int, legal: list[Action]) -> Action:
    if not legal:
        raise ContractViolation("no legal actions")
    # legal is ascending, so argmax keeps the lowest delta on ties
    q = [table.values[s, a + table.grid.max_step] for a in legal]
    return legal[int(np.argmax(q))]


def epsilon_schedule(t: int, cfg: LearningConfig) -> float:
    horizon = cfg.horizon
    if t >= horizon:
        return cfg.eps_min
    beta = math.acosh(1.0 / cfg.eps_min) / horizon
    return max(cfg.eps_min, 1.0 / math.cosh(beta * t))


def epsilon_greedy(table: QTable, s: int, legal: list[Action], eps: float, rng: np.random.Generator) -> Action:
    if rng.random() < eps:
        return legal[int(rng.integers(len(legal)))]
    return greedy_action(table, s, legal)


def state_value(table: QTable, s: int) -> float:
    if not 0 <= s < table.n_states:
        raise ContractViolation(f"unknown state {s}")
    return float(np.max(table.values[s][table.mask[s]]))


def _qtable_header(variant: GameVariant, grid: GridSpec) -> str:
    return f"# variant={variant.value} n_positions={grid.n_positions} max_step={grid.max_step}"


def save_qtable(table: QTable, path: str | Path):
    path = Path(path)
    try:
        with open(path, "w") as f:
            f.write(_qtable_header(table.variant, table.grid) + "\n")
            for s, k in zip(*np.nonzero(table.mask)):
                f.write(f"{int(s)} {int(k) - table.grid.max_step} {float(table.values[s, k])!r}\n")
    except OSError as e:
        raise ExportError(path, e) from e


def load_qtable(path: str | Path, grid: GridSpec, variant: GameVariant) -> QTable:
    """Read a table written by save_qtable; the header must match the requested grid and variant."""
    path = Path(path)
    table = QTable(grid, variant)
    expected = _qtable_header(variant, grid)
    try:
        with open(path, "r") as f:
            header = f.readline().strip()
            if header != expected:
                raise ConfigError(f"Q-table {path} has header '{header}', expected '{expected}'")
            for line in f:
                if not line.strip():
                    continue
                s, a, q = line.split()
                table.set(int(s), int(a), float(q))
    except ConfigError:
        raise
    except OSError as e:
        raise ConfigError(f"Could not read Q-table {path}: {e}") from e
    except (ValueError, ContractViolation) as e:
        raise ConfigError(f"Malformed Q-table {path}: {e}") from e
    logger.info(f"Loaded Q-table with {int(table.mask.sum())} entries from {path}")
    return table


class TabularQAgent(Agent):
    def __init__(
        self,
        grid: GridSpec,
        variant: GameVariant,
        cfg: LearningConfig,
        rng: np.random.Generator,
        table: QTable | None = None,
    ):
        if table is not None and (table.grid, table.variant) != (grid, variant):
            raise ContractViolation(f"warm-start table is for {table.variant} on {table.grid}, not {variant} on {grid}")
        self.table = table if table is not None else QTable(grid, variant)
        self.cfg = cfg
        self.rng = rng

    def act(self, obs: Observation, legal: list[Action], t: int) -> Action:
        eps = epsilon_schedule(t, self.cfg)
        return epsilon_greedy(self.table, self.table.encode(obs), legal, eps, self.rng)

    def learn(self, obs, action, reward, next_obs, next_legal, t):
        q_update(self.table, self.table.encode(obs), action, reward, self.table.encode(next_obs), self.cfg)

    def value_grid(self) -> np.ndarray:
        return self.table.value_grid()
