"""
Dueling deep Q-network written directly in numpy.

A dense ReLU trunk feeds a scalar value head and a per-action advantage
head; Q(a) = V + A(a) - mean(A). Training is plain SGD on the squared TD
error against a periodically synchronized target copy.
"""

from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.agents.base import Agent
from app.agents.replay import Batch, ReplayBuffer, Transition, replay_push, replay_sample
from app.agents.tabular import LearningConfig, epsilon_schedule
from app.game.dynamic_env import Observation
from app.game.models import GridSpec
from app.types.general import Action
from app.utils.errors import ConfigError, ContractViolation, ExportError
from app.utils.general import parse_int_list
from app.utils.logger import get_logger

logger = get_logger(__name__)

WEIGHTS_FORMAT = "dueling-net-v1"


class DeepConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    hidden: tuple[int, ...] = (64, 64)
    batch: int = Field(32, ge=1)
    replay: int = Field(10_000, ge=1)
    sync: int = Field(1_000, ge=1)
    learning_rate: float = Field(1e-4, gt=0)

    @field_validator("hidden", mode="before")
    @classmethod
    def split_hidden(cls, v):
        sizes = parse_int_list(v)
        if not sizes or any(s < 1 for s in sizes):
            raise ValueError(f"hidden sizes must be positive, got {v}")
        return sizes


class DuelingNet:
    def __init__(self, input_dim: int, hidden: tuple[int, ...], n_actions: int, rng: np.random.Generator | None = None):
        self.input_dim = input_dim
        self.hidden = tuple(hidden)
        self.n_actions = n_actions
        self.params: dict[str, np.ndarray] = {}
        sizes = (input_dim, *self.hidden)
        for i, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
            self.params[f"W{i}"] = self._init((fan_in, fan_out), rng)
            self.params[f"b{i}"] = np.zeros(fan_out)
        self.params["Wv"] = self._init((sizes[-1], 1), rng)
        self.params["bv"] = np.zeros(1)
        self.params["Wa"] = self._init((sizes[-1], n_actions), rng)
        self.params["ba"] = np.zeros(n_actions)

    @staticmethod
    def _init(shape, rng):
        if rng is None:
            return np.zeros(shape)
        return rng.normal(0.0, np.sqrt(2.0 / shape[0]), size=shape)

    @property
    def n_layers(self) -> int:
        return len(self.hidden)

    def copy(self) -> "DuelingNet":
        clone = DuelingNet(self.input_dim, self.hidden, self.n_actions)
        clone.params = {k: v.copy() for k, v in self.params.items()}
        return clone


def _forward_cache(net: DuelingNet, inputs: np.ndarray):
    h = inputs
    cache = [h]
    for i in range(net.n_layers):
        z = h @ net.params[f"W{i}"] + net.params[f"b{i}"]
        h = np.maximum(z, 0.0)
        cache.append(z)
        cache.append(h)
    v = h @ net.params["Wv"] + net.params["bv"]
    a = h @ net.params["Wa"] + net.params["ba"]
    q = v + a - a.mean(axis=-1, keepdims=True)
    return v, a, q, cache


def forward_parts(net: DuelingNet, inputs: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(V, A, Q) for one input vector or a batch of them."""
    inputs = np.asarray(inputs, dtype=float)
    if inputs.shape[-1] != net.input_dim:
        raise ContractViolation(f"input length {inputs.shape[-1]} != input_dim {net.input_dim}")
    v, a, q, _ = _forward_cache(net, inputs)
    return v, a, q


def forward(net: DuelingNet, inputs: np.ndarray) -> np.ndarray:
    return forward_parts(net, inputs)[2]


def _targets(target_net: DuelingNet, batch: Batch, discount: float) -> np.ndarray:
    next_q = forward(target_net, batch.next_states)
    next_max = np.max(np.where(batch.next_masks, next_q, -np.inf), axis=1)
    return batch.rewards + discount * next_max


def loss_and_gradients(
    net: DuelingNet, target_net: DuelingNet, batch: Batch, discount: float
) -> tuple[float, dict[str, np.ndarray]]:
    if len(batch) == 0:
        raise ContractViolation("empty training batch")
    y = _targets(target_net, batch, discount)
    _, _, q, cache = _forward_cache(net, batch.states)
    rows = np.arange(len(batch))
    err = q[rows, batch.action_slots] - y
    loss = float(np.mean(err**2))

    grad_q = np.zeros_like(q)
    grad_q[rows, batch.action_slots] = 2.0 * err / len(batch)
    grad_v = grad_q.sum(axis=1, keepdims=True)
    grad_a = grad_q - grad_q.mean(axis=1, keepdims=True)

    h = cache[-1]
    grads = {
        "Wv": h.T @ grad_v,
        "bv": grad_v.sum(axis=0),
        "Wa": h.T @ grad_a,
        "ba": grad_a.sum(axis=0),
    }
    grad_h = grad_v @ net.params["Wv"].T + grad_a @ net.params["Wa"].T
    for i in reversed(range(net.n_layers)):
        z = cache[2 * i + 1]
        h_in = cache[2 * i]
        grad_z = grad_h * (z > 0)
        grads[f"W{i}"] = h_in.T @ grad_z
        grads[f"b{i}"] = grad_z.sum(axis=0)
        grad_h = grad_z @ net.params[f"W{i}"].T
    return loss, grads


def td_train_step(net: DuelingNet, target_net: DuelingNet, batch: Batch, cfg: LearningConfig) -> float:
    loss, grads = loss_and_gradients(net, target_net, batch, cfg.discount)
    for name, grad in grads.items():
        net.params[name] -= cfg.learning_rate * grad
    return loss


def sync_target(net: DuelingNet, target_net: DuelingNet):
    for name, weights in net.params.items():
        target_net.params[name] = weights.copy()


def encode_state(obs: Observation, grid: GridSpec) -> np.ndarray:
    n = grid.n_positions
    vec = np.zeros(n if obs.opponent is None else 2 * n)
    vec[obs.own] = 1.0
    if obs.opponent is not None:
        vec[n + obs.opponent] = 1.0
    return vec


def save_weights(net: DuelingNet, path: str | Path):
    try:
        np.savez(
            path,
            __format__=np.array(WEIGHTS_FORMAT),
            __shape__=np.array([net.input_dim, net.n_actions, *net.hidden]),
            **net.params,
        )
    except OSError as e:
        raise ExportError(path, e) from e


def load_weights(path: str | Path) -> DuelingNet:
    try:
        with np.load(path) as archive:
            if str(archive["__format__"]) != WEIGHTS_FORMAT:
                raise ContractViolation(f"unsupported weights format {archive['__format__']}")
            input_dim, n_actions, *hidden = (int(v) for v in archive["__shape__"])
            net = DuelingNet(input_dim, tuple(hidden), n_actions)
            net.params = {k: archive[k].copy() for k in net.params}
    except (OSError, KeyError, ValueError) as e:
        raise ConfigError(f"Could not read network weights {path}: {e}") from e
    logger.info(f"Loaded {net.n_layers}-layer network from {path}")
    return net


class DeepQAgent(Agent):
    def __init__(
        self,
        grid: GridSpec,
        observes_opponent: bool,
        learning: LearningConfig,
        deep: DeepConfig,
        rng: np.random.Generator,
        net: DuelingNet | None = None,
    ):
        self.grid = grid
        # The network has one learning rate regardless of the game variant.
        self.learning = learning.model_copy(update={"learning_rate": deep.learning_rate})
        self.deep = deep
        self.rng = rng
        input_dim = 2 * grid.n_positions if observes_opponent else grid.n_positions
        if net is None:
            net = DuelingNet(input_dim, deep.hidden, grid.n_actions, rng)
        elif (net.input_dim, net.n_actions) != (input_dim, grid.n_actions):
            raise ContractViolation(
                f"network shape ({net.input_dim}, {net.n_actions}) does not fit this game ({input_dim}, {grid.n_actions})"
            )
        self.net = net
        self.target_net = self.net.copy()
        self.buffer = ReplayBuffer(deep.replay)
        self.updates = 0
        self.last_loss = float("nan")

    def _mask(self, legal: list[Action]) -> np.ndarray:
        mask = np.zeros(self.grid.n_actions, dtype=bool)
        mask[np.asarray(legal) + self.grid.max_step] = True
        return mask

    def act(self, obs, legal, t):
        if self.rng.random() < epsilon_schedule(t, self.learning):
            return legal[int(self.rng.integers(len(legal)))]
        q = forward(self.net, encode_state(obs, self.grid))
        q = np.where(self._mask(legal), q, -np.inf)
        return int(np.argmax(q)) - self.grid.max_step

    def learn(self, obs, action, reward, next_obs, next_legal, t):
        transition = Transition(
            state=encode_state(obs, self.grid),
            action_slot=action + self.grid.max_step,
            reward=reward,
            next_state=encode_state(next_obs, self.grid),
            next_mask=self._mask(next_legal),
        )
        replay_push(self.buffer, transition)
        if len(self.buffer) < self.deep.batch:
            return
        batch = replay_sample(self.buffer, self.deep.batch, self.rng)
        self.last_loss = td_train_step(self.net, self.target_net, batch, self.learning)
        self.updates += 1
        if self.updates % self.deep.sync == 0:
            sync_target(self.net, self.target_net)

    def value_grid(self) -> np.ndarray:
        n = self.grid.n_positions
        if self.net.input_dim == n:
            states = np.eye(n)
            own = np.arange(n)
        else:
            own, opp = np.divmod(np.arange(n * n), n)
            states = np.zeros((n * n, 2 * n))
            states[np.arange(n * n), own] = 1.0
            states[np.arange(n * n), n + opp] = 1.0
        q = forward(self.net, states)
        legal = np.array([[0 <= o + d < n for d in range(-self.grid.max_step, self.grid.max_step + 1)] for o in own])
        v = np.max(np.where(legal, q, -np.inf), axis=1)
        return v if self.net.input_dim == n else v.reshape(n, n)
