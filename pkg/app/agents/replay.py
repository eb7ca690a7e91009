from dataclasses import dataclass

import numpy as np

from app.utils.errors import ContractViolation


@dataclass(frozen=True)
class Transition:
    state: np.ndarray
    action_slot: int
    reward: float
    next_state: np.ndarray
    next_mask: np.ndarray


@dataclass
class Batch:
    states: np.ndarray
    action_slots: np.ndarray
    rewards: np.ndarray
    next_states: np.ndarray
    next_masks: np.ndarray

    def __len__(self):
        return len(self.rewards)

    @classmethod
    def from_transitions(cls, transitions: list[Transition]) -> "Batch":
        return cls(
            states=np.stack([t.state for t in transitions]),
            action_slots=np.array([t.action_slot for t in transitions], dtype=int),
            rewards=np.array([t.reward for t in transitions], dtype=float),
            next_states=np.stack([t.next_state for t in transitions]),
            next_masks=np.stack([t.next_mask for t in transitions]),
        )


class ReplayBuffer:
    """Fixed-capacity ring of transitions; once full the oldest entry is overwritten."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ContractViolation(f"replay capacity must be positive, got {capacity}")
        self.capacity = capacity
        self.items: list[Transition] = []
        self.cursor = 0

    def __len__(self):
        return len(self.items)


def replay_push(buf: ReplayBuffer, transition: Transition):
    if len(buf.items) < buf.capacity:
        buf.items.append(transition)
    else:
        buf.items[buf.cursor] = transition
    buf.cursor = (buf.cursor + 1) % buf.capacity


def replay_sample(buf: ReplayBuffer, k: int, rng: np.random.Generator) -> Batch:
    if not buf.items:
        raise ContractViolation("cannot sample from an empty replay buffer")
    if k > len(buf.items):
        raise ContractViolation(f"requested {k} samples from a buffer holding {len(buf.items)}")
    idx = rng.integers(0, len(buf.items), size=k)
    return Batch.from_transitions([buf.items[i] for i in idx])
