from abc import ABC, abstractmethod

import numpy as np

from app.game.dynamic_env import Observation
from app.types.general import Action


class Agent(ABC):
    """A player policy. Learning agents override learn() and value_grid()."""

    @abstractmethod
    def act(self, obs: Observation, legal: list[Action], t: int) -> Action: ...

    def learn(
        self,
        obs: Observation,
        action: Action,
        reward: float,
        next_obs: Observation,
        next_legal: list[Action],
        t: int,
    ):
        pass

    def value_grid(self) -> np.ndarray | None:
        return None


class RandomAgent(Agent):
    def __init__(self, rng: np.random.Generator):
        self.rng = rng

    def act(self, obs, legal, t):
        return legal[int(self.rng.integers(len(legal)))]
