from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.types.general import RewardMode


class ScenarioConfig(BaseModel):
    """
    Physical parameters of the segment [l, m] on which R and J move.

    Powers are in dBm, the noise floor in dBm/Hz. A null noise density is
    the noise-free case (nu_0 = 0) where the normalized value is the payoff.
    """

    model_config = ConfigDict(frozen=True)

    l: float = Field(10.0, gt=0)
    m: float = 50.0
    alpha: float = Field(2.0, ge=1)
    p_tx_dbm: float = 23.0
    p_j_dbm: float = 23.0
    noise_density_dbm_hz: Optional[float] = None
    bandwidth_hz: float = Field(20e6, gt=0)
    shadow_var_db: float = Field(0.0, ge=0)
    reward: RewardMode = RewardMode.NORMALIZED

    @model_validator(mode="after")
    def check_segment(self):
        if not self.l < self.m:
            raise ValueError(f"need 0 < l < m, got l={self.l}, m={self.m}")
        return self

    @property
    def is_noiseless(self) -> bool:
        return self.noise_density_dbm_hz is None

    @classmethod
    def small(cls, alpha: float = 2.0) -> "ScenarioConfig":
        return cls(l=10.0, m=50.0, alpha=alpha)

    @classmethod
    def vehicular(cls, alpha: float = 2.0) -> "ScenarioConfig":
        return cls(
            l=10.0,
            m=1000.0,
            alpha=alpha,
            p_tx_dbm=23.0,
            p_j_dbm=23.0,
            noise_density_dbm_hz=-174.0,
            bandwidth_hz=20e6,
        )

    @classmethod
    def gain(cls, alpha: float = 2.0) -> "ScenarioConfig":
        return cls(
            l=10.0,
            m=570.0,
            alpha=alpha,
            noise_density_dbm_hz=-174.0,
            bandwidth_hz=20e6,
            shadow_var_db=2.5,
            reward=RewardMode.SPECTRAL_EFFICIENCY,
        )


class PositionPair(BaseModel):
    model_config = ConfigDict(frozen=True)

    x: float
    y: float

    def check_within(self, cfg: ScenarioConfig) -> "PositionPair":
        if not (cfg.l <= self.x <= cfg.m and cfg.l <= self.y <= cfg.m):
            raise ValueError(f"positions ({self.x}, {self.y}) outside [{cfg.l}, {cfg.m}]")
        return self


class GridSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_positions: int = Field(9, ge=2)
    l: float = Field(10.0, gt=0)
    m: float = 50.0
    max_step: int = Field(2, ge=1, le=2)

    @model_validator(mode="after")
    def check_segment(self):
        if not self.l < self.m:
            raise ValueError(f"need 0 < l < m, got l={self.l}, m={self.m}")
        return self

    @property
    def step(self) -> float:
        return (self.m - self.l) / (self.n_positions - 1)

    @property
    def n_actions(self) -> int:
        return 2 * self.max_step + 1

    def positions(self) -> np.ndarray:
        return np.linspace(self.l, self.m, self.n_positions)

    def coordinate(self, idx: int) -> float:
        return float(self.positions()[idx])

    def nearest_index(self, coordinate: float) -> int:
        return int(np.argmin(np.abs(self.positions() - coordinate)))

    @classmethod
    def for_scenario(cls, cfg: ScenarioConfig, n_positions: int = 9, max_step: int = 2):
        return cls(n_positions=n_positions, l=cfg.l, m=cfg.m, max_step=max_step)


class MixedStrategy(BaseModel):
    model_config = ConfigDict(frozen=True)

    support: tuple[float, ...]
    probs: tuple[float, ...]

    @model_validator(mode="after")
    def check_distribution(self):
        if len(self.support) != len(self.probs) or not self.support:
            raise ValueError("support and probs must be non-empty and of equal length")
        if any(p < 0 for p in self.probs):
            raise ValueError(f"negative probability in {self.probs}")
        if abs(sum(self.probs) - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {sum(self.probs)}, not 1")
        return self

    @property
    def is_pure(self) -> bool:
        return sum(1 for p in self.probs if p > 0) == 1

    @classmethod
    def pure(cls, position: float) -> "MixedStrategy":
        return cls(support=(position,), probs=(1.0,))


class StaticEquilibrium(BaseModel):
    model_config = ConfigDict(frozen=True)

    jammer_pos: float
    receiver_strategy: MixedStrategy
    game_value: float = Field(ge=0)
    # Upper end of R's support; equals m unless noise pulls it inward.
    upper_support: Optional[float] = None
    iterations: int = 0
