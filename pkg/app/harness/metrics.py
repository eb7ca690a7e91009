from dataclasses import dataclass, field

import numpy as np

from app.utils.errors import ContractViolation


@dataclass
class RunMetrics:
    rewards: np.ndarray
    trace: np.ndarray
    occupancy: np.ndarray
    value_grid_r: np.ndarray | None = None
    value_grid_j: np.ndarray | None = None
    # occupancy times the per-pair payoff; None when rewards are random draws
    weighted_reward: np.ndarray | None = None
    wall_clock_s: float = 0.0
    extra: dict[str, float] = field(default_factory=dict)

    @property
    def total_steps(self) -> int:
        return len(self.rewards)


def moving_average(series, w: int) -> np.ndarray:
    """Trailing mean; the first w-1 entries average whatever prefix exists."""
    if w < 1:
        raise ContractViolation(f"window must be >= 1, got {w}")
    series = np.asarray(series, dtype=float)
    if series.size == 0:
        return series
    csum = np.concatenate([[0.0], np.cumsum(series)])
    ends = np.arange(1, series.size + 1)
    starts = np.maximum(ends - w, 0)
    return (csum[ends] - csum[starts]) / (ends - starts)


def joint_occupancy(trace, n_positions: int) -> np.ndarray:
    trace = np.asarray(trace, dtype=int)
    if trace.size == 0:
        raise ContractViolation("occupancy of an empty trace")
    counts = np.zeros((n_positions, n_positions))
    np.add.at(counts, (trace[:, 0], trace[:, 1]), 1.0)
    return counts / len(trace)


def weighted_reward_grid(occupancy: np.ndarray, payoff: np.ndarray) -> np.ndarray:
    if occupancy.shape != payoff.shape:
        raise ContractViolation(f"shape mismatch {occupancy.shape} vs {payoff.shape}")
    return occupancy * payoff


def late_window_stats(series, fraction: float = 0.1) -> tuple[float, float]:
    """Mean and standard deviation of the last `fraction` of the series."""
    if not 0 < fraction <= 1:
        raise ContractViolation(f"fraction must lie in (0, 1], got {fraction}")
    series = np.asarray(series, dtype=float)
    if series.size == 0:
        raise ContractViolation("statistics of an empty series")
    tail = series[-max(1, int(round(fraction * series.size))) :]
    return float(tail.mean()), float(tail.std())


def plateau_step(series, window: int, band: float = 0.1) -> int:
    """
    First step from which the moving average stays within +-band (relative)
    of its final value. A series that never settles returns its length - 1.
    """
    ma = moving_average(series, window)
    final = ma[-1]
    tolerance = band * abs(final) if final != 0 else band
    outside = np.nonzero(np.abs(ma - final) > tolerance)[0]
    return 0 if outside.size == 0 else int(min(outside[-1] + 1, ma.size - 1))
