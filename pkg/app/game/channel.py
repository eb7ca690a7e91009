"""
Channel model of the receiver/jammer segment.

The access point sits at the origin, R at coordinate x and J at coordinate y.
Gains follow a log-distance path loss with an optional additive log-normal
shadowing term; the normalized value |x - y|^alpha / x^alpha is the
noise-free, equal-power reduction of the SNJR.
"""

import numpy as np

from app.game.models import PositionPair, ScenarioConfig
from app.utils.errors import DomainError
from app.utils.logger import get_logger

logger = get_logger(__name__)

PATH_LOSS_INTERCEPT_DB = 47.86
MIN_DISTANCE_M = 1.0


def _dbm_to_mw(dbm):
    return np.power(10.0, np.asarray(dbm, dtype=float) / 10.0)


def value(x, y, alpha: float):
    """Normalized payoff of R. Works elementwise on arrays; returns a float for scalars."""
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr <= 0):
        raise DomainError(f"receiver coordinate must be positive, got {x}")
    result = np.abs(x_arr - np.asarray(y, dtype=float)) ** alpha / x_arr**alpha
    return float(result) if result.ndim == 0 else result


def channel_gain_db(distance, alpha: float, shadow=0.0):
    """Gain in dB; distances below MIN_DISTANCE_M are clamped to it."""
    d = np.asarray(distance, dtype=float)
    if np.any(d <= 0):
        raise DomainError(f"distance must be positive, got {distance}")
    d = np.maximum(d, MIN_DISTANCE_M)
    gain = -(PATH_LOSS_INTERCEPT_DB + 10.0 * alpha * np.log10(d) + np.asarray(shadow, dtype=float))
    return float(gain) if gain.ndim == 0 else gain


def noise_power_mw(cfg: ScenarioConfig) -> float:
    if cfg.is_noiseless:
        return 0.0
    return float(_dbm_to_mw(cfg.noise_density_dbm_hz) * cfg.bandwidth_hz)


def _snjr(x, y, cfg: ScenarioConfig, shadow_r=0.0, shadow_j=0.0):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    jam_distance = np.maximum(np.abs(x - y), MIN_DISTANCE_M)
    g_r = _dbm_to_mw(channel_gain_db(x, cfg.alpha, shadow_r))
    g_j = _dbm_to_mw(channel_gain_db(jam_distance, cfg.alpha, shadow_j))
    signal = g_r * _dbm_to_mw(cfg.p_tx_dbm)
    interference = noise_power_mw(cfg) + g_j * _dbm_to_mw(cfg.p_j_dbm)
    return signal / interference


def snjr(pair: PositionPair, cfg: ScenarioConfig, shadow_r: float = 0.0, shadow_j: float = 0.0) -> float:
    """Signal to noise plus jamming ratio in linear units."""
    pair.check_within(cfg)
    return float(_snjr(pair.x, pair.y, cfg, shadow_r, shadow_j))


def shadowing_draws(cfg: ScenarioConfig, rng: np.random.Generator, size=None):
    if cfg.shadow_var_db == 0:
        return np.zeros(size) if size is not None else 0.0
    return rng.normal(0.0, np.sqrt(cfg.shadow_var_db), size=size)


def spectral_efficiency(pair: PositionPair, cfg: ScenarioConfig, rng: np.random.Generator | None = None) -> float:
    """log2(1 + SNJR) in bits/s/Hz with independent shadowing on the AP and jammer links."""
    if cfg.shadow_var_db > 0 and rng is None:
        raise ValueError("a random generator is required when shadowing is enabled")
    shadow_r = shadowing_draws(cfg, rng)
    shadow_j = shadowing_draws(cfg, rng)
    return float(np.log2(1.0 + snjr(pair, cfg, shadow_r, shadow_j)))


def receiver_utility(x, y, cfg: ScenarioConfig):
    """
    Deterministic static-game payoff of R: the shadowing-free SNJR.

    Noise-free configs use the normalized value, which is the SNJR with the
    path-loss intercept and equal powers cancelled. With a noise floor the
    SNJR itself is used, so noise can pull R's best position inward.
    """
    if cfg.is_noiseless:
        return value(x, y, cfg.alpha)
    result = _snjr(x, y, cfg)
    return float(result) if np.ndim(result) == 0 else result


def payoff_curves(cfg: ScenarioConfig, ys, n_points: int = 401) -> tuple[np.ndarray, np.ndarray]:
    """R's payoff along an x grid for each jammer position in ys; rows follow ys."""
    xs = np.linspace(cfg.l, cfg.m, n_points)
    curves = np.vstack([receiver_utility(xs, y, cfg) for y in ys])
    return xs, curves


def equilibrium_payoff_curve(cfg: ScenarioConfig, n_points: int = 401) -> tuple[np.ndarray, np.ndarray]:
    """R's payoff along x with J parked at its static equilibrium position."""
    from app.game import static_game

    if cfg.is_noiseless:
        j = static_game.nash_noiseless(cfg.l, cfg.m, cfg.alpha).jammer_pos
    else:
        j = static_game.nash_with_noise(cfg).jammer_pos
    logger.debug(f"equilibrium jammer position for curve: {j:.4f} m")
    xs, curves = payoff_curves(cfg, [j], n_points)
    return xs, curves[0]
