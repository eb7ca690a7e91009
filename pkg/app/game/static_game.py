"""
One-shot positioning game: R picks x, J picks y in [l, m], payoff u_R(x, y).

Noise-free equilibria are in closed form. With noise the far support point
W and the jammer position are found numerically by alternating an
indifference root with a grid argmax until the jammer position settles.
"""

import numpy as np
from scipy import optimize

from app.game.channel import receiver_utility
from app.game.models import MixedStrategy, ScenarioConfig, StaticEquilibrium
from app.oracle.matrix_game import PayoffMatrix, StaticOracleReport, fictitious_play, matrix_game_lp
from app.types.general import Player
from app.utils.errors import ConvergenceError, DomainError
from app.utils.logger import get_logger

logger = get_logger(__name__)

DEFAULT_GRID_N = 4001
MAX_FIXED_POINT_ITERATIONS = 100
INDIFFERENCE_TOLERANCE = 1e-6
TIE_RTOL = 1e-5


def _check_segment(l: float, m: float, alpha: float = 1.0):
    if l <= 0 or l >= m:
        raise DomainError(f"need 0 < L < M, got L={l}, M={m}")
    if alpha < 1:
        raise DomainError(f"path-loss exponent must be >= 1, got {alpha}")


def nash_noiseless(l: float, m: float, alpha: float) -> StaticEquilibrium:
    _check_segment(l, m, alpha)
    p_star = l / (l + m)
    return StaticEquilibrium(
        jammer_pos=2 * l * m / (l + m),
        receiver_strategy=MixedStrategy(support=(l, m), probs=(p_star, 1 - p_star)),
        game_value=((m - l) / (m + l)) ** alpha,
        upper_support=m,
    )


def jammer_asymptote(l: float) -> float:
    """Limit of the noise-free jammer position as M grows without bound."""
    return 2 * l


def expected_payoff(receiver: MixedStrategy, y, cfg: ScenarioConfig):
    return sum(p * receiver_utility(x, y, cfg) for x, p in zip(receiver.support, receiver.probs))


def _local_maxima(values: np.ndarray) -> np.ndarray:
    padded = np.concatenate(([-np.inf], values, [-np.inf]))
    return (values >= padded[:-2]) & (values >= padded[2:])


def best_response_receiver(y: float, cfg: ScenarioConfig, grid_n: int = DEFAULT_GRID_N) -> frozenset[float]:
    if not cfg.l <= y <= cfg.m:
        raise DomainError(f"jammer position {y} outside [{cfg.l}, {cfg.m}]")
    if cfg.is_noiseless:
        j_star = 2 * cfg.l * cfg.m / (cfg.l + cfg.m)
        if abs(y - j_star) < INDIFFERENCE_TOLERANCE * (cfg.m - cfg.l):
            return frozenset({cfg.l, cfg.m})
        return frozenset({cfg.m}) if y < j_star else frozenset({cfg.l})

    xs = np.linspace(cfg.l, cfg.m, grid_n)
    u = receiver_utility(xs, y, cfg)
    best = u.max()
    near_best = u >= best - TIE_RTOL * abs(best)
    return frozenset(float(x) for x in xs[near_best & _local_maxima(u)])


def best_response_jammer(receiver: MixedStrategy, cfg: ScenarioConfig, grid_n: int = DEFAULT_GRID_N) -> float:
    if receiver.is_pure:
        return next(x for x, p in zip(receiver.support, receiver.probs) if p > 0)
    ys = np.linspace(cfg.l, cfg.m, grid_n)
    return float(ys[np.argmin(expected_payoff(receiver, ys, cfg))])


def indifference_point(cfg: ScenarioConfig, upper: float) -> float:
    """Jammer position where R is indifferent between x = L and x = upper."""
    if not cfg.l < upper <= cfg.m:
        raise DomainError(f"upper must lie in (L, M], got {upper}")
    if cfg.is_noiseless:
        return 2 * cfg.l * upper / (cfg.l + upper)

    eps = 1e-9 * (cfg.m - cfg.l)

    def gap(y):
        return receiver_utility(cfg.l, y, cfg) - receiver_utility(upper, y, cfg)

    try:
        return float(optimize.bisect(gap, cfg.l + eps, upper - eps, xtol=1e-10 * upper, maxiter=500))
    except (ValueError, RuntimeError) as e:
        raise ConvergenceError(f"indifference bracket failed for upper={upper}: {e}", 0, float("nan")) from e


def _far_argmax(cfg: ScenarioConfig, y: float, xs: np.ndarray) -> float:
    far = xs[xs > y]
    return float(far[np.argmax(receiver_utility(far, y, cfg))])


def _jammer_slope(x: float, y: float, cfg: ScenarioConfig) -> float:
    h = 1e-6 * (cfg.m - cfg.l)
    return (receiver_utility(x, y + h, cfg) - receiver_utility(x, y - h, cfg)) / (2 * h)


def nash_with_noise(cfg: ScenarioConfig, grid_n: int = DEFAULT_GRID_N) -> StaticEquilibrium:
    if cfg.is_noiseless:
        raise DomainError("nash_with_noise needs a noise floor; use nash_noiseless")
    xs = np.linspace(cfg.l, cfg.m, grid_n)
    cell = xs[1] - xs[0]

    w = cfg.m
    j = indifference_point(cfg, w)
    moved = np.inf
    for iteration in range(1, MAX_FIXED_POINT_ITERATIONS + 1):
        w = _far_argmax(cfg, j, xs)
        j_next = indifference_point(cfg, w)
        moved = abs(j_next - j)
        j = j_next
        logger.debug(f"noisy equilibrium iteration {iteration}: W={w:.4f} j={j:.6f} moved={moved:.3e}")
        if moved < cell:
            break
    else:
        raise ConvergenceError("noisy equilibrium did not settle", MAX_FIXED_POINT_ITERATIONS, moved)

    # J must have no first-order incentive to leave j under the mixture.
    slope_l = _jammer_slope(cfg.l, j, cfg)
    slope_w = _jammer_slope(w, j, cfg)
    p = -slope_w / (slope_l - slope_w)
    game_value = p * receiver_utility(cfg.l, j, cfg) + (1 - p) * receiver_utility(w, j, cfg)
    logger.info(f"noisy equilibrium: j={j:.4f} m, W={w:.2f} m, p={p:.4f}, value={game_value:.6f}")
    return StaticEquilibrium(
        jammer_pos=j,
        receiver_strategy=MixedStrategy(support=(cfg.l, w), probs=(p, 1 - p)),
        game_value=game_value,
        upper_support=w,
        iterations=iteration,
    )


def stackelberg(
    leader: Player, cfg: ScenarioConfig, allow_mixed_leader: bool = True
) -> tuple[StaticEquilibrium, float]:
    if not cfg.is_noiseless:
        raise DomainError("the Stackelberg characterization holds for the noise-free game")
    equilibrium = nash_noiseless(cfg.l, cfg.m, cfg.alpha)
    if leader is Player.RECEIVER and not allow_mixed_leader:
        # Any revealed pure x is matched by the jammer.
        equilibrium = StaticEquilibrium(
            jammer_pos=cfg.l,
            receiver_strategy=MixedStrategy.pure(cfg.l),
            game_value=0.0,
            upper_support=cfg.l,
        )
    return equilibrium, equilibrium.game_value


def discretized_payoff_matrix(cfg: ScenarioConfig, n_points: int) -> PayoffMatrix:
    xs = np.linspace(cfg.l, cfg.m, n_points)
    entries = receiver_utility(xs[:, None], xs[None, :], cfg)
    return PayoffMatrix(entries=entries, row_labels=xs, col_labels=xs)


def solve_static(cfg: ScenarioConfig) -> StaticEquilibrium:
    """Closed form when the config is noise-free, the numeric fixed point otherwise."""
    if cfg.is_noiseless:
        return nash_noiseless(cfg.l, cfg.m, cfg.alpha)
    return nash_with_noise(cfg)


def static_oracle(cfg: ScenarioConfig, n_points: int = 101, iters: int | None = None) -> StaticOracleReport:
    """Discretized static game solved by fictitious play, or exactly by LP when iters is None."""
    matrix = discretized_payoff_matrix(cfg, n_points)
    solution = matrix_game_lp(matrix) if iters is None else fictitious_play(matrix, iters)
    return StaticOracleReport(solution=solution, positions=matrix.row_labels)
