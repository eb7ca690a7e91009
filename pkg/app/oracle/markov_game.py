"""
Exact reference solutions of the complete-information mobility games.

Both solvers work on the normalized payoff table and discount every backup
by gamma. The alternating game backs up one half-turn at a time, so its
discount applies per half-turn.
"""

from dataclasses import dataclass, field

import numpy as np

from app.game.dynamic_env import payoff_table
from app.game.models import GridSpec, ScenarioConfig
from app.oracle.matrix_game import FictitiousPlayState, PayoffMatrix, fictitious_play_batch, matrix_game_lp
from app.utils.errors import ContractViolation
from app.utils.logger import get_logger

logger = get_logger(__name__)

RECEIVER_TURN, JAMMER_TURN = 0, 1


@dataclass
class ValueIterationResult:
    values: np.ndarray
    residuals: list[float] = field(default_factory=list)
    converged: bool = False
    fp_gap: float = 0.0

    @property
    def iterations(self) -> int:
        return len(self.residuals)

    def residuals_monotone(self, slack: float = 1e-12) -> bool:
        """Sup-norm changes never grow after the first sweep."""
        r = np.asarray(self.residuals)
        return bool(np.all(r[2:] <= r[1:-1] + slack)) if len(r) > 2 else True


def _shift_tables(grid: GridSpec):
    """For each delta: the target index per position and whether the move is legal."""
    idx = np.arange(grid.n_positions)
    deltas = np.arange(-grid.max_step, grid.max_step + 1)
    targets = idx[None, :] + deltas[:, None]
    legal = (targets >= 0) & (targets < grid.n_positions)
    return deltas, np.clip(targets, 0, grid.n_positions - 1), legal


def _check_discount(gamma: float):
    if not 0 <= gamma < 1:
        raise ContractViolation(f"discount must lie in [0, 1), got {gamma}")


def _alternating_backups(payoff: np.ndarray, v: np.ndarray, gamma: float, grid: GridSpec):
    """Q-values of the mover for every (x, y, delta); illegal moves are -inf for R and +inf for J."""
    _, targets, legal = _shift_tables(grid)
    after_r = payoff + gamma * v[:, :, JAMMER_TURN]
    after_j = payoff + gamma * v[:, :, RECEIVER_TURN]
    # q_r[x, y, d] = after_r[x + d, y]
    q_r = np.transpose(after_r[targets, :], (1, 2, 0))
    q_r = np.where(legal.T[:, None, :], q_r, -np.inf)
    # q_j[x, y, d] = after_j[x, y + d]
    q_j = after_j[:, targets.T]
    q_j = np.where(legal.T[None, :, :], q_j, np.inf)
    return q_r, q_j


def alternating_minimax_vi(
    grid: GridSpec, cfg: ScenarioConfig, gamma: float, tol: float = 1e-9, max_iter: int = 100_000
) -> ValueIterationResult:
    """
    Values of the turn-based game indexed [x_idx, y_idx, turn] from R's side;
    turn 0 means R moves next.
    """
    _check_discount(gamma)
    payoff = payoff_table(grid, cfg)
    v = np.zeros((grid.n_positions, grid.n_positions, 2))
    result = ValueIterationResult(values=v)
    for it in range(max_iter):
        q_r, q_j = _alternating_backups(payoff, v, gamma, grid)
        v_next = np.stack([q_r.max(axis=2), q_j.min(axis=2)], axis=2)
        residual = float(np.max(np.abs(v_next - v)))
        v = v_next
        result.residuals.append(residual)
        if residual < tol:
            result.converged = True
            break
    result.values = v
    logger.info(f"alternating VI: {result.iterations} sweeps, residual {result.residuals[-1]:.2e}")
    return result


def greedy_policies(result: ValueIterationResult, grid: GridSpec, cfg: ScenarioConfig, gamma: float):
    """Deltas chosen by R (maximizer) and J (minimizer) in every (x, y); lowest delta wins ties."""
    deltas, _, _ = _shift_tables(grid)
    q_r, q_j = _alternating_backups(payoff_table(grid, cfg), result.values, gamma, grid)
    return deltas[np.argmax(q_r, axis=2)], deltas[np.argmin(q_j, axis=2)]


def greedy_cycle_average(result: ValueIterationResult, grid: GridSpec, cfg: ScenarioConfig, gamma: float) -> float:
    """
    Long-run average half-turn payoff of R when both play the greedy
    policies, averaged over uniformly drawn starts (positions and first mover).

    The joint policy is deterministic, so every start ends in a cycle and
    the long-run average equals the cycle mean.
    """
    payoff = payoff_table(grid, cfg)
    policy_r, policy_j = greedy_policies(result, grid, cfg, gamma)
    averages = []
    for x0 in range(grid.n_positions):
        for y0 in range(grid.n_positions):
            for turn0 in (RECEIVER_TURN, JAMMER_TURN):
                state = (x0, y0, turn0)
                seen: dict[tuple[int, int, int], int] = {}
                rewards: list[float] = []
                while state not in seen:
                    seen[state] = len(rewards)
                    x, y, turn = state
                    if turn == RECEIVER_TURN:
                        x += int(policy_r[x, y])
                    else:
                        y += int(policy_j[x, y])
                    rewards.append(float(payoff[x, y]))
                    state = (x, y, 1 - turn)
                averages.append(float(np.mean(rewards[seen[state] :])))
    return float(np.mean(averages))


def _stage_matrices(payoff: np.ndarray, v: np.ndarray, gamma: float, grid: GridSpec):
    """Padded per-state matrices [x, y, a_r, a_j] plus row/col legality."""
    _, targets, legal = _shift_tables(grid)
    after = payoff + gamma * v
    # stage[x, y, i, j] = after[x + d_i, y + d_j]
    stage = after[targets.T[:, None, :, None], targets.T[None, :, None, :]]
    row_legal = np.broadcast_to(legal.T[:, None, :], stage.shape[:3])
    col_legal = np.broadcast_to(legal.T[None, :, :], stage.shape[:3])
    return stage, row_legal, col_legal


def _solve_stage_lp(stage, row_legal, col_legal) -> np.ndarray:
    n = stage.shape[0]
    out = np.empty((n, n))
    for x in range(n):
        for y in range(n):
            sub = stage[x, y][np.ix_(row_legal[x, y], col_legal[x, y])]
            out[x, y] = matrix_game_lp(PayoffMatrix(entries=sub)).value
    return out


def _solve_stage_fp(stage, row_legal, col_legal, fp_iters: int, counts):
    n, _, k, _ = stage.shape
    entries = np.where(row_legal[..., :, None] & col_legal[..., None, :], stage, 0.0).reshape(n * n, k, k)
    rows_ok = row_legal.reshape(n * n, k)
    cols_ok = col_legal.reshape(n * n, k)
    state = FictitiousPlayState.empty(entries.shape)
    if counts is not None:
        # Warm start: keep the empirical play, re-price it against the new stage games.
        state.row_counts, state.col_counts = counts
        state.row_cum = np.einsum("bij,bj->bi", entries, state.col_counts)
        state.col_cum = np.einsum("bi,bij->bj", state.row_counts, entries)
    state.row_cum = np.where(rows_ok, state.row_cum, -np.inf)
    state.col_cum = np.where(cols_ok, state.col_cum, np.inf)
    fictitious_play_batch(entries, fp_iters, state)

    row = state.row_counts / state.row_counts.sum(axis=1, keepdims=True)
    col = state.col_counts / state.col_counts.sum(axis=1, keepdims=True)
    lower = np.min(np.where(cols_ok, np.einsum("bi,bij->bj", row, entries), np.inf), axis=1)
    upper = np.max(np.where(rows_ok, np.einsum("bij,bj->bi", entries, col), -np.inf), axis=1)
    values = ((lower + upper) / 2).reshape(n, n)
    return values, float(np.max(upper - lower)), (state.row_counts, state.col_counts)


def shapley_vi(
    grid: GridSpec,
    cfg: ScenarioConfig,
    gamma: float,
    tol: float = 1e-9,
    fp_iters: int = 200_000,
    solver: str = "lp",
    max_iter: int = 10_000,
) -> ValueIterationResult:
    """
    Values of the simultaneous-move game indexed [x_idx, y_idx].

    solver="lp" solves every stage game exactly; solver="fictitious" runs
    warm-started fictitious play on all stage games at once and records the
    widest remaining bound gap in fp_gap.
    """
    _check_discount(gamma)
    if solver not in ("lp", "fictitious"):
        raise ContractViolation(f"unknown stage solver {solver!r}")
    payoff = payoff_table(grid, cfg)
    v = np.zeros((grid.n_positions, grid.n_positions))
    result = ValueIterationResult(values=v)
    counts = None
    for it in range(max_iter):
        stage, row_legal, col_legal = _stage_matrices(payoff, v, gamma, grid)
        if solver == "lp":
            v_next = _solve_stage_lp(stage, row_legal, col_legal)
        else:
            v_next, result.fp_gap, counts = _solve_stage_fp(stage, row_legal, col_legal, fp_iters, counts)
        residual = float(np.max(np.abs(v_next - v)))
        v = v_next
        result.residuals.append(residual)
        logger.debug(f"shapley sweep {it + 1}: residual {residual:.3e}")
        if residual < max(tol, result.fp_gap):
            result.converged = True
            break
    result.values = v
    if not result.converged:
        logger.warning(f"shapley VI stopped after {max_iter} sweeps, residual {result.residuals[-1]:.2e}")
    logger.info(f"shapley VI: {result.iterations} sweeps, residual {result.residuals[-1]:.2e}, gap {result.fp_gap:.2e}")
    return result


def shapley_average_value(values: np.ndarray, gamma: float) -> float:
    """Per-step average payoff implied by discounted values: (1 - gamma) * mean V."""
    return float((1 - gamma) * np.mean(values))
