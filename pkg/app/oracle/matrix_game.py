"""
Zero-sum matrix game solvers. The row player (R) maximizes, the column
player (J) minimizes.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from app.utils.errors import ContractViolation, ConvergenceError
from app.utils.logger import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class PayoffMatrix:
    entries: np.ndarray
    row_labels: np.ndarray | None = None
    col_labels: np.ndarray | None = None

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=float)
        if entries.ndim != 2 or entries.size == 0:
            raise ContractViolation(f"payoff matrix must be 2-D and non-empty, got shape {entries.shape}")
        if not np.all(np.isfinite(entries)):
            raise ContractViolation("payoff matrix has non-finite entries")
        object.__setattr__(self, "entries", entries)

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape


@dataclass
class MatrixGameSolution:
    value: float
    row_strategy: np.ndarray
    col_strategy: np.ndarray
    lower_bound: float
    upper_bound: float
    iterations: int = 0

    @property
    def gap(self) -> float:
        return self.upper_bound - self.lower_bound


@dataclass
class FictitiousPlayState:
    """Cumulative payoffs and play counts; passing it back in resumes play."""

    row_cum: np.ndarray
    col_cum: np.ndarray
    row_counts: np.ndarray
    col_counts: np.ndarray
    iterations: int = 0

    @classmethod
    def empty(cls, shape: tuple[int, ...]) -> "FictitiousPlayState":
        *batch, m, n = shape
        return cls(
            row_cum=np.zeros((*batch, m)),
            col_cum=np.zeros((*batch, n)),
            row_counts=np.zeros((*batch, m)),
            col_counts=np.zeros((*batch, n)),
        )


def _fictitious_play_batch(entries: np.ndarray, iters: int, state: FictitiousPlayState) -> FictitiousPlayState:
    """
    Plays `iters` rounds on a stack of matrices of shape (batch, m, n).

    Ties go to the lowest index so runs are reproducible.
    """
    batch = np.arange(entries.shape[0])
    for _ in range(iters):
        row = np.argmax(state.row_cum, axis=1)
        state.row_counts[batch, row] += 1
        state.col_cum += entries[batch, row, :]
        col = np.argmin(state.col_cum, axis=1)
        state.col_counts[batch, col] += 1
        state.row_cum += entries[batch, :, col]
    state.iterations += iters
    return state


def _bounds(entries: np.ndarray, row: np.ndarray, col: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # What R's empirical mixture guarantees, and what J's caps R at.
    lower = np.min(np.einsum("...i,...ij->...j", row, entries), axis=-1)
    upper = np.max(np.einsum("...ij,...j->...i", entries, col), axis=-1)
    return lower, upper


def fictitious_play(m: PayoffMatrix, iters: int, state: FictitiousPlayState | None = None) -> MatrixGameSolution:
    if iters < 1:
        raise ContractViolation(f"iters must be >= 1, got {iters}")
    entries = m.entries[None, :, :]
    state = state or FictitiousPlayState.empty(entries.shape)
    _fictitious_play_batch(entries, iters, state)

    row = state.row_counts[0] / state.row_counts[0].sum()
    col = state.col_counts[0] / state.col_counts[0].sum()
    lower, upper = _bounds(m.entries, row, col)
    logger.debug(f"fictitious play after {state.iterations} rounds: [{lower:.6f}, {upper:.6f}]")
    return MatrixGameSolution(
        value=float((lower + upper) / 2),
        row_strategy=row,
        col_strategy=col,
        lower_bound=float(lower),
        upper_bound=float(upper),
        iterations=state.iterations,
    )


def fictitious_play_batch(
    entries: np.ndarray, iters: int, state: FictitiousPlayState | None = None
) -> tuple[np.ndarray, np.ndarray, FictitiousPlayState]:
    """Vectorized fictitious play over a (batch, m, n) stack; returns values, gaps and the state."""
    state = state or FictitiousPlayState.empty(entries.shape)
    _fictitious_play_batch(entries, iters, state)
    row = state.row_counts / state.row_counts.sum(axis=1, keepdims=True)
    col = state.col_counts / state.col_counts.sum(axis=1, keepdims=True)
    lower, upper = _bounds(entries, row, col)
    return (lower + upper) / 2, upper - lower, state


def matrix_game_lp(m: PayoffMatrix) -> MatrixGameSolution:
    """Exact solution via the standard maximin linear program."""
    entries = m.entries
    rows, cols = entries.shape
    # Variables: v, p_1..p_rows. Maximize v s.t. v <= sum_i p_i A_ij for every column j.
    c = np.zeros(rows + 1)
    c[0] = -1.0
    a_ub = np.hstack([np.ones((cols, 1)), -entries.T])
    b_ub = np.zeros(cols)
    a_eq = np.hstack([[[0.0]], np.ones((1, rows))])
    bounds = [(None, None)] + [(0, None)] * rows
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=[1.0], bounds=bounds, method="highs-ds")
    if not res.success:
        raise ConvergenceError(f"matrix game LP failed: {res.message}", res.nit, float("nan"))

    row = np.clip(res.x[1:], 0, None)
    row /= row.sum()
    # Duals of the column constraints are J's equilibrium mixture.
    col = np.clip(-res.ineqlin.marginals, 0, None)
    col = col / col.sum() if col.sum() > 0 else np.full(cols, 1.0 / cols)
    lower, upper = _bounds(entries, row, col)
    return MatrixGameSolution(
        value=float(res.x[0]),
        row_strategy=row,
        col_strategy=col,
        lower_bound=float(lower),
        upper_bound=float(upper),
        iterations=int(res.nit),
    )


@dataclass
class StaticOracleReport:
    solution: MatrixGameSolution
    positions: np.ndarray = field(repr=False)

    @property
    def jammer_position(self) -> float:
        return float(self.positions[np.argmax(self.solution.col_strategy)])

    @property
    def receiver_support(self) -> np.ndarray:
        return self.positions[self.solution.row_strategy > 1e-3]
