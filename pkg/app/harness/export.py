from pathlib import Path
from typing import Any, Iterable

import numpy as np
import pandas as pd
from pydantic import BaseModel

from app.game.channel import equilibrium_payoff_curve, payoff_curves
from app.game.models import ScenarioConfig
from app.harness.metrics import RunMetrics, late_window_stats, moving_average
from app.utils.errors import ContractViolation, ExportError
from app.utils.logger import get_logger

logger = get_logger(__name__)

SUMMARY_FILE = "summary.json"
INDEXED_FRAMES = ("occupancy.csv", "value_r.csv", "value_j.csv", "weighted_reward.csv")


class RunSummary(BaseModel):
    config: dict[str, Any]
    total_steps: int
    late_window_mean: float
    late_window_std: float
    wall_clock_s: float
    files: list[str]


def _grid_frame(grid: np.ndarray, prefix: str) -> pd.DataFrame:
    frame = pd.DataFrame(grid, columns=[f"{prefix}{j}" for j in range(grid.shape[1])])
    frame.index.name = "x_idx"
    return frame


def _metric_frames(metrics: RunMetrics, ma_window: int) -> dict[str, pd.DataFrame]:
    steps = np.arange(metrics.total_steps)
    frames = {
        "rewards.csv": pd.DataFrame(
            {"step": steps, "reward_r": metrics.rewards, "moving_average": moving_average(metrics.rewards, ma_window)}
        ),
        "trace.csv": pd.DataFrame({"step": steps, "x_idx": metrics.trace[:, 0], "y_idx": metrics.trace[:, 1]}),
        "occupancy.csv": _grid_frame(metrics.occupancy, "y"),
    }
    for name, grid in (("value_r.csv", metrics.value_grid_r), ("value_j.csv", metrics.value_grid_j)):
        if grid is None:
            continue
        # G3 tables are indexed by own position only.
        frames[name] = _grid_frame(grid if grid.ndim == 2 else grid[:, None], "opp" if grid.ndim == 2 else "v")
    if metrics.weighted_reward is not None:
        frames["weighted_reward.csv"] = _grid_frame(metrics.weighted_reward, "y")
    return frames


def export(
    metrics: RunMetrics,
    config: BaseModel,
    path: str | Path,
    formats: Iterable[str] = ("csv", "json"),
    ma_window: int = 5_000,
) -> list[Path]:
    """
    Writes the run into the directory `path`: one CSV per series or matrix
    and a summary.json echoing the config with late-window statistics and
    the list of files written.
    """
    formats = set(formats)
    if not formats <= {"csv", "json"}:
        raise ContractViolation(f"unknown export formats {formats - {'csv', 'json'}}")
    path = Path(path)
    written: list[Path] = []
    try:
        path.mkdir(parents=True, exist_ok=True)
        if "csv" in formats:
            for name, frame in _metric_frames(metrics, ma_window).items():
                frame.to_csv(path / name, index=name in INDEXED_FRAMES)
                written.append(path / name)
        if "json" in formats:
            mean, std = late_window_stats(metrics.rewards)
            summary = RunSummary(
                config=config.model_dump(mode="json"),
                total_steps=metrics.total_steps,
                late_window_mean=mean,
                late_window_std=std,
                wall_clock_s=metrics.wall_clock_s,
                files=[p.name for p in written],
            )
            (path / SUMMARY_FILE).write_text(summary.model_dump_json(indent=2))
            written.append(path / SUMMARY_FILE)
    except OSError as e:
        raise ExportError(path, e) from e
    logger.info(f"Wrote {len(written)} files to {path}")
    return written


def read_summary(path: str | Path) -> RunSummary:
    path = Path(path)
    if path.is_dir():
        path = path / SUMMARY_FILE
    return RunSummary.model_validate_json(path.read_text())


def export_value_table(values: np.ndarray, path: str | Path) -> Path:
    """Oracle value table as CSV, rows = x index, columns = y index."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        _grid_frame(values, "y").to_csv(path)
    except OSError as e:
        raise ExportError(path, e) from e
    return path


def export_payoff_curves(cfg: ScenarioConfig, path: str | Path, ys=None, n_points: int = 401) -> Path:
    """
    R's payoff along the segment as CSV: column x, one u_y<position> column
    per jammer position in ys (five evenly spaced ones by default) and an
    equilibrium column with J parked at its static equilibrium position.
    """
    path = Path(path)
    ys = np.linspace(cfg.l, cfg.m, 5) if ys is None else np.asarray(ys, dtype=float)
    xs, curves = payoff_curves(cfg, ys, n_points)
    _, at_equilibrium = equilibrium_payoff_curve(cfg, n_points)
    frame = pd.DataFrame({"x": xs, **{f"u_y{y:g}": row for y, row in zip(ys, curves)}, "equilibrium": at_equilibrium})
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False)
    except OSError as e:
        raise ExportError(path, e) from e
    return path
