"""
Command line entry point.

Configuration is layered: preset scenario, then the optional config file,
then explicit flags.
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Any

import pandas as pd
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from app.agents.deep import DeepQAgent, save_weights
from app.agents.tabular import TabularQAgent, save_qtable
from app.config import get_settings
from app.game.models import GridSpec, ScenarioConfig
from app.game.static_game import jammer_asymptote, solve_static, stackelberg, static_oracle
from app.harness.experiment import ExperimentConfig, build_experiment_config, train
from app.harness.export import export, export_payoff_curves, export_value_table, read_summary
from app.harness.metrics import late_window_stats
from app.harness.sweeps import GainExperimentConfig, jammer_behavior_sweep, strategic_gain_experiment
from app.oracle.markov_game import (
    JAMMER_TURN,
    RECEIVER_TURN,
    alternating_minimax_vi,
    greedy_cycle_average,
    shapley_average_value,
    shapley_vi,
)
from app.types.general import AgentKind, GameVariant, Player
from app.utils.errors import ConfigError, ExportError, JammingGameError
from app.utils.general import load_config_file, parse_int_list
from app.utils.logger import console, get_logger

logger = get_logger(__name__)
# Results go to stdout; logs and errors go to the stderr console.
stdout = Console()

EXIT_RUNTIME, EXIT_CONFIG = 1, 2

PRESETS = {
    "small": ScenarioConfig.small,
    "vehicular": ScenarioConfig.vehicular,
    "gain": ScenarioConfig.gain,
}


def _add_scenario_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--config", type=Path, help="key=value config file; flags override its values")
    parser.add_argument("--preset", choices=sorted(PRESETS), default="small")
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--l", type=float)
    parser.add_argument("--m", type=float)
    parser.add_argument("--noise-dbm-hz", type=float, dest="noise_density_dbm_hz")


def _add_grid_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--n-positions", type=int)
    parser.add_argument("--max-step", type=int)


def _add_run_flags(parser: argparse.ArgumentParser, default_agent: str):
    _add_scenario_flags(parser)
    _add_grid_flags(parser)
    parser.add_argument("--game", choices=[g.value for g in GameVariant])
    parser.add_argument("--agent-r", choices=[a.value for a in AgentKind], default=None)
    parser.add_argument("--agent-j", choices=[a.value for a in AgentKind], default=None)
    parser.add_argument("--steps", type=int, dest="total_steps")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--ma-window", type=int)
    parser.add_argument("--out", type=Path, help="output directory (default: JAMGAME_OUTPUT_DIR)")
    for player in ("r", "j"):
        parser.add_argument(
            f"--load-qtable-{player}",
            f"--load-weights-{player}",
            type=Path,
            dest=f"warm_start_{player}",
            help=f"start {player.upper()} from a saved Q-table (tabular) or weights file (deep)",
        )
    parser.add_argument("--save-qtable", type=Path, help="directory for the learned Q-tables and weights (default: the run directory)")
    parser.set_defaults(default_agent=default_agent)


def _pick(args: argparse.Namespace, names: list[str]) -> dict[str, Any]:
    return {n: getattr(args, n) for n in names if getattr(args, n, None) is not None}


def _file_values(args: argparse.Namespace) -> dict[str, Any]:
    return load_config_file(args.config) if getattr(args, "config", None) else {}


def scenario_from_args(args: argparse.Namespace, file_values: dict[str, Any]) -> ScenarioConfig:
    base = PRESETS[args.preset](args.alpha) if args.alpha is not None else PRESETS[args.preset]()
    values = {**base.model_dump(), **file_values.get("scenario", {})}
    values.update(_pick(args, ["alpha", "l", "m", "noise_density_dbm_hz"]))
    return ScenarioConfig(**values)


def experiment_from_args(args: argparse.Namespace) -> ExperimentConfig:
    file_values = _file_values(args)
    scenario = scenario_from_args(args, file_values)
    values: dict[str, Any] = {k: v for k, v in file_values.items() if not isinstance(v, dict)}
    if "steps" in values:
        values["total_steps"] = values.pop("steps")
    for table in ("learning_r", "learning_j", "deep"):
        if table in file_values:
            values[table] = dict(file_values[table])
    values["scenario"] = scenario
    values["grid"] = {**file_values.get("grid", {}), **_pick(args, ["n_positions", "max_step"])}
    values.update(_pick(args, ["game", "agent_r", "agent_j", "total_steps", "seed", "ma_window", "warm_start_r", "warm_start_j"]))
    values.setdefault("agent_r", args.default_agent)
    values.setdefault("agent_j", args.default_agent)
    deep_flags = _pick(args, ["hidden", "batch", "replay", "sync", "learning_rate"])
    if deep_flags:
        values["deep"] = {**values.get("deep", {}), **deep_flags}
    # Learning tables inherit the run length unless they set their own.
    for table in ("learning_r", "learning_j"):
        if table in values:
            values[table].setdefault("total_steps", values.get("total_steps", ExperimentConfig.model_fields["total_steps"].default))
    return build_experiment_config(values)


def _summary_table(title: str, rows: dict[str, Any]) -> Table:
    table = Table(title=title)
    table.add_column("quantity")
    table.add_column("value", justify="right")
    for key, value in rows.items():
        table.add_row(key, f"{value:.6g}" if isinstance(value, float) else str(value))
    return table


def cmd_static_solve(args: argparse.Namespace) -> int:
    cfg = scenario_from_args(args, _file_values(args))
    if args.leader:
        equilibrium, _ = stackelberg(Player(args.leader), cfg, allow_mixed_leader=not args.pure_leader)
    else:
        equilibrium = solve_static(cfg)
    rows = {
        "jammer_pos": equilibrium.jammer_pos,
        "game_value": equilibrium.game_value,
        "upper_support": equilibrium.upper_support,
        "jammer_asymptote": jammer_asymptote(cfg.l),
    }
    if args.curves:
        rows["curves"] = str(export_payoff_curves(cfg, args.curves))
    for i, (x, p) in enumerate(zip(equilibrium.receiver_strategy.support, equilibrium.receiver_strategy.probs)):
        rows[f"receiver_x{i}"] = x
        rows[f"receiver_p{i}"] = p
    if args.json:
        stdout.print_json(json.dumps(rows))
    else:
        stdout.print(_summary_table("Static equilibrium", rows))
    return 0


def _run_and_export(cfg: ExperimentConfig, out: Path | None, save_dir: Path | None = None) -> Path:
    metrics, agents = train(cfg)
    run_dir = (out or get_settings().output_dir) / cfg.run_name
    export(metrics, cfg, run_dir, ma_window=cfg.ma_window)
    save_dir = save_dir or run_dir
    if save_dir != run_dir:
        try:
            save_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise ExportError(save_dir, e) from e
    for player, agent in agents.items():
        if isinstance(agent, TabularQAgent):
            save_qtable(agent.table, save_dir / f"qtable_{player}.txt")
        elif isinstance(agent, DeepQAgent):
            save_weights(agent.net, save_dir / f"weights_{player}.npz")
    mean, std = late_window_stats(metrics.rewards)
    stdout.print(
        _summary_table(
            cfg.run_name,
            {"late_window_mean": mean, "late_window_std": std, "wall_clock_s": metrics.wall_clock_s, "output": str(run_dir)},
        )
    )
    return run_dir


def cmd_simulate(args: argparse.Namespace) -> int:
    _run_and_export(experiment_from_args(args), args.out, args.save_qtable)
    return 0


def cmd_train_deep(args: argparse.Namespace) -> int:
    if args.ma_window is None:
        args.ma_window = 500
    _run_and_export(experiment_from_args(args), args.out, args.save_qtable)
    return 0


def cmd_oracle(args: argparse.Namespace) -> int:
    if not 0 <= args.gamma < 1:
        raise ConfigError(f"--gamma must lie in [0, 1), got {args.gamma}")
    if args.tol <= 0:
        raise ConfigError(f"--tol must be positive, got {args.tol}")
    file_values = _file_values(args)
    cfg = scenario_from_args(args, file_values)
    out = (args.out or get_settings().output_dir) / f"oracle-{args.game}"
    if args.game == "static":
        report = static_oracle(cfg, args.n_points, args.iters)
        rows = {
            "value": report.solution.value,
            "lower_bound": report.solution.lower_bound,
            "upper_bound": report.solution.upper_bound,
            "jammer_position": report.jammer_position,
            "receiver_support": ", ".join(f"{x:.3f}" for x in report.receiver_support),
        }
        stdout.print(_summary_table("Static oracle", rows))
        return 0

    grid_values = {**file_values.get("grid", {}), **_pick(args, ["n_positions", "max_step"])}
    grid = GridSpec(**{"l": cfg.l, "m": cfg.m, **grid_values})
    if args.game == GameVariant.SEQUENTIAL:
        result = alternating_minimax_vi(grid, cfg, args.gamma, args.tol)
        export_value_table(result.values[:, :, RECEIVER_TURN], out / "value_r_moves.csv")
        export_value_table(result.values[:, :, JAMMER_TURN], out / "value_j_moves.csv")
        average = greedy_cycle_average(result, grid, cfg, args.gamma)
    else:
        result = shapley_vi(grid, cfg, args.gamma, args.tol, args.fp_iters, args.solver)
        export_value_table(result.values, out / "value.csv")
        average = shapley_average_value(result.values, args.gamma)
    rows = {
        "iterations": result.iterations,
        "converged": result.converged,
        "residuals_monotone": result.residuals_monotone(),
        "average_payoff": average,
        "fp_gap": result.fp_gap,
        "output": str(out),
    }
    stdout.print(_summary_table(f"{args.game} oracle", rows))
    return 0


def cmd_gain_experiment(args: argparse.Namespace) -> int:
    cfg = GainExperimentConfig(
        **_pick(args, ["runs", "n_positions", "max_step", "total_steps", "seed"]),
        alphas=tuple(float(a) for a in args.alphas.split(",")),
        workers=args.workers or get_settings().workers,
    )
    points = strategic_gain_experiment(cfg)
    frame = pd.DataFrame([{**p.model_dump(), "ratio": p.ratio} for p in points])
    out = (args.out or get_settings().output_dir) / "gain-experiment.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(out, index=False)
    stdout.print(frame.to_string(index=False))
    return 0


def cmd_sweep_jammers(args: argparse.Namespace) -> int:
    base = experiment_from_args(args)
    results = jammer_behavior_sweep(base, list(parse_int_list(args.seeds)), args.out, args.workers or 1)
    frame = pd.DataFrame(
        [{"jammer": kind, "max_step": s, "seed_index": i, "late_window_mean": v} for (kind, s), means in results.items() for i, v in enumerate(means)]
    )
    out = (args.out or get_settings().output_dir) / "jammer-sweep.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(out, index=False)
    stdout.print(frame.groupby(["jammer", "max_step"])["late_window_mean"].mean().to_string())
    return 0


def cmd_show(args: argparse.Namespace) -> int:
    summary = read_summary(args.run_dir)
    rows = {
        "total_steps": summary.total_steps,
        "late_window_mean": summary.late_window_mean,
        "late_window_std": summary.late_window_std,
        "wall_clock_s": summary.wall_clock_s,
        "files": ", ".join(summary.files),
    }
    if args.json:
        stdout.print_json(json.dumps(rows))
    else:
        stdout.print(_summary_table(str(args.run_dir), rows))
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run("app.main:app", host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jamgame", description="Mobile receiver/jammer positioning game.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("static-solve", help="equilibrium of the one-shot game")
    _add_scenario_flags(p)
    p.add_argument("--leader", choices=[pl.value for pl in Player])
    p.add_argument("--pure-leader", action="store_true", help="restrict the leader to pure strategies")
    p.add_argument("--json", action="store_true")
    p.add_argument("--curves", type=Path, help="also write R's payoff curves to this CSV file")
    p.set_defaults(func=cmd_static_solve)

    p = sub.add_parser("simulate", help="train two agents online and export the run")
    _add_run_flags(p, AgentKind.TABULAR.value)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("train-deep", help="simulate with dueling deep Q agents")
    _add_run_flags(p, AgentKind.DEEP.value)
    p.add_argument("--hidden", type=str)
    p.add_argument("--batch", type=int)
    p.add_argument("--replay", type=int)
    p.add_argument("--sync", type=int)
    p.add_argument("--learning-rate", type=float)
    p.set_defaults(func=cmd_train_deep)

    p = sub.add_parser("oracle", help="reference values of the static, g1 or g2 game")
    _add_scenario_flags(p)
    _add_grid_flags(p)
    p.add_argument("--game", choices=["static", "g1", "g2"], required=True)
    p.add_argument("--gamma", type=float, default=0.99)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--solver", choices=["lp", "fictitious"], default="lp")
    p.add_argument("--fp-iters", type=int, default=200_000)
    p.add_argument("--n-points", type=int, default=101)
    p.add_argument("--iters", type=int, help="fictitious play rounds for the static game (default: exact LP)")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("gain-experiment", help="strategic versus random receiver spectral efficiency")
    p.add_argument("--alphas", default="2,2.25,2.5,2.75,3")
    p.add_argument("--runs", type=int)
    p.add_argument("--n-positions", type=int)
    p.add_argument("--max-step", type=int)
    p.add_argument("--steps", type=int, dest="total_steps")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_gain_experiment)

    p = sub.add_parser("sweep-jammers", help="deep receiver against learning, greedy and mixed jammers")
    _add_run_flags(p, AgentKind.DEEP.value)
    p.add_argument("--seeds", default="0,1,2,3,4")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_sweep_jammers)

    p = sub.add_parser("show", help="print the summary of an exported run")
    p.add_argument("run_dir", type=Path)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_show)

    p = sub.add_parser("serve", help="run the HTTP API")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValidationError) as e:
        console.print(f"[red]config error:[/red] {e}")
        return EXIT_CONFIG
    except (JammingGameError, OSError) as e:
        console.print(f"[red]error:[/red] {e}")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
