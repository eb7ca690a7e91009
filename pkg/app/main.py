from contextlib import asynccontextmanager
from typing import Literal

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field, ValidationError

from app import config
from app.game.models import GridSpec, ScenarioConfig
from app.game.static_game import solve_static, stackelberg, static_oracle
from app.harness.experiment import ExperimentConfig, run_experiment
from app.harness.metrics import late_window_stats
from app.oracle.markov_game import (
    alternating_minimax_vi,
    greedy_cycle_average,
    shapley_average_value,
    shapley_vi,
)
from app.types.general import GameVariant, Player
from app.utils.errors import ConfigError, JammingGameError
from app.utils.logger import get_logger

logger = get_logger(__name__)
global_settings = config.get_settings()


@asynccontextmanager
async def lifespan(app: FastAPI):
    logger.info("starting up")
    yield
    logger.info("shutting down")


app = FastAPI(lifespan=lifespan)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


class StaticSolveRequest(BaseModel):
    scenario: ScenarioConfig = Field(default_factory=ScenarioConfig.small)
    leader: Player | None = None
    allow_mixed_leader: bool = True


class StaticOracleRequest(BaseModel):
    scenario: ScenarioConfig = Field(default_factory=ScenarioConfig.small)
    n_points: int = Field(101, ge=2, le=1001)
    iters: int | None = Field(None, ge=1)


class MarkovOracleRequest(BaseModel):
    scenario: ScenarioConfig = Field(default_factory=ScenarioConfig.small)
    n_positions: int = Field(9, ge=2, le=41)
    max_step: int = Field(2, ge=1, le=2)
    gamma: float = Field(0.9, ge=0, lt=1)
    tol: float = Field(1e-9, gt=0)


def _bad_request(e: Exception):
    logger.warning(f"Rejected request: {e}")
    return HTTPException(status_code=400, detail=str(e))


@app.get(path="/health")
async def health():
    return {"status": "ok"}


@app.post(path="/static-solve")
async def static_solve(request: StaticSolveRequest):
    try:
        if request.leader is None:
            equilibrium = solve_static(request.scenario)
        else:
            equilibrium, _ = stackelberg(request.leader, request.scenario, request.allow_mixed_leader)
    except JammingGameError as e:
        raise _bad_request(e) from e
    return equilibrium.model_dump()


@app.post(path="/oracle/static")
async def oracle_static(request: StaticOracleRequest):
    try:
        report = static_oracle(request.scenario, request.n_points, request.iters)
    except JammingGameError as e:
        raise _bad_request(e) from e
    return {
        "value": report.solution.value,
        "lower_bound": report.solution.lower_bound,
        "upper_bound": report.solution.upper_bound,
        "jammer_position": report.jammer_position,
        "receiver_support": report.receiver_support.tolist(),
    }


@app.post(path="/oracle/{game}")
async def oracle_markov(game: Literal["g1", "g2"], request: MarkovOracleRequest):
    try:
        grid = GridSpec.for_scenario(request.scenario, request.n_positions, request.max_step)
        if game == GameVariant.SEQUENTIAL:
            result = alternating_minimax_vi(grid, request.scenario, request.gamma, request.tol)
            average = greedy_cycle_average(result, grid, request.scenario, request.gamma)
        else:
            result = shapley_vi(grid, request.scenario, request.gamma, request.tol)
            average = shapley_average_value(result.values, request.gamma)
    except (JammingGameError, ValidationError) as e:
        raise _bad_request(e) from e
    return {
        "game": game,
        "values": np.round(result.values, 12).tolist(),
        "iterations": result.iterations,
        "converged": result.converged,
        "average_payoff": average,
    }


@app.post(path="/simulate")
async def simulate(request: dict):
    try:
        cfg = ExperimentConfig(**request)
        if cfg.total_steps > global_settings.max_api_steps:
            raise ConfigError(f"total_steps {cfg.total_steps} exceeds the API limit {global_settings.max_api_steps}")
        if cfg.warm_start_r is not None or cfg.warm_start_j is not None:
            raise ConfigError("warm starts read server files and are only available from the command line")
        metrics = run_experiment(cfg)
    except (JammingGameError, ValidationError) as e:
        raise _bad_request(e) from e
    mean, std = late_window_stats(metrics.rewards)
    return {
        "run": cfg.run_name,
        "total_steps": metrics.total_steps,
        "late_window_mean": mean,
        "late_window_std": std,
        "occupancy": metrics.occupancy.tolist(),
    }
