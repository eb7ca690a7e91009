import os
from functools import lru_cache
from pathlib import Path

from dotenv import load_dotenv
from pydantic_settings import BaseSettings, SettingsConfigDict

from app.utils.general import str_to_bool
from app.utils.logger import get_logger

load_dotenv()
env_vars = os.environ
logger = get_logger(__name__)


class Settings(BaseSettings):
    """
    Process-wide settings read from JAMGAME_* environment variables (a .env
    file is loaded first). Experiment parameters do not live here; they are
    carried by the pydantic models in app.game.models and app.harness.experiment.
    """

    model_config = SettingsConfigDict(env_prefix="JAMGAME_")

    is_production: bool = str_to_bool(env_vars.get("IS_PRODUCTION", "False"))
    log_level: str = "INFO"
    output_dir: Path = Path("runs")
    log_every: int = 100_000
    workers: int = 1
    max_api_steps: int = 200_000


@lru_cache
def get_settings():
    logger.info("Loading config settings from the environment...")
    return Settings()
