#!/usr/bin/env python3
import logging
import os
from pathlib import Path
from typing import Literal

from dotenv import load_dotenv
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

# Load environment variables from .env file
load_dotenv()

# Project structure
PROJECT_ROOT = Path(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

DEBUG_MODE = os.getenv("DEBUG", "False").lower() in ("true", "1", "t", "yes")

# Output format version for JSON payloads and config files
SCHEMA_VERSION = 1


class SolverSettings(BaseSettings):
    """
    Tolerances and defaults shared by the solvers and the CLI.

    Every field can be overridden from the environment with the ``RABI2Q_`` prefix,
    e.g. ``RABI2Q_GRID_STEP=0.01``.
    """

    model_config = SettingsConfigDict(env_prefix="RABI2Q_", extra="ignore", frozen=True)

    # Regime routing and pole exclusion (units of the cavity frequency)
    eps_eq: float = Field(1e-12, gt=0)
    eps_pole: float = Field(1e-6, gt=0)

    # Series and root-finding tolerances
    tail_tol: float = Field(1e-12, gt=0)
    refine_tol: float = Field(1e-10, gt=0)
    stability_tol: float = Field(1e-8, gt=0)
    decay_tol: float = Field(1e-8, gt=0)
    grid_step: float = Field(0.005, gt=0)
    # Pre-scan extended-precision G-functions in double at a lower truncation
    screen: bool = True

    # Truncation
    n_max_general: int = Field(80, ge=2)
    n_max_equal: int = Field(120, ge=2)
    n_max_step: int = Field(1, ge=1)

    # Oracle
    oracle_n: int = Field(200, ge=1)
    oracle_memory_mb: int = Field(512, gt=0)
    match_tol: float = Field(1e-6, gt=0)
    exceptional_tol: float = Field(1e-7, gt=0)
    dark_tol: float = Field(1e-10, gt=0)

    # Arithmetic
    precision: Literal["auto", "double", "extended"] = "auto"
    guard_digits: int = Field(20, ge=0)
    max_dps: int = Field(2000, ge=16)

    # Sweeps
    workers: int = Field(1, ge=1)


settings = SolverSettings()

# Loggers affected by set_debug_mode
LOGGER_PREFIXES = ("rabi2q", "model", "solvers", "oracle", "commands")


# Configure logging
def setup_logging(log_name="rabi2q"):
    """
    Configure and return a logger with console handler.

    Args:
        log_name: Name for the logger

    Returns:
        Configured logger
    """
    logger = logging.getLogger(log_name)

    log_level = logging.DEBUG if DEBUG_MODE else logging.INFO
    logger.setLevel(log_level)

    # Clear existing handlers
    if logger.handlers:
        logger.handlers.clear()

    # Create formatter
    formatter = logging.Formatter(
        "%(asctime)s - %(threadName)s - %(name)s - %(levelname)s - %(lineno)d %(message)s  %(funcName)s"
    )

    # Console handler (stderr, stdout is reserved for payloads)
    console_handler = logging.StreamHandler()
    console_handler.setLevel(log_level)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    logger.debug(f"Console logging initialized: {log_name} (level: {log_level})")

    return logger


def set_debug_mode(enabled: bool) -> None:
    """Switch every logger created through setup_logging to DEBUG (or back to INFO)."""
    global DEBUG_MODE
    DEBUG_MODE = enabled
    level = logging.DEBUG if enabled else logging.INFO
    for name in list(logging.root.manager.loggerDict):
        logger = logging.getLogger(name)
        if logger.handlers and name.startswith(LOGGER_PREFIXES):
            logger.setLevel(level)
            for handler in logger.handlers:
                handler.setLevel(level)
