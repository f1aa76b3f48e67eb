"""Validated run description built from CLI flags, a JSON config file and the environment."""

import json
from pathlib import Path
from typing import Any, Dict, Literal, Mapping, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from config import SCHEMA_VERSION, settings, setup_logging
from model.params import ModelParams, Parity, Regime, classify_regime, validate_params
from solvers.recurrence import TruncationConfig, default_truncation
from solvers.spectrum import DEFAULT_E_MAX, default_window, sweep_points

logger = setup_logging("commands.run_config")

Command = Literal["spectrum", "gscan", "sweep", "verify", "darkstate"]

# Keys accepted in a config file, named like the CLI flags (dashes become underscores)
CONFIG_KEYS = frozenset(
    {
        "delta1",
        "delta2",
        "g1",
        "g2",
        "emin",
        "emax",
        "grid_step",
        "nmax",
        "n_max_step",
        "oracle_n",
        "parity",
        "out",
        "g_from",
        "g_to",
        "g_steps",
        "samples",
        "precision",
        "workers",
        "match_tol",
    }
)

SWEEP_BASE_COUPLING = 0.5
DEFAULT_SAMPLES = 2000
DEFAULT_SWEEP = (0.05, 1.0, 20)


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending field."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    command: Command
    params: ModelParams
    window: Tuple[float, float]
    grid_step: float = Field(gt=0)
    trunc: TruncationConfig
    oracle_n: int = Field(ge=1)
    output: Literal["csv", "json"] = "csv"
    parities: Tuple[Parity, ...] = (Parity.EVEN, Parity.ODD)
    precision: Literal["auto", "double", "extended"] = "auto"
    match_tol: float = Field(gt=0)
    samples: int = Field(DEFAULT_SAMPLES, ge=2)
    g_from: float = Field(DEFAULT_SWEEP[0], ge=0)
    g_to: float = Field(DEFAULT_SWEEP[1], ge=0)
    g_steps: int = Field(DEFAULT_SWEEP[2], ge=1)
    workers: int = Field(1, ge=1)
    output_path: Optional[Path] = None

    @model_validator(mode="after")
    def _window_nonempty(self) -> "RunConfig":
        lo, hi = self.window
        if not lo < hi:
            raise ValueError(f"window ({lo}, {hi}) is empty")
        return self

    @property
    def regime(self) -> Regime:
        return classify_regime(self.params)

    @property
    def g_range(self) -> Tuple[float, float]:
        return self.g_from, self.g_to


def load_config_file(path: Path) -> Dict[str, Any]:
    """
    Read a JSON config file.

    Raises:
        ConfigError: If the file is unreadable, not a JSON object, carries the wrong
            schema_version or an unknown key
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError("config", f"cannot read {path}: {e}") from None

    if not isinstance(data, dict):
        raise ConfigError("config", f"{path} must contain a JSON object")
    version = data.pop("schema_version", None)
    if version != SCHEMA_VERSION:
        raise ConfigError(
            "schema_version", f"expected {SCHEMA_VERSION}, got {version!r} in {path}"
        )
    unknown = sorted(set(data) - CONFIG_KEYS)
    if unknown:
        raise ConfigError(unknown[0], f"unknown key in {path}")
    logger.debug(f"Loaded config file {path}: {sorted(data)}")
    return data


def _merge(cli: Mapping[str, Any]) -> Dict[str, Any]:
    merged: Dict[str, Any] = {}
    config_path = cli.get("config")
    if config_path:
        merged.update(load_config_file(Path(config_path)))
    merged.update({k: v for k, v in cli.items() if v is not None})
    return merged


def _model_params(values: Mapping[str, Any], command: str) -> ModelParams:
    raw = {}
    for name in ("delta1", "delta2", "g1", "g2"):
        value = values.get(name)
        if value is None and command == "sweep" and name in ("g1", "g2"):
            value = SWEEP_BASE_COUPLING
        if value is None:
            raise ConfigError(name, "is required")
        raw[name] = value
    try:
        return validate_params(**raw)
    except ValueError as e:
        field = next((name for name in raw if str(e).startswith(name)), "params")
        raise ConfigError(field, str(e)) from None


def build_run_config(cli: Mapping[str, Any]) -> RunConfig:
    """
    Resolve one run: CLI flags over config-file values over environment settings.

    Args:
        cli: Parsed CLI arguments (``vars(argparse.Namespace)``); None means "not given"

    Returns:
        Frozen RunConfig

    Raises:
        ConfigError: On any invalid or missing field
    """
    values = _merge(cli)
    command = values.get("command", "spectrum")
    params = _model_params(values, command)
    regime = classify_regime(params)

    base_trunc = default_truncation(regime)
    g_from = values.get("g_from", DEFAULT_SWEEP[0])
    g_to = values.get("g_to", DEFAULT_SWEEP[1])
    g_steps = values.get("g_steps", DEFAULT_SWEEP[2])

    emax = values.get("emax", DEFAULT_E_MAX)
    emin = values.get("emin")
    if emin is None:
        reference = params
        if command == "sweep":
            try:
                points = sweep_points(params, (g_from, g_to), max(int(g_steps), 1))
            except ValueError as e:
                raise ConfigError("g_steps", str(e)) from None
            reference = max(points, key=lambda q: q.g_sum)
        try:
            emin = default_window(reference, emax)[0]
        except ValueError as e:
            raise ConfigError("emax", str(e)) from None

    try:
        trunc = TruncationConfig(
            n_max=values.get("nmax", base_trunc.n_max),
            n_max_step=values.get("n_max_step", base_trunc.n_max_step),
        )
        config = RunConfig(
            command=command,
            params=params,
            window=(emin, emax),
            grid_step=values.get("grid_step", settings.grid_step),
            trunc=trunc,
            oracle_n=values.get("oracle_n", settings.oracle_n),
            output=values.get("out", "csv"),
            parities=Parity.parse(values.get("parity", "both")),
            precision=values.get("precision", settings.precision),
            match_tol=values.get("match_tol", settings.match_tol),
            samples=values.get("samples", DEFAULT_SAMPLES),
            g_from=g_from,
            g_to=g_to,
            g_steps=g_steps,
            workers=values.get("workers", settings.workers),
            output_path=values.get("output"),
        )
    except ValidationError as e:
        error = e.errors()[0]
        field = ".".join(str(part) for part in error["loc"]) or "window"
        raise ConfigError(field, error["msg"]) from None
    except ValueError as e:
        raise ConfigError("parity", str(e)) from None

    logger.info(
        f"Run '{config.command}' for {params.as_dict()} ({regime.value}), "
        f"window {config.window}, n_max={config.trunc.n_max}"
    )
    return config
