from .handlers import (
    EXIT_OK,
    EXIT_USAGE,
    EXIT_VERIFY_FAILED,
    EXIT_WARNING,
    HANDLERS,
    CommandOutput,
    cmd_darkstate,
    cmd_gscan,
    cmd_spectrum,
    cmd_sweep,
    cmd_verify,
)
from .output import render_json, render_table, write_output
from .run_config import ConfigError, RunConfig, build_run_config, load_config_file

__all__ = [
    "EXIT_OK",
    "EXIT_USAGE",
    "EXIT_VERIFY_FAILED",
    "EXIT_WARNING",
    "HANDLERS",
    "CommandOutput",
    "ConfigError",
    "RunConfig",
    "build_run_config",
    "cmd_darkstate",
    "cmd_gscan",
    "cmd_spectrum",
    "cmd_sweep",
    "cmd_verify",
    "load_config_file",
    "render_json",
    "render_table",
    "write_output",
]
