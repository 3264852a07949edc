"""
Configuration Module
Part of FD Tracer

Loads config.ini into a typed settings object and sets up structured
logging with structlog.
"""

import configparser
import logging
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import structlog

from errors import ConfigError

DEFAULT_CONFIG_PATH = Path(__file__).parent.parent / "config.ini"

VAR_STRATEGIES = ("input_order", "first_fail", "middle_first")
VAL_STRATEGIES = ("min", "middle")
TRACE_FORMATS = ("jsonl", "compact", "full")
LOG_FORMATS = ("console", "json")


@dataclass(frozen=True)
class SolverConfig:
    """Settings read from config.ini, with built-in defaults."""

    var_strategy: str = "first_fail"
    val_strategy: str = "min"
    max_solutions: int = 0
    trace_format: str = "jsonl"
    trace_extension: str = ".fdtrace.jsonl"
    oracle_max_product: int = 10_000_000
    random_max_vars: int = 4
    random_max_value: int = 6
    random_max_constraints: int = 6
    output_dir: str = "output"
    log_level: str = "WARNING"
    log_format: str = "console"

    def with_overrides(self, **changes) -> "SolverConfig":
        """Return a copy with the non-None keyword values applied and validated."""
        changes = {key: value for key, value in changes.items() if value is not None}
        updated = replace(self, **changes)
        updated.validate()
        return updated

    def validate(self):
        """Raise ConfigError if any value is out of range."""
        if self.var_strategy not in VAR_STRATEGIES:
            raise ConfigError(f"unknown var_strategy {self.var_strategy!r}")
        if self.val_strategy not in VAL_STRATEGIES:
            raise ConfigError(f"unknown val_strategy {self.val_strategy!r}")
        if self.trace_format not in TRACE_FORMATS:
            raise ConfigError(f"unknown trace format {self.trace_format!r}")
        if self.log_format not in LOG_FORMATS:
            raise ConfigError(f"unknown log_format {self.log_format!r}")
        if self.max_solutions < 0:
            raise ConfigError("max_solutions must be >= 0")
        if self.oracle_max_product < 1:
            raise ConfigError("oracle max_product must be >= 1")
        if min(self.random_max_vars, self.random_max_value, self.random_max_constraints) < 1:
            raise ConfigError("random model bounds must be >= 1")
        if not isinstance(getattr(logging, self.log_level.upper(), None), int):
            raise ConfigError(f"unknown log_level {self.log_level!r}")


def load_config(path: Optional[Path] = None) -> SolverConfig:
    """
    Load settings from an INI file.

    Args:
        path: Config file; defaults to config.ini at the repository root

    Returns:
        Validated SolverConfig. Missing files or keys keep their defaults.
    """
    path = Path(path) if path is not None else DEFAULT_CONFIG_PATH
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    if path.exists():
        try:
            parser.read(path, encoding="utf-8")
        except configparser.Error as e:
            raise ConfigError(f"cannot read {path}: {e}") from e

    defaults = SolverConfig()
    try:
        config = SolverConfig(
            var_strategy=parser.get("search", "var_strategy", fallback=defaults.var_strategy),
            val_strategy=parser.get("search", "val_strategy", fallback=defaults.val_strategy),
            max_solutions=parser.getint("search", "max_solutions", fallback=defaults.max_solutions),
            trace_format=parser.get("trace", "format", fallback=defaults.trace_format),
            trace_extension=parser.get("trace", "extension", fallback=defaults.trace_extension),
            oracle_max_product=parser.getint(
                "oracle", "max_product", fallback=defaults.oracle_max_product
            ),
            random_max_vars=parser.getint(
                "random_models", "max_vars", fallback=defaults.random_max_vars
            ),
            random_max_value=parser.getint(
                "random_models", "max_value", fallback=defaults.random_max_value
            ),
            random_max_constraints=parser.getint(
                "random_models", "max_constraints", fallback=defaults.random_max_constraints
            ),
            output_dir=parser.get("output", "default_output_dir", fallback=defaults.output_dir),
            log_level=parser.get("development", "log_level", fallback=defaults.log_level),
            log_format=parser.get("development", "log_format", fallback=defaults.log_format),
        )
    except ValueError as e:
        raise ConfigError(f"invalid value in {path}: {e}") from e

    config.validate()
    return config


def configure_logging(level: str = "WARNING", fmt: str = "console"):
    """
    Configure structlog to write filtered, structured records to stderr.

    Args:
        level: Standard logging level name
        fmt: "console" for human-readable lines, "json" for JSON records
    """
    numeric_level = getattr(logging, level.upper(), None)
    if not isinstance(numeric_level, int):
        raise ConfigError(f"unknown log level {level!r}")

    renderer = (
        structlog.processors.JSONRenderer()
        if fmt == "json"
        else structlog.dev.ConsoleRenderer(colors=False)
    )
    structlog.configure(
        processors=[
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(numeric_level),
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )
