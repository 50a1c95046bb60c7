"""Run configuration: solver settings plus output, seeding and logging options.

Config files are flat ``key = value`` lines (``#`` starts a comment). Keys
are the SolverConfig fields and ``output_dir``, ``format``, ``seed``,
``log_level``, ``jobs``. Unknown keys are an error.
"""

from __future__ import annotations

import configparser
import logging
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .errors import ConfigError
from .heatflow import SolverConfig

FORMATS = ("json", "csv")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")
_SECTION = "run"


@dataclass(frozen=True)
class RunConfig:
    solver: SolverConfig = field(default_factory=SolverConfig)
    output_dir: Path = Path(".")
    format: str | None = None  # None: each command's own default
    seed: int = 0
    log_level: str = "WARNING"
    jobs: int = field(default_factory=lambda: os.cpu_count() or 1)

    def __post_init__(self):
        if self.format is not None and self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}, got {self.format!r}")
        if self.log_level.upper() not in LOG_LEVELS:
            raise ConfigError(f"log_level must be one of {LOG_LEVELS}, got {self.log_level!r}")
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")
        out = Path(self.output_dir)
        if out.exists() and not (out.is_dir() and os.access(out, os.W_OK)):
            raise ConfigError(f"output_dir {out} is not a writable directory")

    @property
    def logging_level(self) -> int:
        return getattr(logging, self.log_level.upper())


_SOLVER_FIELDS = {f.name: f for f in fields(SolverConfig)}
_RUN_FIELDS = {"output_dir": Path, "format": str, "seed": int, "log_level": str, "jobs": int}


def _convert(key: str, raw: str):
    raw = raw.strip()
    if key in _SOLVER_FIELDS:
        default = getattr(SolverConfig(), key)
        kind = type(default)
    else:
        kind = _RUN_FIELDS[key]
    try:
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        return kind(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc


def parse_config_text(text: str) -> dict:
    """Parse flat ``key = value`` text into typed values."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(f"[{_SECTION}]\n{text}")
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    if parser.sections() != [_SECTION]:
        raise ConfigError("config files may not contain [sections]")
    values = {}
    for key, raw in parser.items(_SECTION):
        if key not in _SOLVER_FIELDS and key not in _RUN_FIELDS:
            raise ConfigError(f"unknown config key {key!r}")
        values[key] = _convert(key, raw)
    return values


def load_config(path: str | os.PathLike | None = None, **overrides) -> RunConfig:
    """Build a RunConfig from an optional file, then apply non-None overrides."""
    values = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        values.update(parse_config_text(text))
    values.update({k: v for k, v in overrides.items() if v is not None})
    unknown = set(values) - set(_SOLVER_FIELDS) - set(_RUN_FIELDS)
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    solver = SolverConfig(**{k: v for k, v in values.items() if k in _SOLVER_FIELDS})
    run = {k: v for k, v in values.items() if k in _RUN_FIELDS}
    if "output_dir" in run:
        run["output_dir"] = Path(run["output_dir"])
    return RunConfig(solver=solver, **run)


def config_to_text(cfg: RunConfig) -> str:
    """Inverse of ``parse_config_text`` for a full RunConfig."""
    lines = [f"{k} = {v!r}" if isinstance(v, float) else f"{k} = {v}" for k, v in asdict(cfg.solver).items()]
    lines += [f"{k} = {getattr(cfg, k)}" for k in _RUN_FIELDS if getattr(cfg, k) is not None]
    return "\n".join(lines) + "\n"
