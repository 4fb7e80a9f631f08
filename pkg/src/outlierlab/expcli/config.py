"""Experiment configuration: defaults, ``key = value`` files, then flag overrides."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

EXPERIMENTS = ("sweep", "phase_check", "seginer", "bbp", "precancel", "verify", "lowerbound_demo")

DEFAULT_C_GRID = (0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 6.0, 10.0)
DEFAULT_THETAS = (0.5, 0.9, 1.5, 2.0, 3.0)

EXPERIMENT_DEFAULTS = {
    "seginer": {"c_grid": (0.3, 0.5, 1.0, 2.0, 4.0, 8.0)},
    "bbp": {"n": 2000, "trials": 10},
    "lowerbound_demo": {"n": 5000, "c_grid": (0.3, 0.5, 1.0), "trials": 10, "q": 1},
}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str = "sweep"
    n: int = 20000
    c_grid: tuple = DEFAULT_C_GRID
    trials: int = 20
    k: int = 2
    dist: str = "rademacher"
    master_seed: int = 0
    out_path: str | None = None
    eps: float = 0.05
    tol: float = 1e-8
    workers: int = 1
    centered: bool = False
    thetas: tuple = DEFAULT_THETAS
    q: int = 3
    suite: str | None = None

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if any(b <= a for a, b in zip(self.c_grid, self.c_grid[1:])):
            raise ConfigError("c_grid must be strictly increasing")
        if any(c <= 0 for c in self.c_grid):
            raise ConfigError("c_grid values must be positive")
        if self.experiment in ("sweep", "phase_check", "seginer", "bbp", "lowerbound_demo") and self.n < 100:
            raise ConfigError("n must be at least 100 for spectral experiments")
        if self.k < 1:
            raise ConfigError("k must be at least 1")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("seed must fit in 64 unsigned bits")
        return self


def _floats(text):
    return tuple(float(x) for x in str(text).replace(",", " ").split())


def _bool(text):
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


_PARSERS = {
    "experiment": str,
    "n": int,
    "c_grid": _floats,
    "c": _floats,
    "trials": int,
    "k": int,
    "dist": str,
    "master_seed": int,
    "seed": int,
    "out_path": str,
    "out": str,
    "eps": float,
    "tol": float,
    "workers": int,
    "centered": _bool,
    "thetas": _floats,
    "q": int,
    "suite": str,
}
_ALIASES = {"c": "c_grid", "seed": "master_seed", "out": "out_path"}


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            out[_ALIASES.get(key, key)] = _PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from exc
    return out


def load_config(experiment: str, path: str | None = None, **overrides) -> ExperimentConfig:
    """Defaults, then the file at ``path``, then non-None ``overrides``."""
    values = dict(EXPERIMENT_DEFAULTS.get(experiment, {}))
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                values.update(parse_config_text(fh.read()))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    values.update({_ALIASES.get(k, k): v for k, v in overrides.items() if v is not None})
    values["experiment"] = experiment
    names = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = set(values) - names
    if unknown:
        raise ConfigError(f"unknown settings {sorted(unknown)}")
    return ExperimentConfig(**values).validate()
