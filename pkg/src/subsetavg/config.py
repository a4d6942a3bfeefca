"""Experiment configuration: defaults, validation, and a flat file format.

The defaults reproduce the reference setup with no config file at all: a
line 1.80 - 0.53 (1 - t/16) sampled on t = 1..15 with multiplicative unit
Gaussian noise, constant and pivot-linear candidate models under Gaussian
priors of mean 0 and width 10, subsets keeping t >= t_min for t_min = 1..12,
N = 320 for single sweeps and a 40..9600 ladder for the N-scaling study.

Config files are flat `key = value` text; '#' starts a comment. Unknown
keys, unparsable values, and inconsistent settings raise ConfigError with
the offending line or field named.
"""

from dataclasses import dataclass, fields

import numpy as np

from .criteria import PERFECT, SUBSPACE
from .errors import ConfigError
from .fitting import (PriorSpec, constant_model, fixed_line_model,
                      pivot_linear_model)
from .gaussdata import CoordinateGrid, SubsetSpec

DEFAULT_N_LIST = (40, 80, 160, 320, 640, 1280, 2400, 4800, 9600)
MODEL_NAMES = ("f0", "f1")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a sweep or N-scaling run needs, with reference defaults."""

    intercept: float = 1.80
    slope: float = -0.53
    pivot: float = 16.0
    t_start: int = 1
    t_stop: int = 15
    noise_mean: float = 0.0
    noise_variance: float = 1.0
    t_min_start: int = 1
    t_min_stop: int = 12
    prior_mean: float = 0.0
    prior_width: float = 10.0
    n_samples: int = 320
    n_list: tuple = DEFAULT_N_LIST
    seed: int = 2024
    criterion: str = "both"
    models: tuple = MODEL_NAMES
    replications: int = None

    def validate(self):
        if self.pivot <= 0:
            raise ConfigError(f"pivot must be positive, got {self.pivot}")
        if self.t_stop < self.t_start:
            raise ConfigError(
                f"t_stop {self.t_stop} is below t_start {self.t_start}")
        if not (self.t_min_start <= self.t_min_stop <= self.t_stop):
            raise ConfigError(
                f"t_min range {self.t_min_start}..{self.t_min_stop} must lie "
                f"within the grid ending at {self.t_stop}")
        if self.t_min_start < self.t_start:
            raise ConfigError(
                f"t_min_start {self.t_min_start} is below the grid start "
                f"{self.t_start}")
        if self.noise_variance <= 0:
            raise ConfigError(
                f"noise_variance must be positive, got {self.noise_variance}")
        if self.prior_width <= 0:
            raise ConfigError(
                f"prior_width must be positive, got {self.prior_width}")
        if self.n_samples < 2:
            raise ConfigError(f"n_samples must be >= 2, got {self.n_samples}")
        if not self.n_list or any(n < 2 for n in self.n_list):
            raise ConfigError("n_list must be non-empty with entries >= 2")
        if self.seed < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")
        if self.criterion not in (SUBSPACE, PERFECT, "both"):
            raise ConfigError(
                f"criterion must be perfect, subspace, or both, "
                f"got {self.criterion!r}")
        if not self.models:
            raise ConfigError("models must be non-empty")
        for name in self.models:
            if name not in MODEL_NAMES:
                raise ConfigError(
                    f"unknown model {name!r}; choices are {MODEL_NAMES}")
        if len(set(self.models)) != len(self.models):
            raise ConfigError("models must be unique")
        if self.replications is not None and self.replications < 1:
            raise ConfigError(
                f"replications must be >= 1, got {self.replications}")
        return self

    def criterion_kinds(self):
        """The criteria a run reports, in fixed (perfect, subspace) order."""
        if self.criterion == "both":
            return (PERFECT, SUBSPACE)
        return (self.criterion,)

    def build_grid(self):
        return CoordinateGrid(np.arange(self.t_start, self.t_stop + 1,
                                        dtype=float))

    def build_true_model(self):
        return fixed_line_model(self.intercept, self.slope, self.pivot)

    def build_models_and_priors(self):
        available = {
            "f0": constant_model(name="f0"),
            "f1": pivot_linear_model(pivot=self.pivot, name="f1"),
        }
        models = [available[name] for name in self.models]
        priors = [PriorSpec.diffuse(m.n_params, self.prior_mean,
                                    self.prior_width) for m in models]
        return models, priors

    def build_subsets(self, grid):
        return [SubsetSpec.from_t_min(grid, t_min)
                for t_min in range(self.t_min_start, self.t_min_stop + 1)]


_INT_KEYS = {"t_start", "t_stop", "t_min_start", "t_min_stop", "n_samples",
             "seed", "replications"}
_FLOAT_KEYS = {"intercept", "slope", "pivot", "noise_mean", "noise_variance",
               "prior_mean", "prior_width"}
_STR_KEYS = {"criterion"}
_LIST_KEYS = {"n_list", "models"}


def _parse_value(key, raw, lineno):
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
        if key == "n_list":
            return tuple(int(v.strip()) for v in raw.split(",") if v.strip())
        if key == "models":
            return tuple(v.strip() for v in raw.split(",") if v.strip())
        return raw
    except ValueError:
        raise ConfigError(
            f"line {lineno}: cannot parse value {raw!r} for key {key!r}"
        ) from None


def load_config(path=None, overrides=None):
    """Build a validated config from an optional file plus overrides.

    `overrides` maps field names to already-typed values (CLI flags); None
    entries are ignored.
    """
    known = {f.name for f in fields(ExperimentConfig)}
    values = {}
    if path is not None:
        try:
            with open(path) as fh:
                lines = fh.readlines()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from None
        for lineno, line in enumerate(lines, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ConfigError(
                    f"line {lineno}: expected 'key = value', got {line.rstrip()!r}")
            key, raw = (part.strip() for part in text.split("=", 1))
            if key not in known:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            values[key] = _parse_value(key, raw, lineno)
    if overrides:
        for key, value in overrides.items():
            if value is None:
                continue
            if key not in known:
                raise ConfigError(f"unknown config field {key!r}")
            values[key] = value
    return ExperimentConfig(**values).validate()
