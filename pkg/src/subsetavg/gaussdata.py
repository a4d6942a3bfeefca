"""Synthetic data generation and Gaussian summaries on a coordinate grid.

Mock data follow y_i(t) = (1 + eta_i(t)) * f(t) with i.i.d. Gaussian noise
eta drawn from numpy's default_rng (PCG64), so a given seed reproduces the
same samples on every platform. Summaries carry the sample mean, the
unbiased sample covariance, and the sample count; the covariance of the
mean is covariance / n_samples.
"""

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientDataError, NumericalError, ParameterError
from .statcore import SpdMatrix


def _frozen_array(values, dtype=float):
    a = np.array(values, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class CoordinateGrid:
    """Strictly increasing, non-empty coordinates the data live on."""

    points: np.ndarray

    def __post_init__(self):
        pts = _frozen_array(self.points)
        if pts.ndim != 1 or pts.size == 0:
            raise ParameterError("grid must be a non-empty 1-d array")
        if not np.all(np.diff(pts) > 0):
            raise ParameterError("grid points must be strictly increasing")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return self.points.size


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Raw draws on a grid: observations has shape (n_samples, len(grid))."""

    grid: CoordinateGrid
    observations: np.ndarray
    seed: int

    def __post_init__(self):
        obs = _frozen_array(self.observations)
        if obs.ndim != 2 or obs.shape[1] != len(self.grid):
            raise ParameterError(
                f"observations shape {obs.shape} does not match grid of "
                f"length {len(self.grid)}"
            )
        if obs.shape[0] < 2:
            raise InsufficientDataError("need at least 2 samples")
        object.__setattr__(self, "observations", obs)

    @property
    def n_samples(self):
        return self.observations.shape[0]


@dataclass(frozen=True, eq=False)
class GaussianSummary:
    """Sample mean, unbiased sample covariance, and sample count.

    The covariance must be SPD (its Cholesky factorization is taken here and
    cached). `stderr_cov` is the covariance of the sample mean.
    """

    mean: np.ndarray
    covariance: np.ndarray
    n_samples: int
    _spd: SpdMatrix = field(init=False, repr=False, default=None)

    def __post_init__(self):
        mean = _frozen_array(self.mean)
        spd = SpdMatrix(self.covariance)
        if mean.ndim != 1 or mean.size != spd.dim:
            raise ParameterError(
                f"mean length {mean.shape} does not match covariance "
                f"dimension {spd.dim}"
            )
        if self.n_samples < 2:
            raise InsufficientDataError("summary requires n_samples >= 2")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", spd.entries)
        object.__setattr__(self, "_spd", spd)

    @property
    def dim(self):
        return self.mean.size

    @property
    def stderr_cov(self):
        """Covariance of the sample mean: covariance / n_samples."""
        return self.covariance / self.n_samples

    @classmethod
    def from_stderr(cls, mean, stderr_cov, n_samples=2):
        """Build a summary whose mean has exactly the given covariance."""
        return cls(mean, np.asarray(stderr_cov, dtype=float) * n_samples, n_samples)


@dataclass(frozen=True)
class SubsetSpec:
    """Kept indices of a grid plus the t_min label they came from."""

    kept_indices: tuple
    label: int = 0

    def __post_init__(self):
        idx = tuple(int(i) for i in self.kept_indices)
        if len(idx) == 0:
            raise ParameterError("subset must keep at least one index")
        if len(set(idx)) != len(idx):
            raise ParameterError("subset indices must be unique")
        if min(idx) < 0:
            raise ParameterError("subset indices must be non-negative")
        object.__setattr__(self, "kept_indices", idx)

    @property
    def n_kept(self):
        return len(self.kept_indices)

    @classmethod
    def from_t_min(cls, grid, t_min):
        """Subset keeping every grid point with t >= t_min."""
        kept = tuple(int(i) for i in np.flatnonzero(grid.points >= t_min))
        if not kept:
            raise ParameterError(f"t_min={t_min} keeps no grid points")
        return cls(kept, label=int(t_min))


def generate_mock_data(true_model, grid, noise_mean, noise_variance,
                       n_samples, seed):
    """Draw n_samples rows of y(t) = (1 + eta(t)) * f(t), eta i.i.d. Gaussian.

    `true_model` must have all parameters fixed (n_params == 0); eta has the
    given mean and variance independently at every grid point. Deterministic
    for a given seed.
    """
    if getattr(true_model, "n_params", 0) != 0:
        raise ParameterError("true model must have no free parameters")
    if noise_variance <= 0:
        raise ParameterError(f"noise variance must be positive, got {noise_variance}")
    if n_samples < 2:
        raise InsufficientDataError("need at least 2 samples")
    truth = np.asarray(true_model.eval(grid.points, np.empty(0)), dtype=float)
    rng = np.random.default_rng(seed)
    eta = rng.normal(noise_mean, np.sqrt(noise_variance),
                     size=(n_samples, len(grid)))
    return SampleSet(grid, (1.0 + eta) * truth, int(seed))


def summarize(data):
    """Sample mean and unbiased (n-1) covariance of a SampleSet.

    Raises NumericalError with a diagnostic if the sample covariance is
    singular or indefinite (for instance when n_samples <= dim or rows
    are degenerate).
    """
    obs = data.observations
    mean = obs.mean(axis=0)
    cov = np.atleast_2d(np.cov(obs, rowvar=False, ddof=1))
    try:
        summary = GaussianSummary(mean, cov, obs.shape[0])
    except NumericalError as exc:
        raise NumericalError(
            f"sample covariance ({obs.shape[1]} x {obs.shape[1]} from "
            f"{obs.shape[0]} samples) is not positive definite: {exc}"
        ) from None
    # a Cholesky diagonal spanning more than ~7 decades means the matrix is
    # singular to working precision even though the factorization ran
    diag = np.diag(summary._spd.lower)
    if diag.min() <= 1e-7 * diag.max():
        raise NumericalError(
            f"sample covariance is numerically singular (Cholesky diagonal "
            f"range {diag.min():.3e} .. {diag.max():.3e}); need more than "
            f"{obs.shape[1]} non-degenerate samples"
        )
    return summary


def restrict(summary, subset):
    """Principal submatrix restriction of a summary to a subset's indices."""
    idx = subset.kept_indices
    if max(idx) >= summary.dim:
        raise ParameterError(
            f"subset index {max(idx)} out of range for dimension {summary.dim}"
        )
    sel = np.array(idx, dtype=int)
    return GaussianSummary(summary.mean[sel],
                           summary.covariance[np.ix_(sel, sel)],
                           summary.n_samples)


def write_samples_csv(data, path):
    """Dump a SampleSet as rows of (t, rep, y), grouped by grid point."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "rep", "y"])
        for j, t in enumerate(data.grid.points):
            for i in range(data.n_samples):
                writer.writerow([format(t, ".17g"), i,
                                 format(data.observations[i, j], ".17g")])


def summary_to_json(summary):
    """Serialize a summary to a JSON string (covariance row-major)."""
    return json.dumps({
        "mean": summary.mean.tolist(),
        "covariance": summary.covariance.ravel().tolist(),
        "n_samples": summary.n_samples,
    })


def summary_from_json(text):
    """Inverse of summary_to_json."""
    raw = json.loads(text)
    mean = np.asarray(raw["mean"], dtype=float)
    cov = np.asarray(raw["covariance"], dtype=float).reshape(mean.size, mean.size)
    return GaussianSummary(mean, cov, int(raw["n_samples"]))
