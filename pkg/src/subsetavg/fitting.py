"""Prior-augmented least-squares fitting of models to Gaussian summaries.

The objective is the augmented chi-squared

    chi2_aug(a) = (ybar_K - f(t_K, a))^T SigmaHat_K^{-1} (ybar_K - f(t_K, a))
                  + sum_j (a_j - mu_j)^2 / width_j^2

minimized by Levenberg-Marquardt on the whitened residual stack (data
residuals whitened by the Cholesky factor of SigmaHat_K, prior residuals
scaled by 1/width). The reported parameter covariance is the inverse of the
Gauss-Newton Hessian of chi2_aug at the minimum.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, NumericalError, ParameterError
from .gaussdata import SubsetSpec, restrict
from .statcore import SpdMatrix, q_value

# Levenberg-Marquardt controls
_INIT_DAMPING = 1e-3
_DAMPING_STEP = 10.0
_MAX_ITER = 200
_CHI2_RTOL = 1e-12
_GRAD_ATOL = 1e-10


@dataclass(frozen=True)
class ModelSpec:
    """A parametric model f(t, a) with n_params free parameters.

    `eval(t, params)` must be vectorized over t. `jacobian(t, params)`, when
    given, returns the (len(t), n_params) matrix of df/da_j; otherwise a
    central finite difference is used. Models with n_params == 0 have all
    parameters fixed and are evaluated with an empty parameter vector.
    """

    name: str
    n_params: int
    eval: callable
    jacobian: callable = None

    def __post_init__(self):
        if self.n_params < 0:
            raise ParameterError("n_params must be non-negative")


@dataclass(frozen=True, eq=False)
class PriorSpec:
    """Independent Gaussian priors: one (mean, width) pair per parameter."""

    means: np.ndarray
    widths: np.ndarray

    def __post_init__(self):
        means = np.array(np.atleast_1d(self.means), dtype=float)
        widths = np.array(np.atleast_1d(self.widths), dtype=float)
        if means.ndim != 1 or means.shape != widths.shape:
            raise ParameterError("prior means and widths must match in length")
        if means.size and not np.all(widths > 0):
            raise ParameterError("prior widths must be positive")
        means.setflags(write=False)
        widths.setflags(write=False)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "widths", widths)

    @property
    def n_params(self):
        return self.means.size

    @classmethod
    def diffuse(cls, n_params, mean=0.0, width=10.0):
        return cls(np.full(n_params, float(mean)), np.full(n_params, float(width)))


@dataclass(frozen=True, eq=False)
class FitResult:
    """Minimizer of the augmented chi-squared and its bookkeeping.

    chi2 is the data-only term at the minimum, chi2_aug includes the prior
    penalty, n_kept is the number of fitted data points and q_value the
    chi-squared tail probability at n_kept - n_params degrees of freedom
    (1.0 when there are none).
    """

    params: np.ndarray
    param_cov: np.ndarray
    chi2: float
    chi2_aug: float
    n_kept: int
    n_params: int
    q_value: float
    converged: bool
    n_iterations: int


def constant_model(name="f0"):
    """f(t) = a0."""
    return ModelSpec(
        name=name,
        n_params=1,
        eval=lambda t, a: np.full_like(np.asarray(t, dtype=float), a[0]),
        jacobian=lambda t, a: np.ones((np.asarray(t).size, 1)),
    )


def pivot_linear_model(pivot=16.0, name="f1"):
    """f(t) = a0 + a1 * (1 - t / pivot)."""
    def evaluate(t, a):
        t = np.asarray(t, dtype=float)
        return a[0] + a[1] * (1.0 - t / pivot)

    def jac(t, a):
        t = np.asarray(t, dtype=float)
        return np.column_stack([np.ones_like(t), 1.0 - t / pivot])

    return ModelSpec(name=name, n_params=2, eval=evaluate, jacobian=jac)


def fixed_line_model(intercept, slope, pivot=16.0, name="truth"):
    """The pivot-linear shape with both parameters frozen (n_params = 0)."""
    def evaluate(t, a):
        t = np.asarray(t, dtype=float)
        return intercept + slope * (1.0 - t / pivot)

    return ModelSpec(name=name, n_params=0, eval=evaluate,
                     jacobian=lambda t, a: np.zeros((np.asarray(t).size, 0)))


def finite_difference_jacobian(model, t, params, rel_step=1e-6):
    """Central-difference df/da_j, used when a model has no analytic one."""
    t = np.asarray(t, dtype=float)
    a = np.asarray(params, dtype=float)
    jac = np.zeros((t.size, a.size))
    for j in range(a.size):
        h = rel_step * max(1.0, abs(a[j]))
        up = a.copy()
        dn = a.copy()
        up[j] += h
        dn[j] -= h
        jac[:, j] = (model.eval(t, up) - model.eval(t, dn)) / (2.0 * h)
    return jac


def model_jacobian(model, t, params):
    if model.jacobian is not None:
        return np.asarray(model.jacobian(t, params), dtype=float).reshape(
            np.asarray(t).size, model.n_params)
    return finite_difference_jacobian(model, t, params)


def augmented_chi2(summary, grid, subset, model, prior, params):
    """Evaluate chi2_aug at an arbitrary parameter vector."""
    t, ybar, stderr = _kept_arrays(summary, grid, subset)
    a = np.asarray(params, dtype=float)
    w = stderr.whiten(ybar - model.eval(t, a))
    chi2 = float(w @ w)
    if model.n_params:
        pr = (a - prior.means) / prior.widths
        chi2 += float(pr @ pr)
    return chi2


def _kept_arrays(summary, grid, subset):
    if summary.dim != len(grid):
        raise ParameterError(
            f"summary dimension {summary.dim} does not match grid length "
            f"{len(grid)}"
        )
    kept = restrict(summary, subset)
    sel = np.array(subset.kept_indices, dtype=int)
    return grid.points[sel], kept.mean, SpdMatrix(kept.stderr_cov)


def fit(summary, grid, subset, model, prior):
    """Minimize the prior-augmented chi-squared for one (model, subset) pair.

    Starts from the prior means; converges when the relative chi2_aug change
    on an accepted step drops below 1e-12 or the gradient max-norm below
    1e-10. Raises ConvergenceError (carrying the last iterate) after 200
    iterations without meeting either.
    """
    if prior.n_params != model.n_params:
        raise ParameterError(
            f"prior has {prior.n_params} parameters, model {model.name!r} "
            f"has {model.n_params}"
        )
    t, ybar, stderr = _kept_arrays(summary, grid, subset)
    d_kept = t.size
    k = model.n_params

    def residual(a):
        r_data = stderr.whiten(ybar - model.eval(t, a))
        if k == 0:
            return r_data
        return np.concatenate([r_data, (a - prior.means) / prior.widths])

    def jacobian(a):
        j_data = -stderr.whiten(model_jacobian(model, t, a))
        if k == 0:
            return j_data
        return np.vstack([j_data, np.diag(1.0 / prior.widths)])

    def finish(a, r, chi2_total, converged, n_iter):
        w_data = r[:d_kept]
        chi2_data = float(w_data @ w_data)
        if k:
            jac = jacobian(a)
            cov = SpdMatrix(jac.T @ jac).inverse()
        else:
            cov = np.zeros((0, 0))
        ndof = d_kept - k
        q = q_value(chi2_data, ndof) if ndof >= 1 else 1.0
        return FitResult(
            params=a, param_cov=cov, chi2=chi2_data, chi2_aug=chi2_total,
            n_kept=d_kept, n_params=k, q_value=q, converged=converged,
            n_iterations=n_iter,
        )

    a = prior.means.copy() if k else np.empty(0)
    r = residual(a)
    chi2 = float(r @ r)
    if k == 0:
        return finish(a, r, chi2, True, 0)

    damping = _INIT_DAMPING
    for iteration in range(1, _MAX_ITER + 1):
        jac = jacobian(a)
        grad = 2.0 * (jac.T @ r)
        if np.abs(grad).max() < _GRAD_ATOL:
            return finish(a, r, chi2, True, iteration - 1)
        hess = jac.T @ jac
        step_matrix = hess + damping * np.diag(np.diag(hess))
        try:
            delta = SpdMatrix(step_matrix).solve(-0.5 * grad)
        except NumericalError:
            damping *= _DAMPING_STEP
            continue
        trial = a + delta
        r_trial = residual(trial)
        chi2_trial = float(r_trial @ r_trial)
        if chi2_trial <= chi2:
            accepted_drop = chi2 - chi2_trial
            a, r, chi2 = trial, r_trial, chi2_trial
            damping = max(damping / _DAMPING_STEP, 1e-14)
            if accepted_drop < _CHI2_RTOL * max(chi2, 1.0):
                return finish(a, r, chi2, True, iteration)
        else:
            damping *= _DAMPING_STEP
    raise ConvergenceError(
        f"fit of model {model.name!r} did not converge in {_MAX_ITER} iterations",
        last_fit=finish(a, r, chi2, False, _MAX_ITER),
    )


def perfect_model_fit(summary, cut_indices):
    """Interpolating fit on the cut space: one parameter per cut point.

    The parameters are the cut-space sample means, so the in-sample
    chi-squared is exactly zero; the parameter covariance is the cut-space
    standard-error covariance. Used by the out-of-sample bias experiments.
    """
    subset = SubsetSpec(tuple(int(i) for i in cut_indices), label=0)
    cut = restrict(summary, subset)
    d_cut = cut.dim
    return FitResult(
        params=cut.mean.copy(),
        param_cov=cut.stderr_cov,
        chi2=0.0,
        chi2_aug=0.0,
        n_kept=d_cut,
        n_params=d_cut,
        q_value=1.0,
        converged=True,
        n_iterations=0,
    )
