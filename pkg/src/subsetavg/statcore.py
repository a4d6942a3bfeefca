"""Dense SPD linear algebra and chi-squared tail probabilities.

Every quadratic form and determinant goes through a Cholesky factor; no
explicit matrix inverse is ever formed. The regularized upper incomplete
gamma function is evaluated with a series for x < s + 1 and a continued
fraction otherwise, good to 1e-10 absolute.
"""

import math

import numpy as np
from scipy.linalg import solve_triangular

from .errors import NumericalError, ParameterError

# relative symmetry tolerance for accepting a matrix as symmetric
SYMMETRY_RTOL = 1e-12

# exp() underflows to 0 below roughly -745; treat the tail as exactly 0/1
_EXP_UNDERFLOW = -745.0


class SpdMatrix:
    """A symmetric positive definite matrix with a cached Cholesky factor.

    Symmetry is required to SYMMETRY_RTOL relative to the largest entry and
    the lower Cholesky factorization must succeed, otherwise NumericalError
    is raised. The empty (0 x 0) matrix is accepted as trivially SPD.
    """

    __slots__ = ("entries", "lower")

    def __init__(self, entries):
        m = np.array(entries, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ParameterError(f"expected a square matrix, got shape {m.shape}")
        if m.size:
            scale = float(np.abs(m).max())
            if not np.isfinite(scale):
                raise NumericalError("matrix has non-finite entries")
            if np.abs(m - m.T).max() > SYMMETRY_RTOL * max(scale, 1.0):
                raise NumericalError(
                    "matrix is not symmetric to %.0e relative" % SYMMETRY_RTOL
                )
            m = 0.5 * (m + m.T)
            try:
                lower = np.linalg.cholesky(m)
            except np.linalg.LinAlgError as exc:
                raise NumericalError(
                    f"matrix of dimension {m.shape[0]} is not positive definite: {exc}"
                ) from None
        else:
            lower = np.empty((0, 0))
        m.setflags(write=False)
        self.entries = m
        self.lower = lower

    @property
    def dim(self):
        return self.entries.shape[0]

    def solve(self, b):
        """Return M^{-1} b via two triangular solves."""
        if self.dim == 0:
            return np.zeros_like(np.asarray(b, dtype=float))
        y = solve_triangular(self.lower, b, lower=True)
        return solve_triangular(self.lower.T, y, lower=False)

    def whiten(self, r):
        """Return L^{-1} r, so that |whiten(r)|^2 = r^T M^{-1} r."""
        if self.dim == 0:
            return np.zeros(0)
        return solve_triangular(self.lower, r, lower=True)

    def quad_form(self, r):
        """Return r^T M^{-1} r (non-negative by construction)."""
        w = self.whiten(r)
        return float(w @ w)

    def log_det(self):
        if self.dim == 0:
            return 0.0
        return float(2.0 * np.sum(np.log(np.diag(self.lower))))

    def inverse(self):
        """Return M^{-1} as a dense symmetric array (small dimensions only)."""
        inv = self.solve(np.eye(self.dim))
        return 0.5 * (inv + inv.T)


def as_spd(m):
    """Coerce an array-like (or pass through an SpdMatrix) to SpdMatrix."""
    if isinstance(m, SpdMatrix):
        return m
    return SpdMatrix(m)


def chi_squared(residual, stderr_cov):
    """Quadratic form r^T C^{-1} r of a residual against an SPD covariance.

    Solved through the Cholesky factor of C; raises ParameterError on a
    length mismatch and NumericalError if C is not SPD.
    """
    r = np.asarray(residual, dtype=float)
    c = as_spd(stderr_cov)
    if r.ndim != 1 or r.shape[0] != c.dim:
        raise ParameterError(
            f"residual length {r.shape} does not match covariance dimension {c.dim}"
        )
    return c.quad_form(r)


def log_det(m):
    """log det of an SPD matrix, summed from the Cholesky diagonal."""
    return as_spd(m).log_det()


def regularized_gamma_q(s, x, eps=1e-14, max_iter=500):
    """Regularized upper incomplete gamma function Q(s, x).

    Series expansion of the lower function for x < s + 1, Lentz continued
    fraction for the upper function otherwise. Absolute accuracy 1e-10 or
    better over s in (0, 1e6], x >= 0.
    """
    if not (s > 0.0) or not math.isfinite(s):
        raise ParameterError(f"shape parameter must be positive and finite, got {s}")
    if not (x >= 0.0) or not math.isfinite(x):
        raise ParameterError(f"argument must be non-negative and finite, got {x}")
    if x == 0.0:
        return 1.0
    # log of the common prefactor x^s e^{-x} / Gamma(s)
    log_front = s * math.log(x) - x - math.lgamma(s)
    if x < s + 1.0:
        # P(s, x) by series; Q = 1 - P
        term = 1.0 / s
        total = term
        a = s
        for _ in range(max_iter):
            a += 1.0
            term *= x / a
            total += term
            if abs(term) < abs(total) * eps:
                break
        else:
            raise NumericalError(f"gamma series did not converge for s={s}, x={x}")
        if log_front < _EXP_UNDERFLOW:
            return 1.0
        return 1.0 - total * math.exp(log_front)
    # Q(s, x) by modified Lentz continued fraction
    tiny = 1e-300
    b = x + 1.0 - s
    c = 1.0 / tiny
    d = 1.0 / b if b != 0.0 else 1.0 / tiny
    h = d
    for i in range(1, max_iter + 1):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            break
    else:
        raise NumericalError(
            f"gamma continued fraction did not converge for s={s}, x={x}"
        )
    if log_front < _EXP_UNDERFLOW:
        return 0.0
    return h * math.exp(log_front)


def q_value(chi2, ndof):
    """Tail probability Q(ndof/2, chi2/2) of a chi-squared variable.

    The probability of a chi-squared draw with `ndof` degrees of freedom
    exceeding `chi2`.
    """
    if not isinstance(ndof, (int, np.integer)) or ndof < 1:
        raise ParameterError(f"ndof must be a positive integer, got {ndof!r}")
    if not (chi2 >= 0.0):
        raise ParameterError(f"chi2 must be non-negative, got {chi2}")
    return regularized_gamma_q(0.5 * ndof, 0.5 * chi2)
