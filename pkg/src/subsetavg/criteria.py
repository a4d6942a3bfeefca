"""Information criteria for (model, data subset) candidates and their weights.

Two criteria are implemented, differing in how they charge for discarded
data points. With chi2 the data-only misfit on the kept points, k the
number of fit parameters and d_K the number of kept points:

    subspace:      chi2 + 2 k - d_K
    perfect-model: chi2 + 2 k - 2 d_K

(the data-dimension constant d common to all candidates is dropped; the
perfect-model value can re-add it for display). The two differ by exactly
d_K for the same fit. Candidate weights are exp(-(IC - IC_min)/2),
normalized over the whole candidate set.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

SUBSPACE = "subspace"
PERFECT = "perfect"
KINDS = (SUBSPACE, PERFECT)


@dataclass(frozen=True)
class CriterionValue:
    """One criterion evaluation for one candidate."""

    kind: str
    value: float
    chi2: float
    n_params: int
    n_kept: int
    log_model_prior: float

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown criterion kind {self.kind!r}")


@dataclass(frozen=True)
class WeightedCandidate:
    candidate_id: str
    ic: CriterionValue
    weight: float


@dataclass(frozen=True)
class WeightTable:
    """Normalized candidate weights under one criterion."""

    kind: str
    entries: tuple

    @property
    def weights(self):
        return np.array([e.weight for e in self.entries])


def _check_counts(chi2, n_params, n_kept):
    if chi2 < 0:
        raise ParameterError(f"chi2 must be non-negative, got {chi2}")
    if n_params < 0 or n_kept < 1:
        raise ParameterError(
            f"need n_params >= 0 and n_kept >= 1, got {n_params}, {n_kept}"
        )


def aic_subspace(chi2, n_params, n_kept, log_model_prior=0.0):
    """Criterion charging +1 per discarded point: chi2 + 2k - d_K.

    log_model_prior enters as -2 * log p(M); it is constant across
    candidates under a flat prior and cancels in the weights.
    """
    _check_counts(chi2, n_params, n_kept)
    value = -2.0 * log_model_prior + chi2 + 2.0 * n_params - n_kept
    return CriterionValue(SUBSPACE, value, chi2, n_params, n_kept,
                          log_model_prior)


def aic_perfect(chi2, n_params, n_kept, log_model_prior=0.0,
                dim_constant=None):
    """Criterion charging +2 per discarded point: chi2 + 2k - 2 d_K.

    The constant +d shared by all candidates is omitted unless
    `dim_constant` supplies it for display parity.
    """
    _check_counts(chi2, n_params, n_kept)
    value = -2.0 * log_model_prior + chi2 + 2.0 * n_params - 2.0 * n_kept
    if dim_constant is not None:
        value += dim_constant
    return CriterionValue(PERFECT, value, chi2, n_params, n_kept,
                          log_model_prior)


def from_fit(fit_result, log_model_prior=0.0):
    """Both criteria evaluated from one FitResult: (subspace, perfect)."""
    args = (fit_result.chi2, fit_result.n_params, fit_result.n_kept,
            log_model_prior)
    return aic_subspace(*args), aic_perfect(*args)


def ndof_form(ic):
    """The criterion rewritten around N_dof = d_K - k.

    subspace:      N_dof (chi2 / N_dof - 1) + k
    perfect-model: N_dof (chi2 / N_dof - 2)

    Equals the direct formula minus the model-prior term. Requires
    d_K >= k; at N_dof = 0 the bracket forms reduce to chi2 + k and chi2.
    """
    ndof = ic.n_kept - ic.n_params
    if ndof < 0:
        raise ParameterError(
            f"N_dof = {ndof} is negative (d_K = {ic.n_kept}, k = {ic.n_params})"
        )
    if ic.kind == SUBSPACE:
        if ndof == 0:
            return ic.chi2 + ic.n_params
        return ndof * (ic.chi2 / ndof - 1.0) + ic.n_params
    if ndof == 0:
        return ic.chi2
    return ndof * (ic.chi2 / ndof - 2.0)


def model_weights(ics, ids=None):
    """Normalized weights exp(-(IC_i - IC_min)/2) over a candidate set.

    All entries must share one criterion kind and be finite. `ids` labels
    the candidates; positional indices are used when omitted.
    """
    if not ics:
        raise ParameterError("need at least one criterion value")
    kinds = {ic.kind for ic in ics}
    if len(kinds) != 1:
        raise ParameterError(f"mixed criterion kinds {sorted(kinds)}")
    values = np.array([ic.value for ic in ics], dtype=float)
    if not np.all(np.isfinite(values)):
        raise ParameterError("criterion values must be finite")
    if ids is None:
        ids = [str(i) for i in range(len(ics))]
    elif len(ids) != len(ics):
        raise ParameterError("ids and ics must have equal length")
    # shift by the minimum so the largest exponent is exactly 0
    raw = np.exp(-0.5 * (values - values.min()))
    weights = raw / raw.sum()
    entries = tuple(
        WeightedCandidate(str(cid), ic, float(w))
        for cid, ic, w in zip(ids, ics, weights)
    )
    return WeightTable(kind=kinds.pop(), entries=entries)
