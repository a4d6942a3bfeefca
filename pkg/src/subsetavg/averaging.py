"""Sweeps over (model, data subset) candidates and model-averaged estimates.

A sweep fits every model to every subset of one frozen full-data summary
and evaluates both information criteria per candidate. Averaging combines a
shared parameter across all candidates jointly:

    mean            = sum_i w_i mu_i
    stat_variance   = sum_i w_i sigma_i^2
    spread_variance = sum_i w_i mu_i^2 - mean^2
    variance        = stat_variance + spread_variance

where the weights come from one criterion over the whole candidate set.
Candidates whose fit failed carry weight zero.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import criteria
from .errors import ConvergenceError, NumericalError, ParameterError
from .fitting import fit
from .gaussdata import generate_mock_data, summarize

CANDIDATE_COLUMNS = ("model", "t_min", "d_K", "k", "chi2", "q_value",
                     "a0", "a0_err", "ic_subspace", "ic_perfect",
                     "w_subspace", "w_perfect")
AVERAGE_COLUMNS = ("N", "criterion", "mean", "err", "stat_err", "spread_err")


@dataclass(frozen=True, eq=False)
class CandidateResult:
    """One (model, subset) fit with both criteria, or its failure record."""

    model_name: str
    subset: object
    fit: object
    ic_subspace: object
    ic_perfect: object
    error: str = None

    @property
    def failed(self):
        return self.fit is None


@dataclass(frozen=True)
class AveragedEstimate:
    """Model-averaged value of one shared parameter under one criterion."""

    parameter: str
    kind: str
    mean: float
    variance: float
    stat_variance: float
    spread_variance: float

    @property
    def err(self):
        return math.sqrt(self.variance)

    @property
    def stat_err(self):
        return math.sqrt(self.stat_variance)

    @property
    def spread_err(self):
        return math.sqrt(self.spread_variance)


@dataclass(frozen=True)
class GrandAverageRow:
    """One grand-average table row: an estimate at one sample size."""

    n_samples: int
    estimate: AveragedEstimate
    replication: int = None


def run_sweep(data, models, priors, subsets):
    """Fit every model to every subset of one frozen summary.

    The full-data summary is computed once from `data` and restricted per
    subset; see run_sweep_from_summary for the rest of the contract.
    """
    return run_sweep_from_summary(summarize(data), data.grid, models, priors,
                                  subsets)


def run_sweep_from_summary(summary, grid, models, priors, subsets):
    """Candidate fits of every model against every subset of one summary.

    Models iterate in the given order (outer), subsets in the given order
    (inner). Per-candidate fit failures are recorded on the candidate and
    excluded from any later weighting; both criteria share the flat model
    prior ln(1/len(models)).
    """
    if len(models) != len(priors):
        raise ParameterError("need exactly one prior per model")
    if not models or not subsets:
        raise ParameterError("need at least one model and one subset")
    log_model_prior = math.log(1.0 / len(models))
    results = []
    for model, prior in zip(models, priors):
        for subset in subsets:
            try:
                fit_result = fit(summary, grid, subset, model, prior)
            except (ConvergenceError, NumericalError, ParameterError) as exc:
                results.append(CandidateResult(
                    model_name=model.name, subset=subset, fit=None,
                    ic_subspace=None, ic_perfect=None, error=str(exc)))
                continue
            ic_sub, ic_perf = criteria.from_fit(fit_result, log_model_prior)
            results.append(CandidateResult(
                model_name=model.name, subset=subset, fit=fit_result,
                ic_subspace=ic_sub, ic_perfect=ic_perf))
    return results


def candidate_weights(candidates, kind):
    """Normalized weights over all candidates; zero where the fit failed."""
    live = [(i, c) for i, c in enumerate(candidates) if not c.failed]
    if not live:
        raise ParameterError("every candidate in the sweep failed")
    ics = [c.ic_subspace if kind == criteria.SUBSPACE else c.ic_perfect
           for _, c in live]
    table = criteria.model_weights(ics, ids=[str(i) for i, _ in live])
    weights = np.zeros(len(candidates))
    for (i, _), entry in zip(live, table.entries):
        weights[i] = entry.weight
    return weights


def average(candidates, parameter_index_map, kind, parameter="a0"):
    """Model-average one shared parameter over the candidate set.

    parameter_index_map gives, per model name, the index of the shared
    parameter in that model's parameter vector.
    """
    if kind not in criteria.KINDS:
        raise ParameterError(f"unknown criterion kind {kind!r}")
    weights = candidate_weights(candidates, kind)
    mean = 0.0
    second_moment = 0.0
    stat = 0.0
    for w, cand in zip(weights, candidates):
        if cand.failed:
            continue
        try:
            idx = parameter_index_map[cand.model_name]
        except KeyError:
            raise ParameterError(
                f"no parameter index for model {cand.model_name!r}"
            ) from None
        if not 0 <= idx < cand.fit.n_params:
            raise ParameterError(
                f"parameter index {idx} out of range for model "
                f"{cand.model_name!r} with {cand.fit.n_params} parameters"
            )
        mu = cand.fit.params[idx]
        var = cand.fit.param_cov[idx, idx]
        mean += w * mu
        second_moment += w * mu * mu
        stat += w * var
    spread = max(second_moment - mean * mean, 0.0)
    return AveragedEstimate(
        parameter=parameter, kind=kind, mean=mean,
        variance=stat + spread, stat_variance=stat, spread_variance=spread,
    )


def n_scaling_study(config):
    """Grand averages across the configured sample sizes.

    Data for the i-th sample size use seed + i; replication r further
    offsets the seed by 1000003 * r. Returns one GrandAverageRow per
    (N, criterion[, replication]) in N-major order.
    """
    true_model = config.build_true_model()
    grid = config.build_grid()
    models, priors = config.build_models_and_priors()
    subsets = config.build_subsets(grid)
    index_map = {m.name: 0 for m in models}
    reps = config.replications or 1
    rows = []
    for i, n in enumerate(config.n_list):
        for rep in range(reps):
            seed = config.seed + i + 1000003 * rep
            data = generate_mock_data(true_model, grid, config.noise_mean,
                                      config.noise_variance, n, seed)
            candidates = run_sweep(data, models, priors, subsets)
            for kind in config.criterion_kinds():
                est = average(candidates, index_map, kind)
                rows.append(GrandAverageRow(
                    n_samples=n, estimate=est,
                    replication=rep if config.replications else None))
    return rows


def _fmt(x):
    return format(float(x), ".17g")


def _open_to_write(path):
    return open(path, "w", newline="")


def write_candidates_csv(candidates, path, parameter_index_map=None,
                         timestamp=None):
    """Write the per-candidate sweep table.

    Failed candidates appear with nan in the fit-derived columns and zero
    weight. `timestamp` (an ISO string), when given, is written as a leading
    comment line; omit it for byte-identical reruns.
    """
    write_candidates_csv_replicated([(None, candidates)], path,
                                    parameter_index_map=parameter_index_map,
                                    timestamp=timestamp)


def write_candidates_csv_replicated(groups, path, parameter_index_map=None,
                                    timestamp=None):
    """Candidate table for replicated sweeps: groups is a list of
    (replication_label, candidates). Weights are normalized within each
    group; a replication column is appended only when any label is set."""
    with_reps = any(label is not None for label, _ in groups)
    with _open_to_write(path) as fh:
        if timestamp:
            fh.write(f"# generated: {timestamp}\n")
        writer = csv.writer(fh)
        header = list(CANDIDATE_COLUMNS) + (["replication"] if with_reps else [])
        writer.writerow(header)
        for label, candidates in groups:
            index_map = parameter_index_map
            if index_map is None:
                index_map = {c.model_name: 0 for c in candidates}
            w_sub = candidate_weights(candidates, criteria.SUBSPACE)
            w_perf = candidate_weights(candidates, criteria.PERFECT)
            tail = [label] if with_reps else []
            for cand, ws, wp in zip(candidates, w_sub, w_perf):
                if cand.failed:
                    writer.writerow([cand.model_name, cand.subset.label,
                                     cand.subset.n_kept, "nan", "nan", "nan",
                                     "nan", "nan", "nan", "nan",
                                     _fmt(0.0), _fmt(0.0)] + tail)
                    continue
                f = cand.fit
                idx = index_map.get(cand.model_name, 0)
                a0 = f.params[idx] if f.n_params else float("nan")
                a0_err = (math.sqrt(f.param_cov[idx, idx]) if f.n_params
                          else float("nan"))
                writer.writerow([
                    cand.model_name, cand.subset.label, f.n_kept, f.n_params,
                    _fmt(f.chi2), _fmt(f.q_value), _fmt(a0), _fmt(a0_err),
                    _fmt(cand.ic_subspace.value), _fmt(cand.ic_perfect.value),
                    _fmt(ws), _fmt(wp),
                ] + tail)


def write_averages_csv(rows, path, timestamp=None):
    """Write grand-average rows; a replication column is appended only when
    any row carries one."""
    with_reps = any(r.replication is not None for r in rows)
    with _open_to_write(path) as fh:
        if timestamp:
            fh.write(f"# generated: {timestamp}\n")
        writer = csv.writer(fh)
        header = list(AVERAGE_COLUMNS) + (["replication"] if with_reps else [])
        writer.writerow(header)
        for row in rows:
            e = row.estimate
            record = [row.n_samples, e.kind, _fmt(e.mean), _fmt(e.err),
                      _fmt(e.stat_err), _fmt(e.spread_err)]
            if with_reps:
                record.append(row.replication)
            writer.writerow(record)
