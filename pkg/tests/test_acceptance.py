"""End-to-end acceptance checks: divergence toolkit identities, criterion
algebra, fitter asymptotics, and the experiment pipeline.

Each test prints one PASS/FAIL line with the measured numbers so a verbose
run doubles as a report.
"""

import time

import numpy as np
import pytest

from subsetavg import (DEFAULT_N_LIST, ExperimentConfig, GaussianSummary,
                       PriorSpec, average, candidate_weights, fit,
                       fixed_line_model, generate_mock_data, kl, run_sweep,
                       run_sweep_from_summary, summarize)
from subsetavg.cli import _kl_demo_distributions, run_bias_check
from subsetavg.criteria import PERFECT, SUBSPACE, aic_perfect, aic_subspace

from randmats import random_gaussian_pair, random_spd


def _check(ok, label, detail):
    print(f"{'PASS' if ok else 'FAIL'}  {label}: {detail}")
    assert ok, f"{label}: {detail}"


def _default_setup(n_samples, seed):
    cfg = ExperimentConfig(n_samples=n_samples, seed=seed).validate()
    grid = cfg.build_grid()
    models, priors = cfg.build_models_and_priors()
    subsets = cfg.build_subsets(grid)
    data = generate_mock_data(cfg.build_true_model(), grid, cfg.noise_mean,
                              cfg.noise_variance, n_samples, seed)
    return cfg, grid, models, priors, subsets, data


def test_kl_demo_closed_form_values():
    start = time.perf_counter()
    f, g, f1, h, h_prime = _kl_demo_distributions()
    values = {
        "I(f,g)": (kl.kl_gaussian(f, g), 0.069),
        "I(f1,h)": (kl.kl_gaussian(f1, h), 0.036),
        "I(f,h')": (kl.kl_gaussian(f, h_prime), 0.103),
    }
    elapsed = time.perf_counter() - start
    worst = max(abs(got - want) for got, want in values.values())
    detail = ", ".join(f"{k}={got:.6f} (want {want:.3f})"
                       for k, (got, want) in values.items())
    _check(worst <= 5e-4 and elapsed < 1.0, "kl demo closed form",
           f"{detail}, max dev {worst:.2e}, {elapsed:.3f} s")


def test_kl_demo_monte_carlo_agreement():
    start = time.perf_counter()
    f, g, f1, h, h_prime = _kl_demo_distributions()
    pairs = {"I(f,g)": (f, g), "I(f1,h)": (f1, h), "I(f,h')": (f, h_prime)}
    lines = []
    worst_z = 0.0
    for offset, (name, (a, b)) in enumerate(pairs.items()):
        closed = kl.kl_gaussian(a, b)
        estimate, std_error = kl.kl_monte_carlo(a, b, 10**6, 2024 + offset)
        z = abs(estimate - closed) / std_error
        worst_z = max(worst_z, z)
        lines.append(f"{name} z={z:.2f}")
    elapsed = time.perf_counter() - start
    _check(worst_z < 3.0 and elapsed < 10.0, "kl monte carlo",
           f"{', '.join(lines)} (10^6 draws each), {elapsed:.2f} s")


def test_expected_log_density_identity():
    rng = np.random.default_rng(2024)
    dist = kl.GaussianDist(rng.normal(size=3), random_spd(rng, 3))
    draws = kl.sample(dist, 10**6, np.random.default_rng(2024))
    lp = kl.log_density(dist, draws)
    mc_mean = float(lp.mean())
    std_error = float(lp.std(ddof=1) / np.sqrt(lp.size))
    closed = kl.expected_log_density(dist)
    z = abs(mc_mean - closed) / std_error
    _check(z < 3.0, "expected log density identity",
           f"mc {mc_mean:.6f} vs closed {closed:.6f}, z={z:.2f}")


def test_marginalization_never_increases_divergence():
    rng = np.random.default_rng(2024)
    violations = 0
    worst = -np.inf
    for _ in range(1000):
        dim = int(rng.integers(2, 7))
        f, g = random_gaussian_pair(rng, dim)
        size = int(rng.integers(1, dim + 1))
        kept = sorted(rng.choice(dim, size=size, replace=False).tolist())
        full, projected = kl.projection_inequality_check(f, g, kept)
        worst = max(worst, projected - full)
        if projected > full + 1e-12:
            violations += 1
    _check(violations == 0, "marginalization inequality",
           f"0 expected violations over 1000 pairs, got {violations}, "
           f"max(projected-full)={worst:.2e}")


def test_divergence_additivity_over_blocks():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(1000):
        f_a, g_a = random_gaussian_pair(rng, int(rng.integers(1, 5)))
        f_b, g_b = random_gaussian_pair(rng, int(rng.integers(1, 5)))
        joint, summed = kl.additivity_check(f_a, g_a, f_b, g_b)
        worst = max(worst, abs(joint - summed))
    _check(worst <= 1e-10, "block additivity",
           f"max |joint - summed| = {worst:.2e} over 1000 instances")


def test_criterion_pairwise_identity_in_sweeps():
    worst = 0.0
    n_candidates = 0
    for i, n in enumerate(DEFAULT_N_LIST):
        _, _, models, priors, subsets, data = _default_setup(n, 2024 + i)
        for cand in run_sweep(data, models, priors, subsets):
            dev = abs(cand.ic_perfect.value
                      - (cand.ic_subspace.value - cand.fit.n_kept))
            worst = max(worst, dev)
            n_candidates += 1
    _check(worst <= 1e-9, "perfect = subspace - d_K",
           f"max deviation {worst:.2e} over {n_candidates} candidates")


def test_true_model_chi2_asymptote():
    cfg = ExperimentConfig(n_samples=9600).validate()
    grid = cfg.build_grid()
    truth = fixed_line_model(cfg.intercept, cfg.slope, cfg.pivot)
    subset = cfg.build_subsets(grid)[0]  # full grid, d_K = 15
    prior = PriorSpec.diffuse(0)
    chi2 = np.empty(200)
    for rep in range(200):
        data = generate_mock_data(truth, grid, 0.0, 1.0, 9600, 2024 + rep)
        chi2[rep] = fit(summarize(data), grid, subset, truth, prior).chi2
    d_k = subset.n_kept
    mean = float(chi2.mean())
    tol = 3.0 * float(chi2.std(ddof=1) / np.sqrt(chi2.size))
    mean_sub = float(np.mean([aic_subspace(c, 0, d_k).value for c in chi2]))
    mean_perf = float(np.mean([aic_perfect(c, 0, d_k).value for c in chi2]))
    ok = (abs(mean - d_k) <= tol and abs(mean_sub - 0.0) <= tol
          and abs(mean_perf + d_k) <= tol)
    _check(ok, "true-model asymptote",
           f"mean chi2 {mean:.3f} vs {d_k} (tol {tol:.3f}); "
           f"mean subspace ic {mean_sub:.3f} vs 0; "
           f"mean perfect ic {mean_perf:.3f} vs {-d_k}")


def test_wrong_model_combined_weight_vanishes():
    cfg = ExperimentConfig(n_samples=9600).validate()
    grid = cfg.build_grid()
    models, priors = cfg.build_models_and_priors()
    subsets = cfg.build_subsets(grid)
    truth = cfg.build_true_model()
    mean = np.array([truth.eval(np.array([t]), np.empty(0))[0]
                     for t in grid.points])
    summary = GaussianSummary.from_stderr(
        mean, np.eye(grid.points.size) / 9600.0, n_samples=9600)
    candidates = run_sweep_from_summary(summary, grid, models, priors,
                                        subsets)
    lines = []
    worst = 0.0
    for kind in (SUBSPACE, PERFECT):
        weights = candidate_weights(candidates, kind)
        combined = float(sum(w for w, c in zip(weights, candidates)
                             if c.model_name == "f0"))
        worst = max(worst, combined)
        lines.append(f"{kind} f0 weight {combined:.2e}")
    _check(worst < 1e-6, "wrong-model rejection",
           f"{', '.join(lines)} (threshold 1e-6)")


def test_perfect_model_out_of_sample_bias():
    payload = run_bias_check(d_cut=5, n_replicas=10**4, seed=2024)
    ok = (abs(payload["z"]) <= 4.0
          and payload["in_sample_chi2_max"] == 0.0 and payload["pass"])
    _check(ok, "perfect-model out-of-sample bias",
           f"mean {payload['mean_out_of_sample_chi2']:.3f} vs expected "
           f"{payload['expected']:.1f}, z={payload['z']:.2f}, in-sample max "
           f"{payload['in_sample_chi2_max']}")


def test_subspace_errors_exceed_perfect_and_both_cover_truth():
    start = time.perf_counter()
    cfg = ExperimentConfig(n_samples=320).validate()
    grid = cfg.build_grid()
    models, priors = cfg.build_models_and_priors()
    subsets = cfg.build_subsets(grid)
    truth = cfg.build_true_model()
    index_map = {m.name: 0 for m in models}
    errs = {SUBSPACE: [], PERFECT: []}
    covered = {SUBSPACE: 0, PERFECT: 0}
    n_reps = 100
    for rep in range(n_reps):
        data = generate_mock_data(truth, grid, 0.0, 1.0, 320, 2024 + rep)
        candidates = run_sweep(data, models, priors, subsets)
        for kind in (SUBSPACE, PERFECT):
            est = average(candidates, index_map, kind)
            errs[kind].append(est.err)
            if abs(est.mean - cfg.intercept) <= 2.0 * est.err:
                covered[kind] += 1
    elapsed = time.perf_counter() - start
    mean_sub = float(np.mean(errs[SUBSPACE]))
    mean_perf = float(np.mean(errs[PERFECT]))
    ok = (mean_sub > mean_perf
          and covered[SUBSPACE] >= 0.9 * n_reps
          and covered[PERFECT] >= 0.9 * n_reps
          and elapsed < 300.0)
    _check(ok, "subspace errors larger, both criteria cover truth",
           f"mean err subspace {mean_sub:.5f} > perfect {mean_perf:.5f}; "
           f"2-sigma coverage {covered[SUBSPACE]}/{n_reps} and "
           f"{covered[PERFECT]}/{n_reps} (need >= 90); {elapsed:.1f} s")


def test_fitter_matches_gls_oracle():
    # closed-form prior-augmented generalized least squares on the kept
    # block, solved by explicit inversion
    def oracle(summary, grid, subset, model, prior):
        sel = np.array(subset.kept_indices)
        t = grid.points[sel]
        y = summary.mean[sel]
        c = summary.stderr_cov[np.ix_(sel, sel)]
        x = (np.ones((t.size, 1)) if model.n_params == 1
             else np.column_stack([np.ones_like(t), 1.0 - t / 16.0]))
        cinv = np.linalg.inv(c)
        p = np.diag(1.0 / prior.widths**2)
        hess = x.T @ cinv @ x + p
        return np.linalg.solve(hess, x.T @ cinv @ y + p @ prior.means)

    cfg = ExperimentConfig().validate()
    grid = cfg.build_grid()
    models, priors = cfg.build_models_and_priors()
    subsets = cfg.build_subsets(grid)
    truth = cfg.build_true_model()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for i in range(100):
        n = int(rng.choice(DEFAULT_N_LIST))
        data = generate_mock_data(truth, grid, 0.0, 1.0, n, 3000 + i)
        summary = summarize(data)
        subset = subsets[int(rng.integers(0, len(subsets)))]
        model, prior = (models[i % 2], priors[i % 2])
        result = fit(summary, grid, subset, model, prior)
        expected = oracle(summary, grid, subset, model, prior)
        rel = float(np.max(np.abs(result.params - expected)
                           / (1.0 + np.abs(expected))))
        worst = max(worst, rel)
    _check(worst <= 1e-8, "fit matches gls oracle",
           f"max relative deviation {worst:.2e} over 100 random datasets")
