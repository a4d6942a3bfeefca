"""Command-line driver for sweeps, N-scaling studies, and self-checks.

Subcommands:
    sweep       fit all (model, t_min) candidates on one mock dataset and
                write the candidate and grand-average tables
    nscaling    grand averages across a ladder of sample sizes
    kl-demo     closed-form Gaussian KL divergences for a worked trio of
                distributions, cross-checked by Monte Carlo
    bias-check  out-of-sample chi-squared of the perfect model against an
                independent replica (expectation 2 d_C)

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 self-test
failure. Outputs are byte-identical across reruns with the same seed and
config when --no-timestamp is passed.
"""

import argparse
import datetime
import json
import math
import os
import sys

import numpy as np

from . import averaging, criteria, kl
from .config import ExperimentConfig, load_config
from .errors import ConfigError, NumericalError, ParameterError
from .fitting import perfect_model_fit
from .gaussdata import GaussianSummary, generate_mock_data, summarize
from .statcore import SpdMatrix, chi_squared

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_SELFTEST = 4


def _timestamp(suppress):
    if suppress:
        return None
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def _ensure_out_dir(out):
    try:
        os.makedirs(out, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from None
    return out


def _common_overrides(args):
    return {
        "seed": getattr(args, "seed", None),
        "criterion": getattr(args, "criterion", None),
        "replications": getattr(args, "replications", None),
        "models": (tuple(args.models.split(",")) if getattr(args, "models", None)
                   else None),
    }


def _print_candidate_table(candidates, weights_sub, weights_perf):
    header = ("model t_min  d_K  k      chi2   q_value        a0    a0_err"
              "     w_sub    w_perf")
    print(header)
    for cand, ws, wp in zip(candidates, weights_sub, weights_perf):
        if cand.failed:
            print(f"{cand.model_name:>5} {cand.subset.label:>5}  failed: "
                  f"{cand.error}")
            continue
        f = cand.fit
        a0 = f.params[0] if f.n_params else float("nan")
        a0_err = math.sqrt(f.param_cov[0, 0]) if f.n_params else float("nan")
        print(f"{cand.model_name:>5} {cand.subset.label:>5} {f.n_kept:>4} "
              f"{f.n_params:>2} {f.chi2:>9.3f} {f.q_value:>9.4f} "
              f"{a0:>9.4f} {a0_err:>9.4f} {ws:>9.4f} {wp:>9.4f}")


def _print_average_rows(rows):
    print("      N  criterion        mean         err    stat_err  spread_err")
    for row in rows:
        e = row.estimate
        rep = "" if row.replication is None else f"  rep={row.replication}"
        print(f"{row.n_samples:>7}  {e.kind:>9} {e.mean:>11.6f} {e.err:>11.6f} "
              f"{e.stat_err:>11.6f} {e.spread_err:>11.6f}{rep}")


def cmd_sweep(args):
    cfg = load_config(args.config, _common_overrides(args))
    out = _ensure_out_dir(args.out)
    grid = cfg.build_grid()
    models, priors = cfg.build_models_and_priors()
    subsets = cfg.build_subsets(grid)
    index_map = {m.name: 0 for m in models}
    reps = cfg.replications or 1
    groups = []
    rows = []
    for rep in range(reps):
        data = generate_mock_data(cfg.build_true_model(), grid,
                                  cfg.noise_mean, cfg.noise_variance,
                                  cfg.n_samples, cfg.seed + 1000003 * rep)
        candidates = averaging.run_sweep(data, models, priors, subsets)
        label = rep if cfg.replications else None
        groups.append((label, candidates))
        rows.extend(averaging.GrandAverageRow(
                        n_samples=cfg.n_samples,
                        estimate=averaging.average(candidates, index_map, kind),
                        replication=label)
                    for kind in cfg.criterion_kinds())
    stamp = _timestamp(args.no_timestamp)
    averaging.write_candidates_csv_replicated(
        groups, os.path.join(out, "sweep_candidates.csv"),
        parameter_index_map=index_map, timestamp=stamp)
    averaging.write_averages_csv(
        rows, os.path.join(out, "sweep_averages.csv"), timestamp=stamp)
    _print_candidate_table(groups[0][1],
                           averaging.candidate_weights(groups[0][1],
                                                       criteria.SUBSPACE),
                           averaging.candidate_weights(groups[0][1],
                                                       criteria.PERFECT))
    _print_average_rows(rows)
    return EXIT_OK


def cmd_nscaling(args):
    cfg = load_config(args.config, _common_overrides(args))
    out = _ensure_out_dir(args.out)
    rows = averaging.n_scaling_study(cfg)
    averaging.write_averages_csv(
        rows, os.path.join(out, "nscaling_averages.csv"),
        timestamp=_timestamp(args.no_timestamp))
    _print_average_rows(rows)
    return EXIT_OK


def _kl_demo_distributions():
    """The worked trio: a correlated f, an independent approximant g, the
    1-d marginal pair (f1, h), and the blockwise h' = h (x) g2."""
    f = kl.GaussianDist(np.zeros(2), np.array([[1.0, 0.5], [0.5, 2.0]]))
    g = kl.GaussianDist(np.zeros(2), np.diag([1.1, 2.0]))
    f1 = kl.marginalize(f, [0])
    h = kl.GaussianDist(np.zeros(1), np.array([[1.5]]))
    g2 = kl.marginalize(g, [1])
    h_prime = kl.block_join(h, g2)
    return f, g, f1, h, h_prime


def run_kl_demo(mc_draws=1_000_000, seed=2024, dim_check=False):
    """Closed-form demo divergences plus optional MC cross-check.

    Returns (payload, ok): ok is False when any MC estimate misses its
    closed form by more than 3 standard errors or the projected divergence
    exceeds the full one.
    """
    f, g, f1, h, h_prime = _kl_demo_distributions()
    g1 = kl.marginalize(g, [0])
    pairs = {
        "I_f_g": (f, g),
        "I_f1_h": (f1, h),
        "I_f_hprime": (f, h_prime),
    }
    payload = {name: kl.kl_gaussian(a, b) for name, (a, b) in pairs.items()}
    payload["I_f1_g1"] = kl.kl_gaussian(f1, g1)
    ok = True
    if mc_draws:
        mc = {}
        for offset, (name, (a, b)) in enumerate(pairs.items()):
            estimate, std_error = kl.kl_monte_carlo(a, b, mc_draws,
                                                    seed + offset)
            mc[name] = {"estimate": estimate, "std_error": std_error,
                        "n_draws": mc_draws}
            if abs(estimate - payload[name]) > 3.0 * std_error:
                ok = False
        payload["mc"] = mc
    else:
        payload["mc"] = {}
    if dim_check:
        full, projected = kl.projection_inequality_check(f, g, [0])
        payload["dim_check"] = {"full": full, "projected": projected}
        if projected > full + 1e-12:
            ok = False
    return payload, ok


def cmd_kl_demo(args):
    payload, ok = run_kl_demo(mc_draws=args.mc_draws, seed=args.seed or 2024,
                              dim_check=args.dim_check)
    if not args.no_timestamp:
        payload["generated"] = _timestamp(False)
    text = json.dumps(payload, indent=2)
    print(text)
    if args.out:
        out = _ensure_out_dir(args.out)
        with open(os.path.join(out, "kl_demo.json"), "w") as fh:
            fh.write(text + "\n")
    return EXIT_OK if ok else EXIT_SELFTEST


def run_bias_check(d_cut=5, n_replicas=10_000, seed=2024):
    """Out-of-sample chi-squared of the perfect model, replicated.

    Replica pairs of d_cut-dimensional summaries are drawn from one Gaussian
    with a known standard-error covariance. The perfect model fit to replica
    A (parameters = replica-A means, in-sample chi2 exactly 0) is scored
    against replica B; the expectation of that score is 2 d_cut.
    """
    if d_cut < 1:
        raise ParameterError(f"d_cut must be >= 1, got {d_cut}")
    if n_replicas < 2:
        raise ParameterError(f"n_replicas must be >= 2, got {n_replicas}")
    rng = np.random.default_rng(seed)
    root = rng.normal(size=(d_cut, d_cut))
    stderr_cov = root @ root.T + 0.5 * np.eye(d_cut)
    center = rng.normal(size=d_cut)
    spd = SpdMatrix(stderr_cov)
    draws_a = center + rng.standard_normal((n_replicas, d_cut)) @ spd.lower.T
    draws_b = center + rng.standard_normal((n_replicas, d_cut)) @ spd.lower.T
    out_chi2 = np.empty(n_replicas)
    in_chi2_max = 0.0
    cut_indices = tuple(range(d_cut))
    for i in range(n_replicas):
        summary_a = GaussianSummary.from_stderr(draws_a[i], stderr_cov)
        fit_a = perfect_model_fit(summary_a, cut_indices)
        in_chi2_max = max(in_chi2_max, fit_a.chi2)
        out_chi2[i] = chi_squared(draws_b[i] - fit_a.params, stderr_cov)
    mean = float(out_chi2.mean())
    std_error = float(out_chi2.std(ddof=1) / math.sqrt(n_replicas))
    expected = 2.0 * d_cut
    z = (mean - expected) / std_error
    return {
        "d_C": d_cut,
        "n_replicas": n_replicas,
        "mean_out_of_sample_chi2": mean,
        "std_error": std_error,
        "expected": expected,
        "z": z,
        "in_sample_chi2_max": in_chi2_max,
        "pass": bool(abs(z) <= 4.0 and in_chi2_max == 0.0),
    }


def cmd_bias_check(args):
    payload = run_bias_check(d_cut=args.dc, n_replicas=args.replicas,
                             seed=args.seed or 2024)
    if not args.no_timestamp:
        payload["generated"] = _timestamp(False)
    text = json.dumps(payload, indent=2)
    print(text)
    if args.out:
        out = _ensure_out_dir(args.out)
        with open(os.path.join(out, "bias_check.json"), "w") as fh:
            fh.write(text + "\n")
    return EXIT_OK if payload["pass"] else EXIT_SELFTEST


def build_parser():
    parser = argparse.ArgumentParser(
        prog="subsetavg",
        description="Model averaging over data subsets with subspace and "
                    "perfect-model information criteria.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_out=True):
        p.add_argument("--config", default=None, metavar="PATH",
                       help="flat key = value config file")
        if with_out:
            p.add_argument("--out", default=".", metavar="DIR",
                           help="output directory (created if missing)")
        else:
            p.add_argument("--out", default=None, metavar="DIR",
                           help="optional output directory for the JSON report")
        p.add_argument("--seed", type=int, default=None, metavar="U64",
                       help="base RNG seed")
        p.add_argument("--no-timestamp", action="store_true",
                       help="omit the generated-at header for byte-identical "
                            "reruns")

    p_sweep = sub.add_parser("sweep", help="single-dataset candidate sweep")
    add_common(p_sweep)
    p_sweep.add_argument("--criterion",
                         choices=["perfect", "subspace", "both"], default=None)
    p_sweep.add_argument("--replications", type=int, default=None,
                         help="repeat the sweep on fresh datasets with "
                              "distinct seeds and append a replication column")
    p_sweep.add_argument("--models", default=None, metavar="NAMES",
                         help="comma-separated subset of f0,f1")
    p_sweep.set_defaults(func=cmd_sweep)

    p_nscal = sub.add_parser("nscaling", help="grand averages across sample "
                                              "sizes")
    add_common(p_nscal)
    p_nscal.add_argument("--criterion",
                         choices=["perfect", "subspace", "both"], default=None)
    p_nscal.add_argument("--replications", type=int, default=None,
                         help="repeat every N with distinct seeds and append "
                              "a replication column")
    p_nscal.add_argument("--models", default=None, metavar="NAMES",
                         help="comma-separated subset of f0,f1")
    p_nscal.set_defaults(func=cmd_nscaling)

    p_kl = sub.add_parser("kl-demo", help="worked Gaussian KL example with "
                                          "Monte Carlo cross-check")
    add_common(p_kl, with_out=False)
    p_kl.add_argument("--mc-draws", type=int, default=1_000_000,
                      help="Monte Carlo draws per pair (0 skips the check)")
    p_kl.add_argument("--dim-check", action="store_true",
                      help="also verify the marginalization inequality")
    p_kl.set_defaults(func=cmd_kl_demo)

    p_bias = sub.add_parser("bias-check", help="perfect-model out-of-sample "
                                               "chi-squared bias experiment")
    add_common(p_bias, with_out=False)
    p_bias.add_argument("--dc", type=int, default=5, metavar="D",
                        help="cut-space dimension")
    p_bias.add_argument("--replicas", type=int, default=10_000,
                        help="number of replica pairs")
    p_bias.set_defaults(func=cmd_bias_check)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ParameterError, NumericalError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
