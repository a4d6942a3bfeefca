"""Model averaging over data subsets for Bayesian least-squares fits.

The package compares two information criteria for jointly selecting a model
and the subset of data it is fit to: one charging a single unit per
discarded data point and one charging two (the cost of a perfect
interpolating model on the dropped points). A Gaussian Kullback-Leibler
toolkit backs the information-theoretic identities the criteria rely on.
"""

from .averaging import (AveragedEstimate, CandidateResult, GrandAverageRow,
                        average, candidate_weights, n_scaling_study,
                        run_sweep, run_sweep_from_summary,
                        write_averages_csv, write_candidates_csv)
from .config import DEFAULT_N_LIST, ExperimentConfig, load_config
from .criteria import (PERFECT, SUBSPACE, CriterionValue, WeightTable,
                       aic_perfect, aic_subspace, from_fit, model_weights,
                       ndof_form)
from .errors import (ConfigError, ConvergenceError, InsufficientDataError,
                     NumericalError, ParameterError)
from .fitting import (FitResult, ModelSpec, PriorSpec, augmented_chi2,
                      constant_model, fit, fixed_line_model,
                      perfect_model_fit, pivot_linear_model)
from .gaussdata import (CoordinateGrid, GaussianSummary, SampleSet,
                        SubsetSpec, generate_mock_data, restrict, summarize,
                        summary_from_json, summary_to_json, write_samples_csv)
from .kl import (GaussianDist, additivity_check, block_join,
                 expected_log_density, kl_gaussian, kl_monte_carlo,
                 log_density, marginalize, projection_inequality_check,
                 symmetrized_divergence)
from .statcore import (SpdMatrix, chi_squared, log_det, q_value,
                       regularized_gamma_q)

__version__ = "0.1.0"
