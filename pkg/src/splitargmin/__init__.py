"""Split-sample inference for the argmin of a vector of means.

Given an (n, d) matrix of losses, the core question is whether column r
could still attain the smallest mean. One half of the rows picks the
strongest rival of r, the other half runs a one-sided paired z-test
against that rival, and the resulting per-column p-values invert into
confidence sets for the argmin, model confidence sets, and intervals
for the smallest mean itself. Dimension d never enters a critical
value, which is what keeps the procedures usable when d is large.
"""

from ._rng import derive_seed, rng_for
from .argmin import SplitView, TestOutcome, bonferroni_test, paired_statistics, split_sample, split_test, studentized_statistic
from .confsets import (
    ConfusionDiagnostic,
    IndexSet,
    Interval,
    confusion_set,
    mcs_one_step,
    mcs_two_step,
    pointwise_confset,
    smallest_mean_c1,
    smallest_mean_c2,
)
from .errors import DomainError, InputError, SplitArgminError
from .estimators import (
    ColumnStats,
    ContrastSpec,
    RobustParams,
    as_sample,
    catoni_estimate,
    column_means,
    contrast_variance,
    mom_blocks_theory,
    mom_estimate,
    normal_cdf,
    normal_quantile,
)
from .harness import (
    CovScenario,
    Experiment,
    MCResult,
    MeanScenario,
    Method,
    SuiteRow,
    build_mean,
    gen_gaussian,
    gen_student_t3,
    run_monte_carlo,
    run_suite,
    standard_method,
    suite_names,
    toeplitz_cholesky,
    write_csv,
    write_json,
)
from .multisplit import MultiSplitConfig, averaged_statistic, multisplit_test, subsample_threshold
from .selection import SelectorKind, column_locations, select, select_adjusted, select_plugin

__version__ = "0.1.0"

__all__ = [
    "ColumnStats",
    "ConfusionDiagnostic",
    "ContrastSpec",
    "CovScenario",
    "DomainError",
    "Experiment",
    "IndexSet",
    "InputError",
    "Interval",
    "MCResult",
    "MeanScenario",
    "Method",
    "MultiSplitConfig",
    "RobustParams",
    "SelectorKind",
    "SplitArgminError",
    "SplitView",
    "SuiteRow",
    "TestOutcome",
    "as_sample",
    "averaged_statistic",
    "bonferroni_test",
    "build_mean",
    "catoni_estimate",
    "column_locations",
    "column_means",
    "confusion_set",
    "contrast_variance",
    "derive_seed",
    "gen_gaussian",
    "gen_student_t3",
    "mcs_one_step",
    "mcs_two_step",
    "mom_blocks_theory",
    "mom_estimate",
    "multisplit_test",
    "normal_cdf",
    "normal_quantile",
    "paired_statistics",
    "pointwise_confset",
    "rng_for",
    "run_monte_carlo",
    "run_suite",
    "select",
    "select_adjusted",
    "select_plugin",
    "smallest_mean_c1",
    "smallest_mean_c2",
    "split_sample",
    "split_test",
    "standard_method",
    "subsample_threshold",
    "studentized_statistic",
    "suite_names",
    "toeplitz_cholesky",
    "write_csv",
    "write_json",
]
