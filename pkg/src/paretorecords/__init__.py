"""Multidimensional Pareto records: incremental maintenance, exact frontier
extremes, record-count laws, and a reproducible simulation harness."""

from .analytics import (
    AnalyticContext,
    asym_mean_records,
    fplus_centering,
    gumbel_cdf,
    mean_records,
    mean_remaining,
    normal_cdf,
    p_record,
    p_record_exact,
    records_time_fplus_centering,
    sample_y,
    tm_centering,
    y_density,
)
from .frontier import (
    FrontierSummary,
    IntegerGridPoint,
    bhat,
    f_minus,
    f_minus_bruteforce,
    f_minus_candidate_grid,
    f_minus_witness,
    f_plus,
    frontier_summary,
    in_rs,
    lower_bound_probability,
    sweeten,
)
from .harness import (
    CheckpointRow,
    EnsembleResult,
    ExperimentConfig,
    LilReport,
    geometric_grid,
    ks_statistic,
    lil_diagnostics,
    load_rows,
    run_ensemble,
    run_trial,
    strip_coverage,
)
from .records import (
    ObserveOutcome,
    Point,
    RecordBook,
    coord_sums,
    rebuild_oracle,
    sample_observation,
    strictly_dominates,
)
from .rng import ObservationStream, exponential_quantile, stream_checksum

__version__ = "0.1.0"

__all__ = [
    "ObservationStream",
    "exponential_quantile",
    "stream_checksum",
    "Point",
    "ObserveOutcome",
    "RecordBook",
    "coord_sums",
    "rebuild_oracle",
    "sample_observation",
    "strictly_dominates",
    "FrontierSummary",
    "IntegerGridPoint",
    "f_minus",
    "f_minus_witness",
    "f_minus_bruteforce",
    "f_minus_candidate_grid",
    "f_plus",
    "frontier_summary",
    "bhat",
    "in_rs",
    "sweeten",
    "lower_bound_probability",
    "AnalyticContext",
    "p_record",
    "p_record_exact",
    "mean_records",
    "mean_remaining",
    "y_density",
    "sample_y",
    "gumbel_cdf",
    "normal_cdf",
    "fplus_centering",
    "tm_centering",
    "records_time_fplus_centering",
    "asym_mean_records",
    "ExperimentConfig",
    "CheckpointRow",
    "EnsembleResult",
    "LilReport",
    "run_trial",
    "run_ensemble",
    "ks_statistic",
    "strip_coverage",
    "lil_diagnostics",
    "load_rows",
    "geometric_grid",
    "__version__",
]
