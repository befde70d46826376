"""Variance of Gaussian-sketch Schatten p-norm estimation."""

__version__ = "0.1.0"

from .bounds import BoundReport, bound_report, kv_bound, moment_sandwich_check, new_bound
from .cycles import (
    OverlapPattern,
    enumerate_increasing_cycles,
    enumerate_pattern_classes,
    overlap_decompose,
    pair_count,
    tech1_ratio,
)
from .errors import InputError, NumericalError, RangeError, SchattenError, SizeGuardError
from .moments import (
    MomentEngine,
    MomentQuery,
    base_moment,
    m_moment,
    m_moment_paper_literal,
    n_moment,
    n_moment_closed,
)
from .montecarlo import EstimateStats, SketchConfig, estimate_vpn, run_experiment, sample_sketch
from .oracle import isserlis_moment, quartic_identity_residual
from .spectrum import (
    Spectrum,
    TracePowerTable,
    gram_spectrum,
    schatten_2p_power,
    schatten_norm,
    table_for,
    trace_powers,
)
from .variance import (
    VarianceReport,
    brute_variance,
    exact_variance,
    exact_variance_closed_p2,
    pair_expectation,
    variance_paper_literal,
)
from .words import Word, eval_word, oplus, otimes, star_sum
