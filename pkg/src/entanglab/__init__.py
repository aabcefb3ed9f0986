"""Simulation lab for learning to classify bipartite entanglement.

Haar-random product vs. maximally entangled states, exact permutation-twirl
oracles, finite-shot swap-test kernels, a small SMO support-vector machine,
mean-state classifiers, randomized-measurement (shadow) overlap estimation,
and a grid-sweep experiment driver.
"""

from . import experiments, hilbert, meanest, measurement, oracle, selfcheck, shadows, svm
from .config import DEFAULT_TOLS, Tolerances
from .experiments import ExperimentConfig, VarianceConfig, run_grid, variance_sweep
from .hilbert import (
    CLASS_LABELS,
    ENT,
    SEP,
    PureState,
    RngStream,
    copy_pair_vector,
    haar_unitaries,
    haar_unitary,
    overlap,
    overlap_matrix,
    reduced_density,
    reduced_purity,
    regroup_pairs,
    sample_state,
    sample_state_block,
    states_from_block,
    unitarity_defect,
)
from .measurement import (
    COPIES_PER_SHOT,
    EXACT_SHOTS,
    SINGLE_COPY,
    TWO_COPY,
    CostReport,
    is_exact,
    kernel_matrix,
    kernel_rows,
    swap_test,
)
from .oracle import exact_delta, optimal_expectation, optimal_observable, twirl
from .svm import ConvergenceError, SvmModel, decision_values, solve_dual

__version__ = "0.1.0"
