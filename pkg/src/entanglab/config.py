"""Centralized numerical tolerances and desk-scale defaults."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances shared across the package.

    Every module reads these instead of hard-coding its own magic numbers,
    so a single record documents what "equal" means where.
    """

    state_norm: float = 1e-12      # |1 - ||psi||| for state construction
    unitarity: float = 1e-10       # ||U U† - 1||_max
    hermiticity: float = 1e-10     # ||A - A†||_max for dense operators
    closed_form: float = 1e-10     # dense evaluation vs closed-form value
    expectation: float = 1e-9      # observable expectation vs exact target
    twirl_commute: float = 1e-8    # ||[T(A), V⊗…⊗V]||_max over random V
    pinv_rcond: float = 1e-12      # relative eigenvalue cutoff for pseudo-inverse
    svm_tol: float = 1e-3          # SMO stopping threshold on the KKT gap


DEFAULT_TOLS = Tolerances()

# Desk-scale experiment defaults (grid sweeps stay tractable on one core).
DEFAULT_DIMS = (2, 4, 8)
DEFAULT_MAX_N = 512
DEFAULT_MAX_S = 2 ** 14
DEFAULT_TEST_STATES = 200
DEFAULT_TRIALS = 3
WORKERS_ENV_VAR = "ENTANGLAB_WORKERS"
