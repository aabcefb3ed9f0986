"""Finite-shot swap tests, overlap estimators, and kernel construction.

A swap test between two pure states with fidelity F = |⟨ψ|φ⟩|² is an exact
Bernoulli process: outcome 0 lands with probability (1+F)/2 when one copy of
each state is consumed per shot ("single_copy"), or (1+F²)/2 when two copies
of each enter per shot ("two_copy", a swap test on the tensor squares).  The
per-shot observable (−1)^o is unbiased for F (single copy) or F² (two copy);
shot averages, naive c-th powers, and the diagonal-free U-statistic below
build every estimator used in the package.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hilbert import PureState, RngStream, overlap, overlap_matrix

SINGLE_COPY = "single_copy"
TWO_COPY = "two_copy"
_MODES = (SINGLE_COPY, TWO_COPY)

# Copies of each input state consumed by one shot, per mode.
COPIES_PER_SHOT = {SINGLE_COPY: 2, TWO_COPY: 4}

# Shot-count sentinel for the exact (infinite-shot) mode in configs and CSVs.
EXACT_SHOTS = 0


def is_exact(shots: int | None) -> bool:
    return shots is None or shots == EXACT_SHOTS


def outcome_probability(fidelity: float, mode: str) -> float:
    """P(outcome = 0) of one swap-test shot."""
    if mode == SINGLE_COPY:
        return 0.5 * (1.0 + fidelity)
    if mode == TWO_COPY:
        return 0.5 * (1.0 + fidelity ** 2)
    raise ValueError(f"unknown mode {mode!r}; expected one of {_MODES}")


@dataclass
class ShotRecord:
    """Outcome bits of S swap-test shots at a fixed true fidelity."""

    outcomes: np.ndarray          # uint8 bits, 0 = "accept"
    fidelity_true: float
    mode: str
    copies_consumed: int = field(init=False)

    def __post_init__(self):
        self.outcomes = np.asarray(self.outcomes, dtype=np.uint8)
        if self.outcomes.ndim != 1 or self.outcomes.size < 1:
            raise ValueError("outcomes must be a non-empty 1-d bit array")
        if np.any(self.outcomes > 1):
            raise ValueError("outcomes must be bits")
        if not 0.0 <= self.fidelity_true <= 1.0 + 1e-12:
            raise ValueError(f"fidelity {self.fidelity_true!r} outside [0, 1]")
        if self.mode not in _MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        self.copies_consumed = COPIES_PER_SHOT[self.mode] * self.outcomes.size

    @property
    def shots(self) -> int:
        return int(self.outcomes.size)


def swap_test(fidelity: float, shots: int, mode: str, rng: RngStream) -> ShotRecord:
    """Simulate S swap-test shots at the given true fidelity."""
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    p0 = outcome_probability(fidelity, mode)
    outcomes = (rng.gen.random(shots) >= p0).astype(np.uint8)
    return ShotRecord(outcomes, float(fidelity), mode)


def estimate_overlap(record: ShotRecord) -> float:
    """Shot average of (−1)^o — unbiased for F (single copy) or F² (two copy)."""
    return float(1.0 - 2.0 * record.outcomes.mean())


def unbiased_square(record: ShotRecord) -> float:
    """Diagonal-free U-statistic (1/(S(S−1))) Σ_{s≠t} (−1)^{o_s+o_t}.

    Unbiased for F² from single-copy shots; the naive squared mean would
    carry the +(1−F²)/S inflation instead.
    """
    if record.mode != SINGLE_COPY:
        raise ValueError("unbiased_square applies to single_copy records")
    s = record.shots
    if s < 2:
        raise ValueError(f"need at least 2 shots, got {s}")
    t = s - 2.0 * int(record.outcomes.sum())
    return float((t * t - s) / (s * (s - 1.0)))


# ---------------------------------------------------------------------------
# Vectorized estimator blocks (same statistics, array-valued fidelities)
# ---------------------------------------------------------------------------

def sample_overlap_means(
    fidelities: np.ndarray, shots: int, mode: str, rng: RngStream
) -> np.ndarray:
    """Shot averages of (−1)^o for an array of independent swap-test runs.

    The number of 1-outcomes among S Bernoulli shots is Binomial(S, 1−p0),
    drawn in one vectorized call; the draws follow the canonical flat order
    of the input array, so results are deterministic for a given stream.
    """
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    f = np.asarray(fidelities, dtype=np.float64)
    if mode == SINGLE_COPY:
        p1 = 0.5 * (1.0 - f)
    elif mode == TWO_COPY:
        p1 = 0.5 * (1.0 - f ** 2)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    ones = rng.gen.binomial(shots, np.clip(p1, 0.0, 1.0))
    return 1.0 - 2.0 * ones / shots


def sample_square_ustats(
    fidelities: np.ndarray, shots: int, rng: RngStream
) -> np.ndarray:
    """Vectorized single-copy U-statistic estimates of F² (needs S ≥ 2)."""
    if shots < 2:
        raise ValueError(f"need at least 2 shots, got {shots}")
    f = np.asarray(fidelities, dtype=np.float64)
    ones = rng.gen.binomial(shots, np.clip(0.5 * (1.0 - f), 0.0, 1.0))
    t = shots - 2.0 * ones
    return (t * t - shots) / (shots * (shots - 1.0))


# ---------------------------------------------------------------------------
# Kernels
# ---------------------------------------------------------------------------

@dataclass
class CostReport:
    """Tally of swap tests performed and state copies consumed."""

    swap_tests: int = 0
    state_copies: int = 0
    per_phase: dict = field(default_factory=dict)

    def add(self, phase: str, swap_tests: int, state_copies: int):
        self.swap_tests += int(swap_tests)
        self.state_copies += int(state_copies)
        slot = self.per_phase.setdefault(phase, {"swap_tests": 0, "state_copies": 0})
        slot["swap_tests"] += int(swap_tests)
        slot["state_copies"] += int(state_copies)

    def merge(self, other: "CostReport"):
        for phase, slot in other.per_phase.items():
            self.add(phase, slot["swap_tests"], slot["state_copies"])


def kernel_entry(
    a: PureState, b: PureState, c: int, shots: int | None, rng: RngStream
) -> float:
    """One kernel value K_c = (estimated overlap)^c between two states.

    The estimate is a single-copy shot average raised to the c-th power —
    the naive plug-in, biased upward for c ≥ 2 by +(1−F²)/S at c = 2.
    shots=0 (or None) computes the exact value |⟨a|b⟩|^{2c}.
    """
    if c < 1:
        raise ValueError(f"kernel power c must be >= 1, got {c}")
    f = overlap(a, b)
    if is_exact(shots):
        return f ** c
    record = swap_test(f, shots, SINGLE_COPY, rng)
    return estimate_overlap(record) ** c


def kernel_matrix(
    states: list[PureState],
    c: int,
    shots: int | None,
    rng: RngStream,
    phase: str = "train",
) -> tuple[np.ndarray, CostReport]:
    """Symmetric kernel Gram matrix over a state list, with its cost report.

    Off-diagonal entries each get an independent S-shot single-copy swap
    test (upper triangle drawn in canonical row-major order from a child
    stream, then mirrored); the diagonal is exactly 1.  With shots=0/None
    the exact kernel |⟨ψ_i|ψ_j⟩|^{2c} is returned at zero cost.
    """
    if c < 1:
        raise ValueError(f"kernel power c must be >= 1, got {c}")
    n = len(states)
    if n < 1:
        raise ValueError("need at least one state")
    dims = {s.local_dim for s in states}
    if len(dims) != 1:
        raise ValueError(f"states mix local dimensions {sorted(dims)}")
    block = np.array([s.amplitudes for s in states])
    fid = overlap_matrix(block, block)
    cost = CostReport()
    if is_exact(shots):
        k = fid ** c
    else:
        iu, ju = np.triu_indices(n, k=1)
        means = sample_overlap_means(fid[iu, ju], shots, SINGLE_COPY, rng.derive("kernel"))
        k = np.empty((n, n))
        k[iu, ju] = means ** c
        k[ju, iu] = k[iu, ju]
        pairs = n * (n - 1) // 2
        cost.add(phase, shots * pairs, 2 * shots * pairs)
    np.fill_diagonal(k, 1.0)
    return k, cost


def kernel_rows(
    test_states: list[PureState],
    train_states: list[PureState],
    c: int,
    shots: int | None,
    rng: RngStream,
    phase: str = "test",
) -> tuple[np.ndarray, CostReport]:
    """Kernel rows K[t, n] between test and training states.

    Each test state gets fresh shot noise from its own derived stream, so
    rows are independent of evaluation order.
    """
    if c < 1:
        raise ValueError(f"kernel power c must be >= 1, got {c}")
    test_block = np.array([s.amplitudes for s in test_states])
    train_block = np.array([s.amplitudes for s in train_states])
    fid = overlap_matrix(test_block, train_block)
    cost = CostReport()
    if is_exact(shots):
        return fid ** c, cost
    rows = np.empty_like(fid)
    for t in range(fid.shape[0]):
        means = sample_overlap_means(
            fid[t], shots, SINGLE_COPY, rng.derive("row", t)
        )
        rows[t] = means ** c
    per_row = shots * fid.shape[1]
    cost.add(phase, per_row * fid.shape[0], 2 * per_row * fid.shape[0])
    return rows, cost


# ---------------------------------------------------------------------------
# Single-shot purity-test baseline
# ---------------------------------------------------------------------------

def swap_baseline_success(d: int, trials: int, rng: RngStream) -> float:
    """Empirical success of the one-shot purity test {P₊, P₋} on subsystem A.

    Each trial draws a class uniformly, samples a state, measures the swap
    observable across the two copies of subsystem A (accept probability
    (1 + Tr[ρ_A²])/2), and guesses "product" on accept.  The exact success
    probability is 3/4 − 1/(4d).
    """
    from .hilbert import reduced_purity_block, sample_state_block

    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    g = rng.gen
    is_sep = g.integers(0, 2, size=trials).astype(bool)
    n_sep = int(is_sep.sum())
    purity = np.empty(trials)
    sep_block = sample_state_block("sep", d, n_sep, rng.derive("sep"))
    ent_block = sample_state_block("ent", d, trials - n_sep, rng.derive("ent"))
    purity[is_sep] = reduced_purity_block(sep_block, d)
    purity[~is_sep] = reduced_purity_block(ent_block, d)
    accept = g.random(trials) < 0.5 * (1.0 + purity)
    return float(np.mean(accept == is_sep))
