"""Exact permutation-symmetry oracles for the two state classes.

Everything here is deterministic linear algebra: permutation operators on
copies of a finite-dimensional system, the twirl (Haar average of
V^{⊗n} A V†^{⊗n}) expressed in the permutation basis, the exact class
averages of one and two state copies, and the closed-form overlaps, bounds
and observables they induce.  These values anchor every stochastic
estimator in the package.

Dense two-copy operators act on (C^d)^{⊗4} with axes grouped per subsystem:
(A1, A2, B1, B2).  Use :func:`entanglab.hilbert.copy_pair_vector` to bring
state tensor squares into the same convention.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOLS
from .hilbert import ENT, SEP, PureState, reduced_purity, reduced_purity_block

# Dense (c=2) operators on d^4 dimensions stay affordable up to here.
DENSE_MAX_LOCAL_DIM = 6
# Twirl supports n copies with d**n capped to keep matrices in memory.
MAX_TWIRL_DIM = 4096
MAX_TWIRL_COPIES = 4


# ---------------------------------------------------------------------------
# Permutations of copies
# ---------------------------------------------------------------------------

def permutations(n: int) -> list[tuple[int, ...]]:
    """All permutations of n copies, identity first."""
    return list(itertools.permutations(range(n)))


def compose(s: tuple[int, ...], p: tuple[int, ...]) -> tuple[int, ...]:
    """(s ∘ p)(k) = s(p(k))."""
    return tuple(s[p[k]] for k in range(len(p)))


def invert(p: tuple[int, ...]) -> tuple[int, ...]:
    inv = [0] * len(p)
    for k, v in enumerate(p):
        inv[v] = k
    return tuple(inv)


def cycle_count(p: tuple[int, ...]) -> int:
    """Number of cycles, fixed points included."""
    seen = [False] * len(p)
    cycles = 0
    for start in range(len(p)):
        if seen[start]:
            continue
        cycles += 1
        k = start
        while not seen[k]:
            seen[k] = True
            k = p[k]
    return cycles


def _basis_map(perm: tuple[int, ...], d: int) -> np.ndarray:
    """Composite-index action of P_perm: |i_1..i_n> -> |j_1..j_n> with
    j_{perm(k)} = i_k, returned as J[I] over row-major indices."""
    n = len(perm)
    idx = np.arange(d ** n)
    digits = np.empty((n, idx.size), dtype=np.int64)
    rem = idx
    for slot in range(n - 1, -1, -1):
        digits[slot] = rem % d
        rem = rem // d
    inv = invert(perm)
    out = np.zeros_like(idx)
    for slot in range(n):
        out = out * d + digits[inv[slot]]
    return out


def permutation_operator(perm: tuple[int, ...], d: int) -> np.ndarray:
    """Dense permutation operator on (C^d)^{⊗n}."""
    Dt = d ** len(perm)
    if Dt > MAX_TWIRL_DIM:
        raise ValueError(f"d**n = {Dt} exceeds the dense cap {MAX_TWIRL_DIM}")
    J = _basis_map(perm, d)
    op = np.zeros((Dt, Dt))
    op[J, np.arange(Dt)] = 1.0
    return op


def swap_operator(d: int) -> np.ndarray:
    """SWAP on two copies of C^d."""
    return permutation_operator((1, 0), d)


def symmetric_projector(d: int) -> np.ndarray:
    return 0.5 * (np.eye(d * d) + swap_operator(d))


def antisymmetric_projector(d: int) -> np.ndarray:
    return 0.5 * (np.eye(d * d) - swap_operator(d))


def perm_gram(n: int, d: int) -> np.ndarray:
    """Gram matrix M[σ,π] = Tr[P_σ P_π†] = d^{#cycles(σ∘π⁻¹)}."""
    perms = permutations(n)
    m = np.empty((len(perms), len(perms)))
    for i, s in enumerate(perms):
        for j, p in enumerate(perms):
            m[i, j] = float(d) ** cycle_count(compose(s, invert(p)))
    return m


# ---------------------------------------------------------------------------
# Twirling
# ---------------------------------------------------------------------------

@dataclass
class PermCombo:
    """A linear combination Σ_π coeff_π · P_π of copy permutations."""

    n: int
    d: int
    perms: list[tuple[int, ...]]
    coeffs: np.ndarray

    def to_dense(self) -> np.ndarray:
        Dt = self.d ** self.n
        out = np.zeros((Dt, Dt), dtype=np.complex128)
        for perm, c in zip(self.perms, self.coeffs):
            if c != 0:
                J = _basis_map(perm, self.d)
                out[J, np.arange(Dt)] += c
        return out


def _pinv_sym(m: np.ndarray, rcond: float) -> np.ndarray:
    """Moore-Penrose pseudo-inverse of a symmetric matrix via eigendecomposition."""
    vals, vecs = np.linalg.eigh(m)
    cutoff = rcond * np.max(np.abs(vals)) if vals.size else 0.0
    inv = np.where(np.abs(vals) > cutoff, 1.0 / np.where(vals == 0, 1.0, vals), 0.0)
    return (vecs * inv) @ vecs.T


def twirl(a: np.ndarray, n: int, d: int) -> PermCombo:
    """Haar average E_V[V^{⊗n} A V†^{⊗n}] in the permutation basis.

    Solves M b = t with M the permutation Gram matrix and t_σ = Tr[P_σ A],
    using a pseudo-inverse so linearly dependent permutation operators
    (d < n) stay well-defined.
    """
    if n < 1 or n > MAX_TWIRL_COPIES:
        raise ValueError(f"copy count n={n} outside supported range 1..{MAX_TWIRL_COPIES}")
    Dt = d ** n
    if Dt > MAX_TWIRL_DIM:
        raise ValueError(f"d**n = {Dt} exceeds the dense cap {MAX_TWIRL_DIM}")
    a = np.asarray(a)
    if a.shape != (Dt, Dt):
        raise ValueError(f"operator shape {a.shape}, expected {(Dt, Dt)}")
    perms = permutations(n)
    rows = np.arange(Dt)
    traces = np.array([a[rows, _basis_map(p, d)].sum() for p in perms])
    minv = _pinv_sym(perm_gram(n, d), DEFAULT_TOLS.pinv_rcond)
    coeffs = minv @ traces
    return PermCombo(n=n, d=d, perms=perms, coeffs=coeffs)


def twirl_dense(a: np.ndarray, n: int, d: int) -> np.ndarray:
    return twirl(a, n, d).to_dense()


# ---------------------------------------------------------------------------
# Exact class averages and overlaps
# ---------------------------------------------------------------------------

def _check_dense_dim(d: int):
    if d > DENSE_MAX_LOCAL_DIM:
        raise ValueError(
            f"dense two-copy operators are capped at d <= {DENSE_MAX_LOCAL_DIM} "
            f"(got d={d}); use the closed-form functions instead"
        )


def average_state(kind: str, c: int, d: int) -> np.ndarray:
    """Exact Haar average of c copies of a class state, dense.

    c=1: both classes average to 1/d² (maximally mixed on C^d ⊗ C^d).
    c=2: separable -> (P₊ ⊗ P₊)/d₊²  and entangled ->
    d⁻² (P₊⊗P₊/d₊ + P₋⊗P₋/d₋), with P± the (anti)symmetric projectors on
    the two copies of one subsystem, d± = d(d±1)/2, axes (A1, A2, B1, B2).
    """
    if kind not in (SEP, ENT):
        raise ValueError(f"unknown class {kind!r}")
    if d < 2:
        raise ValueError(f"local dimension must be >= 2, got {d}")
    if c == 1:
        return np.eye(d * d) / d ** 2
    if c != 2:
        raise ValueError(f"copy count c={c} not supported (1 or 2)")
    _check_dense_dim(d)
    pp = symmetric_projector(d)
    pm = antisymmetric_projector(d)
    dp = d * (d + 1) / 2
    dm = d * (d - 1) / 2
    if kind == SEP:
        return np.kron(pp, pp) / dp ** 2
    return (np.kron(pp, pp) / dp + np.kron(pm, pm) / dm) / d ** 2


def exact_delta(kind_a: str, kind_b: str, d: int) -> float:
    """Closed-form Tr[ρ̄_a⁽²⁾ ρ̄_b⁽²⁾] between two-copy class averages."""
    for k in (kind_a, kind_b):
        if k not in (SEP, ENT):
            raise ValueError(f"unknown class {k!r}")
    if d < 2:
        raise ValueError(f"local dimension must be >= 2, got {d}")
    if kind_a == SEP and kind_b == SEP:
        return 4.0 / (d ** 2 * (d + 1) ** 2)
    if kind_a == ENT and kind_b == ENT:
        return 2.0 / d ** 4
    return 2.0 / (d ** 3 * (d + 1))


def class_margin(d: int) -> float:
    """Δ₊₊ + Δ₋₋ − 2Δ₊₋ — the exact mean-score gap between the classes."""
    return (
        exact_delta(SEP, SEP, d)
        + exact_delta(ENT, ENT, d)
        - 2.0 * exact_delta(SEP, ENT, d)
    )


def b2_class_mean(kind: str, d: int) -> float:
    """Exact mean of the two-copy mean-state score on a class state: ±class_margin."""
    if kind not in (SEP, ENT):
        raise ValueError(f"unknown class {kind!r}")
    mu = class_margin(d)
    return mu if kind == SEP else -mu


def mean_observable(d: int) -> np.ndarray:
    """Dense two-copy mean-state observable 2(ρ̄₊ − ρ̄₋) − (Δ₊₊ − Δ₋₋)·1."""
    _check_dense_dim(d)
    b = 2.0 * (average_state(SEP, 2, d) - average_state(ENT, 2, d))
    offset = exact_delta(SEP, SEP, d) - exact_delta(ENT, ENT, d)
    return b - offset * np.eye(d ** 4)


def optimal_observable(d: int) -> np.ndarray:
    """Two-copy observable with expectation exactly +1 on separable and −1 on
    entangled pure states: (d/(d−1))(S_A + S_B) − ((d+1)/(d−1))·1, where S_X
    swaps the two copies of subsystem X.  Axes (A1, A2, B1, B2)."""
    if d < 2:
        raise ValueError(f"local dimension must be >= 2, got {d}")
    _check_dense_dim(d)
    s = swap_operator(d)
    eye2 = np.eye(d * d)
    sa = np.kron(s, eye2)
    sb = np.kron(eye2, s)
    return (d / (d - 1.0)) * (sa + sb) - ((d + 1.0) / (d - 1.0)) * np.eye(d ** 4)


def optimal_expectation(state: PureState) -> float:
    """⟨ψ|⊗⟨ψ| A* |ψ⟩⊗|ψ⟩ evaluated through reduced purities.

    The two swap terms reduce to Tr[ρ_A²] and Tr[ρ_B²], so the expectation
    is available at any dimension without materializing the d⁴ operator.
    """
    d = state.local_dim
    pa = reduced_purity(state, "A")
    pb = reduced_purity(state, "B")
    return (d / (d - 1.0)) * (pa + pb) - (d + 1.0) / (d - 1.0)


def optimal_expectation_block(block: np.ndarray, d: int) -> np.ndarray:
    """optimal_expectation for every row of a (n, d**2) amplitude block."""
    pa = reduced_purity_block(block, d, "A")
    pb = reduced_purity_block(block, d, "B")
    return (d / (d - 1.0)) * (pa + pb) - (d + 1.0) / (d - 1.0)


def representer_params(d: int) -> tuple[float, float, float]:
    """Class-average dual weights (α₊, α₋) and offset β that rebuild the
    optimal observable: (d+1, d−1, (d+1)/d)."""
    return (d + 1.0, d - 1.0, (d + 1.0) / d)


def representer_reconstruction(d: int) -> np.ndarray:
    """Dense rebuild of the optimal observable from the class averages:
    (d/(d−1)) · (d³(α₊ ρ̄₊ − α₋ ρ̄₋) − β·1).  Equals optimal_observable(d)
    exactly — the S_A S_B cross term cancels between the two averages."""
    _check_dense_dim(d)
    ap, am, beta = representer_params(d)
    core = d ** 3 * (ap * average_state(SEP, 2, d) - am * average_state(ENT, 2, d))
    return (d / (d - 1.0)) * (core - beta * np.eye(d ** 4))


# ---------------------------------------------------------------------------
# Closed-form figures of merit
# ---------------------------------------------------------------------------

def generalization_bound(c: int, d: int) -> float:
    """(Tr √ρ̄_c)² for the class-balanced average of c state copies.

    c=1: the average is 1/d², so the bound is d².
    c=2: closed form from the projector spectrum of (ρ̄₊⁽²⁾ + ρ̄₋⁽²⁾)/2,
    with d± = d(d±1)/2:
        Tr√ρ̄₂ = d₋²/√(d³(d−1)) + √(3d+1)/(d+1) · d₊²/√d³.
    Grows as ((√3+1)/4)² d⁴ for large d.
    """
    if d < 2:
        raise ValueError(f"local dimension must be >= 2, got {d}")
    if c == 1:
        return float(d ** 2)
    if c != 2:
        raise ValueError(f"copy count c={c} not supported (1 or 2)")
    dp = d * (d + 1) / 2.0
    dm = d * (d - 1) / 2.0
    root = dm ** 2 / math.sqrt(d ** 3 * (d - 1)) + (
        math.sqrt(3.0 * d + 1.0) / (d + 1.0)
    ) * dp ** 2 / math.sqrt(d ** 3)
    return root ** 2


def swap_success_probability(d: int) -> float:
    """Best single-shot success of the purity test {P₊, P₋} on subsystem A
    of two state copies: 3/4 − 1/(4d)."""
    if d < 2:
        raise ValueError(f"local dimension must be >= 2, got {d}")
    return 0.75 - 0.25 / d


def avg_trace_distance(d: int) -> float:
    """Distinguishability of the two-copy class averages, as the trace norm
    ‖ρ̄₊⁽²⁾ − ρ̄₋⁽²⁾‖₁ = 1 − 1/d.  (The halved convention ½‖·‖₁ would give
    (1 − 1/d)/2; this function follows the unhalved value.)"""
    if d < 2:
        raise ValueError(f"local dimension must be >= 2, got {d}")
    return 1.0 - 1.0 / d
