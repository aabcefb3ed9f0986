"""Bipartite pure states, Haar sampling, and reproducible random streams.

States live on C^d ⊗ C^d and are stored as flat amplitude vectors of length
d**2, row-major: index a*d + b encodes the basis ket |a⟩_A |b⟩_B.  Two copies
of a state therefore carry subsystems in the order (A1, B1, A2, B2), while
permutation-symmetric operators are naturally written with copies grouped as
(A1, A2, B1, B2); ``copy_pair_vector`` and ``regroup_pairs`` translate
between the two conventions explicitly.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOLS

SEP = "sep"   # product state (U_A ⊗ U_B)|0,0⟩, label +1
ENT = "ent"   # maximally entangled (U_A ⊗ U_B) Σ_i |i,i⟩/√d, label -1
CLASS_LABELS = {SEP: +1, ENT: -1}

_MASK64 = (1 << 64) - 1


def _mix(*parts) -> int:
    """Stable 64-bit hash of a tuple of ints/strings (order-sensitive)."""
    h = hashlib.blake2b(digest_size=8)
    for p in parts:
        if isinstance(p, str):
            h.update(b"s" + p.encode() + b"\x00")
        else:
            h.update(b"i" + int(p).to_bytes(16, "little", signed=True))
    return int.from_bytes(h.digest(), "little")


@dataclass
class RngStream:
    """Counter-based random stream addressed by (seed, stream_id).

    Identical (seed, stream_id) pairs reproduce identical draw sequences on
    any platform.  A stream is single-owner: code that fans work out derives
    one child stream per task via :meth:`derive` instead of sharing ``gen``.
    """

    seed: int
    stream_id: int = 0
    _gen: np.random.Generator | None = field(
        default=None, init=False, repr=False, compare=False
    )

    @property
    def gen(self) -> np.random.Generator:
        if self._gen is None:
            key = (self.seed & _MASK64) | ((self.stream_id & _MASK64) << 64)
            self._gen = np.random.Generator(np.random.Philox(key=key))
        return self._gen

    def derive(self, *parts) -> "RngStream":
        """Child stream keyed by this stream's id and the given parts."""
        return RngStream(self.seed, _mix(self.stream_id, *parts))


@dataclass
class PureState:
    """Normalized pure state on C^d ⊗ C^d with an optional class label."""

    amplitudes: np.ndarray
    local_dim: int
    label: int | None = None

    def __post_init__(self):
        self.amplitudes = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        d = int(self.local_dim)
        if d < 2:
            raise ValueError(f"local_dim must be >= 2, got {d}")
        self.local_dim = d
        if self.amplitudes.shape != (d * d,):
            raise ValueError(
                f"amplitude vector has shape {self.amplitudes.shape}, expected ({d * d},)"
            )
        norm = np.linalg.norm(self.amplitudes)
        if abs(norm - 1.0) > DEFAULT_TOLS.state_norm:
            raise ValueError(f"state norm {norm!r} is not 1 within tolerance")
        if self.label not in (+1, -1, None):
            raise ValueError(f"label must be +1, -1 or None, got {self.label!r}")


# ---------------------------------------------------------------------------
# Haar-random unitaries
# ---------------------------------------------------------------------------

def haar_unitaries(dim: int, count: int, rng: RngStream) -> np.ndarray:
    """Stack of `count` Haar-distributed unitaries, shape (count, dim, dim).

    Ginibre matrix -> QR -> multiply Q's columns by the phases that make R's
    diagonal real-positive; this yields the Haar measure exactly.
    """
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    g = rng.gen
    z = g.standard_normal((count, dim, dim)) + 1j * g.standard_normal((count, dim, dim))
    q, r = np.linalg.qr(z / np.sqrt(2.0))
    diag = np.einsum("...ii->...i", r)
    mag = np.abs(diag)
    phases = np.where(mag > 0, diag / np.where(mag > 0, mag, 1.0), 1.0)
    return q * phases[:, None, :]


def haar_unitary(dim: int, rng: RngStream) -> np.ndarray:
    """Single Haar-random unitary of shape (dim, dim)."""
    return haar_unitaries(dim, 1, rng)[0]


def unitarity_defect(u: np.ndarray) -> float:
    """max |U U† − 1|, zero for an exact unitary."""
    n = u.shape[-1]
    return float(np.max(np.abs(u @ u.conj().swapaxes(-1, -2) - np.eye(n))))


# ---------------------------------------------------------------------------
# State sampling
# ---------------------------------------------------------------------------

def sample_state_block(kind: str, d: int, count: int, rng: RngStream) -> np.ndarray:
    """Sample `count` states of one class as rows of a (count, d**2) array.

    Both classes draw an independent pair (U_A, U_B) of Haar unitaries per
    state; "sep" keeps (U_A ⊗ U_B)|0,0⟩, "ent" applies the same local pair to
    the maximally entangled state Σ_i |i,i⟩/√d.
    """
    if kind not in CLASS_LABELS:
        raise ValueError(f"unknown state class {kind!r}; expected 'sep' or 'ent'")
    if d < 2:
        raise ValueError(f"local dimension must be >= 2, got {d}")
    ua = haar_unitaries(d, count, rng)
    ub = haar_unitaries(d, count, rng)
    if kind == SEP:
        # (U_A ⊗ U_B)|0,0⟩ = (first column of U_A) ⊗ (first column of U_B)
        psi = ua[:, :, 0][:, :, None] * ub[:, :, 0][:, None, :]
    else:
        # coefficient matrix of Σ_i |i,i⟩/√d is 1/√d — apply U_A · M · U_B^T
        psi = np.matmul(ua, ub.transpose(0, 2, 1)) / np.sqrt(d)
    return psi.reshape(count, d * d)


def sample_state(kind: str, d: int, rng: RngStream) -> PureState:
    """One Haar-random state of the given class ("sep" or "ent")."""
    block = sample_state_block(kind, d, 1, rng)
    return PureState(block[0], d, CLASS_LABELS[kind])


def states_from_block(block: np.ndarray, d: int, label: int | None) -> list[PureState]:
    """Wrap the rows of a (n, d**2) amplitude block as PureState objects."""
    return [PureState(row, d, label) for row in block]


# ---------------------------------------------------------------------------
# Overlaps and reduced states
# ---------------------------------------------------------------------------

def overlap(a: PureState, b: PureState) -> float:
    """Fidelity |⟨a|b⟩|² between two pure states of equal dimension."""
    if a.local_dim != b.local_dim:
        raise ValueError(
            f"dimension mismatch: {a.local_dim} vs {b.local_dim}"
        )
    return float(np.abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def overlap_matrix(block_a: np.ndarray, block_b: np.ndarray) -> np.ndarray:
    """All-pairs |⟨a_i|b_j⟩|² between the rows of two amplitude blocks."""
    inner = block_a.conj() @ block_b.T
    return (inner.real ** 2 + inner.imag ** 2)


def reduced_density(state: PureState, subsystem: str = "A") -> np.ndarray:
    """Reduced density matrix on one subsystem, shape (d, d)."""
    d = state.local_dim
    psi = state.amplitudes.reshape(d, d)
    if subsystem == "A":
        return psi @ psi.conj().T
    if subsystem == "B":
        return psi.T @ psi.conj()
    raise ValueError(f"subsystem must be 'A' or 'B', got {subsystem!r}")


def reduced_purity(state: PureState, subsystem: str = "A") -> float:
    """Tr[ρ_X²] of the reduced state; 1 for product, 1/d for maximally entangled."""
    rho = reduced_density(state, subsystem)
    # Hermitian ρ: Tr[ρ²] = Σ|ρ_ij|² = ||ρ||_F²
    return float(np.vdot(rho, rho).real)


def reduced_purity_block(block: np.ndarray, d: int, subsystem: str = "A") -> np.ndarray:
    """Tr[ρ_X²] for every row of a (n, d**2) amplitude block."""
    psi = block.reshape(-1, d, d)
    if subsystem == "B":
        psi = psi.transpose(0, 2, 1)
    elif subsystem != "A":
        raise ValueError(f"subsystem must be 'A' or 'B', got {subsystem!r}")
    rho = np.matmul(psi, psi.conj().transpose(0, 2, 1))
    return np.einsum("nij,nij->n", rho, rho.conj()).real


# ---------------------------------------------------------------------------
# Two-copy index conventions
# ---------------------------------------------------------------------------

def copy_pair_vector(state: PureState) -> np.ndarray:
    """Amplitudes of |ψ⟩⊗|ψ⟩ with axes regrouped to (A1, A2, B1, B2).

    The plain tensor square carries axes (A1, B1, A2, B2); grouping both
    copies of each subsystem together matches how permutation operators on
    copy pairs are written.
    """
    d = state.local_dim
    sq = np.tensordot(state.amplitudes, state.amplitudes, axes=0)
    return sq.reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d ** 4)


def regroup_pairs(mat: np.ndarray, d: int) -> np.ndarray:
    """Reorder a d⁴×d⁴ operator between (A1,B1,A2,B2) and (A1,A2,B1,B2) axis
    groupings.  The axis permutation is an involution, so the same call maps
    in both directions."""
    D = d ** 4
    if mat.shape != (D, D):
        raise ValueError(f"operator shape {mat.shape} does not match d={d}")
    t = mat.reshape([d] * 8)
    t = t.transpose(0, 2, 1, 3, 4, 6, 5, 7)
    return t.reshape(D, D)
