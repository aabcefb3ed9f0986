"""State sampling, RNG streams, and two-copy index plumbing."""

import numpy as np
import pytest

from entanglab.hilbert import (
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
    reduced_purity_block,
    regroup_pairs,
    sample_state,
    sample_state_block,
    states_from_block,
    unitarity_defect,
)


def test_rng_stream_is_deterministic():
    a = RngStream(123, 5).gen.random(8)
    b = RngStream(123, 5).gen.random(8)
    assert np.array_equal(a, b)


def test_rng_derive_separates_streams():
    root = RngStream(7)
    x = root.derive("kernel").gen.random(4)
    y = root.derive("rows").gen.random(4)
    z = root.derive("kernel", 1).gen.random(4)
    assert not np.array_equal(x, y)
    assert not np.array_equal(x, z)
    # re-deriving the same parts lands on the same stream
    assert np.array_equal(x, root.derive("kernel").gen.random(4))


def test_derive_distinguishes_strings_from_ints():
    root = RngStream(0)
    assert not np.array_equal(
        root.derive("1").gen.random(4), root.derive(1).gen.random(4)
    )


def test_haar_unitaries_are_unitary_and_deterministic():
    rng = RngStream(42)
    us = haar_unitaries(5, 3, rng)
    assert us.shape == (3, 5, 5)
    assert unitarity_defect(us) < 1e-12
    again = haar_unitaries(5, 3, RngStream(42))
    assert np.array_equal(us, again)


def test_haar_first_moment():
    # |u_00|^2 of a Haar column is Beta(1, d-1) with mean 1/d
    us = haar_unitaries(4, 3000, RngStream(9))
    m = float(np.mean(np.abs(us[:, 0, 0]) ** 2))
    se = np.sqrt(0.25 * 0.75 / 3000)  # loose, true var is smaller
    assert abs(m - 0.25) < 4 * se


def test_pure_state_validation():
    with pytest.raises(ValueError):
        PureState(np.ones(4), 2)  # unnormalized
    with pytest.raises(ValueError):
        PureState(np.zeros(3), 2)  # wrong length
    with pytest.raises(ValueError):
        PureState(np.array([1.0, 0, 0, 0]), 2, label=2)


def test_sample_state_classes():
    rng = RngStream(1)
    for d in (2, 3, 5):
        sep = sample_state(SEP, d, rng.derive("s", d))
        ent = sample_state(ENT, d, rng.derive("e", d))
        assert sep.label == CLASS_LABELS[SEP]
        assert ent.label == CLASS_LABELS[ENT]
        # product states have pure marginals, maximally entangled have purity 1/d
        assert abs(reduced_purity(sep, "A") - 1.0) < 1e-12
        assert abs(reduced_purity(sep, "B") - 1.0) < 1e-12
        assert abs(reduced_purity(ent, "A") - 1.0 / d) < 1e-12
        assert abs(reduced_purity(ent, "B") - 1.0 / d) < 1e-12


def test_sample_state_block_matches_norms():
    blk = sample_state_block(ENT, 3, 10, RngStream(4))
    assert blk.shape == (10, 9)
    norms = np.linalg.norm(blk, axis=1)
    assert np.max(np.abs(norms - 1.0)) < 1e-12


def test_unknown_kind_rejected():
    with pytest.raises(ValueError):
        sample_state_block("mixed", 2, 1, RngStream(0))


def test_states_from_block_label_check():
    blk = sample_state_block(SEP, 2, 2, RngStream(3))
    with pytest.raises(ValueError):
        states_from_block(blk, 2, "sep")  # labels are numeric
    states = states_from_block(blk, 2, -1)
    assert all(st.label == -1 for st in states)


def test_overlap_matrix_matches_pairwise():
    rng = RngStream(11)
    a = sample_state_block(SEP, 2, 4, rng.derive("a"))
    b = sample_state_block(ENT, 2, 3, rng.derive("b"))
    mat = overlap_matrix(a, b)
    assert mat.shape == (4, 3)
    for i in range(4):
        for j in range(3):
            want = overlap(PureState(a[i], 2), PureState(b[j], 2))
            assert abs(mat[i, j] - want) < 1e-12
    assert np.all(mat >= 0.0) and np.all(mat <= 1.0 + 1e-12)


def test_reduced_density_consistency():
    st = sample_state(ENT, 3, RngStream(8))
    ra = reduced_density(st, "A")
    rb = reduced_density(st, "B")
    assert abs(np.trace(ra) - 1.0) < 1e-12
    assert np.max(np.abs(ra - ra.conj().T)) < 1e-12
    assert abs(float(np.trace(ra @ ra).real) - reduced_purity(st, "A")) < 1e-12
    assert abs(float(np.trace(rb @ rb).real) - reduced_purity(st, "B")) < 1e-12


def test_reduced_purity_block_matches_scalar():
    blk = sample_state_block(SEP, 3, 5, RngStream(14))
    pa = reduced_purity_block(blk, 3, "A")
    pb = reduced_purity_block(blk, 3, "B")
    for i, st in enumerate(states_from_block(blk, 3, None)):
        assert abs(pa[i] - reduced_purity(st, "A")) < 1e-12
        assert abs(pb[i] - reduced_purity(st, "B")) < 1e-12


def test_copy_pair_vector_grouping():
    st = sample_state(ENT, 2, RngStream(21))
    v = copy_pair_vector(st)
    assert abs(np.linalg.norm(v) - 1.0) < 1e-12
    # undo the (A1,A2,B1,B2) grouping and recover the plain tensor square
    d = 2
    plain = np.tensordot(st.amplitudes, st.amplitudes, axes=0).reshape(d, d, d, d)
    regrouped = v.reshape(d, d, d, d).transpose(0, 2, 1, 3)
    assert np.max(np.abs(regrouped - plain)) < 1e-15


def test_regroup_pairs_is_involution():
    d = 2
    g = RngStream(33).gen
    m = g.standard_normal((d**4, d**4)) + 1j * g.standard_normal((d**4, d**4))
    assert np.max(np.abs(regroup_pairs(regroup_pairs(m, d), d) - m)) == 0.0


def test_haar_unitary_single():
    u = haar_unitary(3, RngStream(2))
    assert u.shape == (3, 3)
    assert unitarity_defect(u) < 1e-12
