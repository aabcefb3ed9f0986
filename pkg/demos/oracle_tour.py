"""Tour of the analytic layer: exact class overlaps and the ideal witness.

Everything printed here is a closed form. The two state classes are
product states (positive label) and locally rotated maximally entangled
states (negative label); their two-copy average states overlap by the
Delta table below, and the gap between the diagonal and off-diagonal
entries is what makes the classes learnable at all. The optimal witness
built from subsystem swap operators hits the labels exactly, and its
expansion over a handful of training states is recovered by the
representer identity.
"""

import numpy as np

from entanglab import oracle
from entanglab.hilbert import ENT, SEP, RngStream, sample_state_block

print("exact two-copy class overlaps")
print("d    D_++          D--           D+-           margin        margin*d^4")
for d in (2, 4, 8, 16, 32):
    dpp = oracle.exact_delta(SEP, SEP, d)
    dmm = oracle.exact_delta(ENT, ENT, d)
    dpm = oracle.exact_delta(SEP, ENT, d)
    mu = oracle.class_margin(d)
    # margin decays like 2/d^4: the discrimination signal dies fast with d
    print(f"{d:<4d} {dpp:<13.6g} {dmm:<13.6g} {dpm:<13.6g} {mu:<13.6g} {mu * d**4:.4f}")

print()
print("optimal witness expectation per class (want exactly +1 / -1)")
rng = RngStream(2024)
for d in (2, 4, 8):
    row = [f"d={d}"]
    for kind, want in ((SEP, 1.0), (ENT, -1.0)):
        blk = sample_state_block(kind, d, 100, rng.derive(d, kind))
        vals = oracle.optimal_expectation_block(blk, d)
        row.append(f"{kind}: {vals.mean():+.12f} (max dev {np.max(np.abs(vals - want)):.1e})")
    print("  ".join(row))

print()
print("representer reconstruction: witness rebuilt from class averages")
for d in (2, 3):
    diff = oracle.representer_reconstruction(d) - oracle.optimal_observable(d)
    print(f"d={d}: max |A_rebuilt - A*| = {np.max(np.abs(diff)):.3e}")

print()
print("generalization bound and measurement baselines")
print("d    bound c=1  bound c=2     one-shot success   avg trace distance")
for d in (2, 4, 8, 16):
    print(
        f"{d:<4d} {oracle.generalization_bound(1, d):<10.6g} "
        f"{oracle.generalization_bound(2, d):<13.6g} "
        f"{oracle.swap_success_probability(d):<18.6g} "
        f"{oracle.avg_trace_distance(d):.6g}"
    )
