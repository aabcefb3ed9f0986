"""Overlaps from randomized measurements: no joint swap hardware needed.

Two states measured in the same random bases never meet in the lab, yet
their overlap is recoverable from outcome-collision statistics: under a
basis twirl the collision probability is (1 + F) / (D + 1), so the
rescaled estimate (D + 1) q_hat - 1 targets F. The demo builds shadows
for a pair of d x d states, compares the estimate to the exact overlap
as the budget grows, and then exercises the budget planner that picks
(n_u, n_m) for a requested precision or a total copy allowance.
"""

import numpy as np

from entanglab import shadows
from entanglab.hilbert import ENT, SEP, RngStream, sample_state_block

D_LOCAL = 2
D_TOT = D_LOCAL * D_LOCAL

rng = RngStream(31830)
a = sample_state_block(SEP, D_LOCAL, 1, rng.derive("a"))[0]
b = sample_state_block(ENT, D_LOCAL, 1, rng.derive("b"))[0]
exact = float(np.abs(np.vdot(a, b)) ** 2)
print(f"pair of d={D_LOCAL} states, exact overlap F = {exact:.6f}")

print()
print("estimate vs budget (shared bases, independent outcome draws)")
print("n_u    n_m    copies/state   mean est    std (100 reps)")
for n_u, n_m in ((8, 8), (32, 16), (128, 32)):
    reps = np.empty(100)
    for r in range(reps.size):
        sub = rng.derive("rep", n_u, n_m, r)
        seeds = shadows.make_seeds(n_u, sub.derive("seeds"))
        sh_a = shadows.build_shadow(a, seeds, n_m, sub.derive("ma"))
        sh_b = shadows.build_shadow(b, seeds, n_m, sub.derive("mb"))
        reps[r] = shadows.overlap_from_shadows(sh_a, sh_b)
    print(
        f"{n_u:<6d} {n_m:<6d} {n_u * n_m:<14d} {reps.mean():<11.4f} {reps.std():.4f}"
    )

print()
print("collision mean is exactly (1 + F) / (D + 1) under the twirl:")
for f in (0.0, 0.5, 1.0):
    got = shadows.collision_mean_via_twirl(f, D_TOT)
    print(f"  F={f:.2f}: twirl value {got:.10f}  closed form {(1 + f) / (D_TOT + 1):.10f}")

print()
print("budget planner: smallest (n_u, n_m) for a target std, calibrated safety")
for sigma in (0.2, 0.1, 0.05):
    n_u, n_m = shadows.shadow_budget(sigma, D_TOT, safety=shadows.CALIBRATED_SAFETY)
    print(f"  sigma={sigma:<5g} -> n_u={n_u:<5d} n_m={n_m:<5d} ({n_u * n_m} copies/state)")

print()
print("copy-matched plan (inverts the budget rule for a total allowance):")
for total in (256, 1024, 4096):
    n_u, n_m = shadows.shadow_plan(total, D_TOT)
    print(f"  {total:>5d} copies -> n_u={n_u:<5d} n_m={n_m:<5d} (uses {n_u * n_m})")

print()
print("shadows serialize to JSON and survive the round trip:")
seeds = shadows.make_seeds(4, rng.derive("json-seeds"))
sh = shadows.build_shadow(a, seeds, 6, rng.derive("json-m"))
back = shadows.from_json(shadows.to_json(sh))
same = np.array_equal(back.counts, sh.counts) and np.array_equal(
    back.unitary_seeds, sh.unitary_seeds
)
print(f"  counts and seeds identical after round trip: {same}")
