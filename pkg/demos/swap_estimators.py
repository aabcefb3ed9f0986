"""Swap-test statistics: what S shots buy you, and where squaring goes wrong.

A swap test on two states with overlap F returns outcome 0 with
probability (1+F)/2, so the shot average of (-1)^o estimates F without
bias. Squaring that average does NOT give an unbiased F^2: the square
picks up +(1-F^2)/S from the diagonal terms. The diagonal-free
U-statistic removes the offset at no extra measurement cost. The same
record also demonstrates the two attack modes: single-copy tests on
(psi, phi) pairs versus two-copy tests on (psi x psi, phi x phi), which
hit F^2 directly but burn four copies per shot.
"""

import numpy as np

from entanglab.hilbert import RngStream
from entanglab.measurement import (
    SINGLE_COPY,
    TWO_COPY,
    estimate_overlap,
    sample_overlap_means,
    sample_square_ustats,
    swap_test,
    unbiased_square,
)

F = 0.6
TRIALS = 200_000
rng = RngStream(7701)

print(f"true overlap F = {F}, F^2 = {F * F}")
print()
print("bias of three F^2 estimators, 2e5 independent records per row")
print("S      naive mean^2   predicted bias   u-stat        two-copy mean")
for shots in (4, 16, 64, 256):
    means = sample_overlap_means(np.full(TRIALS, F), shots, SINGLE_COPY, rng.derive("m", shots))
    ustat = sample_square_ustats(np.full(TRIALS, F), shots, rng.derive("u", shots))
    two = sample_overlap_means(np.full(TRIALS, F), shots, TWO_COPY, rng.derive("t", shots))
    naive = float(np.mean(means**2))
    print(
        f"{shots:<6d} {naive - F * F:+.6f}      {(1 - F * F) / shots:+.6f}        "
        f"{float(np.mean(ustat)) - F * F:+.6f}     {float(np.mean(two)) - F * F:+.6f}"
    )

print()
print("single records behave the same way (S = 32):")
rec = swap_test(F, 32, SINGLE_COPY, rng.derive("one"))
print(f"  shot mean        = {estimate_overlap(rec):+.4f}  (estimates F)")
print(f"  mean squared     = {estimate_overlap(rec) ** 2:+.4f}  (biased up for F^2)")
print(f"  u-statistic      = {unbiased_square(rec):+.4f}  (unbiased for F^2)")

print()
print("estimator variance shrinks like 1/S (slope of log var vs log S):")
ss = np.array([8, 32, 128, 512])
var = []
for shots in ss:
    m = sample_overlap_means(np.full(50_000, F), int(shots), SINGLE_COPY, rng.derive("v", int(shots)))
    var.append(float(np.var(m)))
slope = np.polyfit(np.log(ss), np.log(var), 1)[0]
for shots, v in zip(ss, var):
    print(f"  S={shots:<4d} var={v:.3e}   (binomial prediction {(1 - F * F) / shots:.3e})")
print(f"  fitted slope = {slope:+.3f}")
