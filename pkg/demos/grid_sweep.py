"""End-to-end resource sweep: success rate over the (N, S) grid.

Runs the full experiment engine on a small grid at d = 2, pooling
repeated trials per cell into a success rate with a standard error, and
then extracts the region where the pooled rate conservatively clears a
threshold. The frontier of that region answers the practical question:
at each training-set size, how many shots per swap test are enough?
Also writes the deterministic SVG heatmaps and the raw CSV next to this
script, under demos/out/.
"""

import os

from entanglab import experiments as ex

cfg = ex.ExperimentConfig(
    dims=(2,),
    ns=(8, 16, 32, 64),
    ss=(0, 16, 64, 256),        # s=0 runs the exact-kernel reference
    methods=(ex.SVM_SWAP, ex.MEANEST_TWO),
    test_count=100,
    trials=3,
    base_seed=99,
    success_threshold=0.9,
)

print(f"grid: d={cfg.dims} n={cfg.ns} s={cfg.ss} methods={cfg.methods}")
print(f"{cfg.trials} trials/cell, {cfg.test_count} test states, "
      f"threshold {cfg.success_threshold}")
run = ex.run_grid(cfg)
rows = run.rows
print(f"-> {len(rows)} result rows, {len(run.skips)} skipped cells")

print()
print("pooled success rate (mean over trials +/- stderr):")
pooled = ex.pool_trials(rows)
for method in cfg.methods:
    print(f"  {method}")
    labels = ["exact" if s == ex.EXACT_SHOTS else str(s) for s in cfg.ss]
    print("    n\\s   " + "".join(f"{lab:>14}" for lab in labels))
    for n in cfg.ns:
        cells = []
        for s in cfg.ss:
            if (2, method, n, s) in pooled:
                m, se = pooled[(2, method, n, s)]
                cells.append(f"{m:.3f}+-{se:.3f}")
            else:
                cells.append("-")
        print(f"    {n:<6d}" + "".join(f"{c:>14}" for c in cells))

print()
region = ex.success_region(rows, cfg.success_threshold)
for (d, method), cells in sorted(region.items()):
    # frontier over shot-noisy cells only; the exact rows are the reference
    noisy = {(n, s) for n, s in cells if s != ex.EXACT_SHOTS}
    frontier = ex.region_frontier(noisy)
    desc = ", ".join(f"n={n}: s>={s}" for n, s in sorted(frontier.items()))
    print(f"region d={d} {method}: {len(cells)} cells; shot frontier {desc or '(none)'}")

out_dir = os.path.join(os.path.dirname(os.path.abspath(__file__)), "out")
os.makedirs(out_dir, exist_ok=True)
csv_path = os.path.join(out_dir, "grid_sweep.csv")
with open(csv_path, "w") as fh:
    fh.write(ex.rows_to_csv(rows))
paths = ex.write_heatmaps(rows, out_dir, threshold=cfg.success_threshold)
print()
print(f"wrote {csv_path}")
for p in paths:
    print(f"wrote {p}")
