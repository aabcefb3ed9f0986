"""Grid experiments: success-rate sweeps, regions, variance tables, plots.

A grid cell is (d, N, S, method): sample N training states per class, fit
the method, classify fresh test states, and report the success fraction
with its binomial standard error and the full resource cost.  Cells are
seeded by hashing (base_seed, d, N, S, method, trial), so any subset of a
grid can be reproduced in isolation and reruns are byte-identical.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import meanest, shadows, svm
from .config import (
    DEFAULT_DIMS,
    DEFAULT_TEST_STATES,
    DEFAULT_TRIALS,
    WORKERS_ENV_VAR,
)
from .hilbert import (
    CLASS_LABELS,
    ENT,
    SEP,
    RngStream,
    _mix,
    overlap_matrix,
    sample_state_block,
    states_from_block,
)
from .measurement import EXACT_SHOTS, CostReport, is_exact, kernel_matrix, kernel_rows

SVM_SWAP = "svm_swap"
SVM_EXACT = "svm_exact"
MEANEST_SINGLE = "meanest_single"
MEANEST_TWO = "meanest_two"
SVM_SHADOW = "svm_shadow"
MEANEST_SHADOW = "meanest_shadow"
METHODS = (SVM_SWAP, SVM_EXACT, MEANEST_SINGLE, MEANEST_TWO, SVM_SHADOW, MEANEST_SHADOW)

CSV_HEADER = "d,N,S,method,trial_seed,success_rate,stderr,tie_count,swap_tests,state_copies"


class ConfigError(ValueError):
    """Malformed experiment configuration (CLI exit code 2)."""


@dataclass
class ExperimentConfig:
    dims: tuple = DEFAULT_DIMS
    ns: tuple = (16, 64, 256)
    ss: tuple = (16, 256, 4096)
    methods: tuple = (SVM_SWAP,)
    test_count: int = DEFAULT_TEST_STATES
    trials: int = DEFAULT_TRIALS
    base_seed: int = 0
    success_threshold: float = 0.99

    def __post_init__(self):
        for name in ("dims", "ns", "ss", "methods"):
            seq = tuple(getattr(self, name))
            if not seq:
                raise ConfigError(f"{name} must be non-empty")
            setattr(self, name, seq)
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError(f"unknown method {m!r}; choose from {METHODS}")
        if any(d < 2 for d in self.dims):
            raise ConfigError("dims must be >= 2")
        if any(n < 2 for n in self.ns):
            raise ConfigError("ns must be >= 2 (training pairs per class)")
        if any(s < 0 for s in self.ss):
            raise ConfigError("ss must be >= 0 (0 denotes the exact mode)")
        if self.test_count < 1:
            raise ConfigError("test_count must be >= 1")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not 0.5 < self.success_threshold <= 1.0:
            raise ConfigError("success_threshold must lie in (0.5, 1]")


def config_from_dict(data: dict) -> ExperimentConfig:
    allowed = set(ExperimentConfig.__dataclass_fields__)
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        return ExperimentConfig(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return data


def load_config(path: str) -> ExperimentConfig:
    return config_from_dict(_load_json(path))


@dataclass
class CellResult:
    d: int
    n: int
    s: int
    method: str
    trial_seed: int
    success_rate: float
    stderr: float
    tie_count: int
    cost: CostReport

    def sort_key(self):
        return (self.d, self.n, self.s, self.method, self.trial_seed)


@dataclass
class SkipRecord:
    d: int
    n: int
    s: int
    method: str
    reason: str


@dataclass
class GridRun:
    rows: list[CellResult] = field(default_factory=list)
    skips: list[SkipRecord] = field(default_factory=list)


def cell_seed(base_seed: int, d: int, n: int, s: int, method: str, trial: int) -> int:
    return _mix(base_seed, d, n, s, method, trial)


def _svm_cell(sep_blk, ent_blk, test_blk, d, s, rng):
    train = states_from_block(sep_blk, d, CLASS_LABELS[SEP]) + states_from_block(
        ent_blk, d, CLASS_LABELS[ENT]
    )
    y = np.array([st.label for st in train], dtype=np.float64)
    shots = None if is_exact(s) else s
    gram, cost = kernel_matrix(train, 2, shots, rng.derive("gram"))
    try:
        model = svm.solve_dual(gram, y)
    except svm.ConvergenceError as exc:
        model = exc.model  # best iterate; grids should not stall in practice
    tests = states_from_block(test_blk, d, None)
    rows, row_cost = kernel_rows(tests, train, 2, shots, rng.derive("rows"))
    cost.merge(row_cost)
    dec = svm.decision_values(model, rows)
    preds = np.where(dec >= 0.0, 1, -1)  # exact zero resolves to +1
    ties = int(np.sum(dec == 0.0))
    return preds, ties, cost


def _meanest_cell(sep_blk, ent_blk, test_blk, d, s, mode, rng):
    sep = states_from_block(sep_blk, d, CLASS_LABELS[SEP])
    ent = states_from_block(ent_blk, d, CLASS_LABELS[ENT])
    model = meanest.train(sep, ent, s, mode, rng.derive("fit"))
    scores, test_cost = meanest.score_block(test_blk, model, s, rng.derive("score"))
    cost = model.cost
    cost.merge(test_cost)
    preds = np.where(scores > 0.0, 1, np.where(scores < 0.0, -1, 0))
    ties = int(np.sum(scores == 0.0))  # a zero never matches a ±1 label
    return preds, ties, cost


def _shadow_cell(sep_blk, ent_blk, test_blk, d, s, method, rng):
    if is_exact(s):
        raise ValueError("shadow methods need a finite copy budget per state")
    n = sep_blk.shape[0]
    n_u, n_m = shadows.shadow_plan(s, d * d)
    seeds = shadows.make_seeds(n_u, rng.derive("basis"))
    shads = shadows.build_shadow_block(
        np.concatenate([sep_blk, ent_blk, test_blk]), seeds, n_m, rng.derive("meas")
    )
    train_sh = shads[: 2 * n]
    test_sh = shads[2 * n :]
    cost = CostReport()
    cost.add("shadow", 0, len(shads) * n_u * n_m)
    cross = shadows.overlap_rows_from_shadows(test_sh, train_sh) ** 2
    if method == SVM_SHADOW:
        gram = shadows.overlap_matrix_from_shadows(train_sh) ** 2
        np.fill_diagonal(gram, 1.0)
        y = np.array([CLASS_LABELS[SEP]] * n + [CLASS_LABELS[ENT]] * n, dtype=np.float64)
        try:
            model = svm.solve_dual(gram, y)
        except svm.ConvergenceError as exc:
            model = exc.model
        dec = svm.decision_values(model, cross)
        preds = np.where(dec >= 0.0, 1, -1)
        ties = int(np.sum(dec == 0.0))
        return preds, ties, cost
    ests = shadows.overlap_matrix_from_shadows(train_sh) ** 2
    iu, ju = np.triu_indices(n, k=1)
    dpp = float(ests[:n, :n][iu, ju].mean())
    dmm = float(ests[n:, n:][iu, ju].mean())
    dpy = cross[:, :n].mean(axis=1)
    dmy = cross[:, n:].mean(axis=1)
    scores = 2.0 * (dpy - dmy) - (dpp - dmm)
    preds = np.where(scores > 0.0, 1, np.where(scores < 0.0, -1, 0))
    ties = int(np.sum(scores == 0.0))
    return preds, ties, cost


def run_cell(
    d: int,
    n: int,
    s: int,
    method: str,
    seed: int,
    test_count: int = DEFAULT_TEST_STATES,
) -> CellResult:
    """One grid cell: sample, train, classify fresh states, tally the cost."""
    if method not in METHODS:
        raise ConfigError(f"unknown method {method!r}")
    rng = RngStream(seed)
    sep_blk = sample_state_block(SEP, d, n, rng.derive("train", SEP))
    ent_blk = sample_state_block(ENT, d, n, rng.derive("train", ENT))
    m_sep = test_count - test_count // 2
    m_ent = test_count // 2
    test_parts = [sample_state_block(SEP, d, m_sep, rng.derive("test", SEP))]
    if m_ent:
        test_parts.append(sample_state_block(ENT, d, m_ent, rng.derive("test", ENT)))
    test_blk = np.concatenate(test_parts)
    labels = np.array([1] * m_sep + [-1] * m_ent)

    if method in (SVM_SWAP, SVM_EXACT):
        s_eff = EXACT_SHOTS if method == SVM_EXACT else s
        preds, ties, cost = _svm_cell(sep_blk, ent_blk, test_blk, d, s_eff, rng)
    elif method in (MEANEST_SINGLE, MEANEST_TWO):
        mode = meanest.SINGLE_COPY if method == MEANEST_SINGLE else meanest.TWO_COPY
        preds, ties, cost = _meanest_cell(sep_blk, ent_blk, test_blk, d, s, mode, rng)
    else:
        preds, ties, cost = _shadow_cell(sep_blk, ent_blk, test_blk, d, s, method, rng)

    rate = float(np.mean(preds == labels))
    stderr = float(np.sqrt(rate * (1.0 - rate) / test_count))
    return CellResult(d, n, s, method, seed, rate, stderr, ties, cost)


def _cell_task(args):
    # skips must survive the process pool, so errors travel as values
    try:
        return run_cell(*args)
    except ValueError as exc:
        return SkipRecord(args[0], args[1], args[2], args[3], str(exc))


def _worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV_VAR, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def run_grid(config: ExperimentConfig) -> GridRun:
    """Every (d, N, S, method) x trial cell of the config, canonically ordered.

    Exact-kernel cells ignore S, so they collapse onto the sentinel S=0 and
    run once per (d, N, trial).  Cells whose method rejects the requested
    shot count (e.g. single-copy estimators at S=1) are recorded as skips.
    """
    cells = []
    seen = set()
    for d in sorted(config.dims):
        for n in sorted(config.ns):
            for s in sorted(config.ss):
                for method in sorted(config.methods):
                    s_eff = EXACT_SHOTS if method == SVM_EXACT else s
                    for trial in range(config.trials):
                        key = (d, n, s_eff, method, trial)
                        if key in seen:
                            continue
                        seen.add(key)
                        seed = cell_seed(config.base_seed, d, n, s_eff, method, trial)
                        cells.append((d, n, s_eff, method, seed, config.test_count))

    run = GridRun()
    workers = _worker_count()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_cell_task, cells, chunksize=1))
    else:
        outcomes = [_cell_task(args) for args in cells]
    for outcome in outcomes:
        (run.skips if isinstance(outcome, SkipRecord) else run.rows).append(outcome)
    run.rows.sort(key=CellResult.sort_key)
    return run


# ---------------------------------------------------------------------------
# CSV round trip
# ---------------------------------------------------------------------------

def rows_to_csv(rows: list[CellResult]) -> str:
    lines = [CSV_HEADER]
    for r in sorted(rows, key=CellResult.sort_key):
        lines.append(
            f"{r.d},{r.n},{r.s},{r.method},{r.trial_seed},"
            f"{r.success_rate:.10g},{r.stderr:.10g},{r.tie_count},"
            f"{r.cost.swap_tests},{r.cost.state_copies}"
        )
    return "\n".join(lines) + "\n"


def write_csv(rows: list[CellResult], path: str) -> str:
    text = rows_to_csv(rows)
    with open(path, "w") as fh:
        fh.write(text)
    return path


def rows_from_csv_text(text: str) -> list[CellResult]:
    lines = [ln for ln in text.strip().splitlines() if ln]
    if not lines or lines[0] != CSV_HEADER:
        raise ConfigError("input is not a grid CSV (missing canonical header)")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 10:
            raise ConfigError(f"malformed CSV line: {ln!r}")
        cost = CostReport()
        cost.add("total", int(parts[8]), int(parts[9]))
        rows.append(
            CellResult(
                int(parts[0]),
                int(parts[1]),
                int(parts[2]),
                parts[3],
                int(parts[4]),
                float(parts[5]),
                float(parts[6]),
                int(parts[7]),
                cost,
            )
        )
    return rows


def read_csv(path: str) -> list[CellResult]:
    """Parse grid rows from a CSV file."""
    try:
        with open(path) as fh:
            return rows_from_csv_text(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# Success regions
# ---------------------------------------------------------------------------

def pool_trials(rows: list[CellResult]) -> dict:
    """(d, method, n, s) -> (mean success, stderr of that mean) over trials."""
    groups: dict = {}
    for r in rows:
        groups.setdefault((r.d, r.method, r.n, r.s), []).append(r)
    pooled = {}
    for key, rs in groups.items():
        k = len(rs)
        mean = sum(r.success_rate for r in rs) / k
        se = float(np.sqrt(sum(r.stderr**2 for r in rs)) / k)
        pooled[key] = (mean, se)
    return pooled


def success_region(rows: list[CellResult], threshold: float) -> dict:
    """Cells whose pooled success clears the threshold conservatively.

    Returns {(d, method): set of (n, s)} with mean - stderr >= threshold,
    pooling all trials of each cell first.
    """
    region: dict = {}
    for (d, method, n, s), (mean, se) in pool_trials(rows).items():
        region.setdefault((d, method), set())
        if mean - se >= threshold:
            region[(d, method)].add((n, s))
    return region


def region_frontier(cells: set) -> dict:
    """Minimal shot count reaching the region at each training size."""
    frontier: dict = {}
    for n, s in cells:
        if n not in frontier or s < frontier[n]:
            frontier[n] = s
    return frontier


# ---------------------------------------------------------------------------
# Variance sweeps
# ---------------------------------------------------------------------------

@dataclass
class VarianceConfig:
    d: int = 2
    modes: tuple = meanest.MODES
    ns: tuple = (8, 16, 32, 64)
    ss: tuple = (8, 16, 32, 64)
    fixed_n: int = 16
    fixed_s: int = 16
    trials: int = 2000
    base_seed: int = 0

    def __post_init__(self):
        self.modes = tuple(self.modes)
        self.ns = tuple(self.ns)
        self.ss = tuple(self.ss)
        for m in self.modes:
            if m not in meanest.MODES:
                raise ConfigError(f"unknown estimator mode {m!r}")
        if len(self.ns) < 2 or len(self.ss) < 2:
            raise ConfigError("need at least two N and two S points to fit slopes")
        if self.trials < 2:
            raise ConfigError("trials must be >= 2")


def variance_config_from_dict(data: dict) -> VarianceConfig:
    allowed = set(VarianceConfig.__dataclass_fields__)
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown variance config keys: {sorted(unknown)}")
    try:
        return VarianceConfig(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_variance_config(path: str) -> VarianceConfig:
    return variance_config_from_dict(_load_json(path))


def _fit_slope(xs, ys) -> float:
    return float(np.polyfit(np.log2(np.asarray(xs, float)), np.log2(np.asarray(ys, float)), 1)[0])


def variance_sweep(vc: VarianceConfig) -> dict:
    """Empirical estimator variances along N and S axes with log-log slopes.

    Returns {"rows": [...], "slopes": {...}}; each row is a dict with keys
    quantity (train/test/score), mode, axis (N or S), point, variance.
    Slopes are keyed "quantity_vs_axis/mode".
    """
    rng = RngStream(vc.base_seed, _mix("variance-sweep"))
    rows = []
    slopes = {}
    for mode in vc.modes:
        train_vs_s = []
        for s in vc.ss:
            est = meanest.simulate_train_estimates(
                SEP, vc.d, vc.fixed_n, s, mode, vc.trials, rng.derive("ts", mode, s)
            )
            train_vs_s.append(float(np.var(est, ddof=1)))
            rows.append(
                {"quantity": "train", "mode": mode, "axis": "S", "point": s,
                 "variance": train_vs_s[-1]}
            )
        slopes[f"train_vs_S/{mode}"] = _fit_slope(vc.ss, train_vs_s)

        train_vs_n = []
        test_vs_n = []
        score_vs_n = []
        for n in vc.ns:
            est = meanest.simulate_train_estimates(
                SEP, vc.d, n, vc.fixed_s, mode, vc.trials, rng.derive("tn", mode, n)
            )
            train_vs_n.append(float(np.var(est, ddof=1)))
            rows.append(
                {"quantity": "train", "mode": mode, "axis": "N", "point": n,
                 "variance": train_vs_n[-1]}
            )
            tst = meanest.simulate_test_estimates(
                SEP, SEP, vc.d, n, vc.fixed_s, mode, vc.trials, rng.derive("xn", mode, n)
            )
            test_vs_n.append(float(np.var(tst, ddof=1)))
            rows.append(
                {"quantity": "test", "mode": mode, "axis": "N", "point": n,
                 "variance": test_vs_n[-1]}
            )
            sc = meanest.simulate_scores(
                SEP, vc.d, n, vc.fixed_s, vc.fixed_s, mode, vc.trials,
                rng.derive("sn", mode, n),
            )
            score_vs_n.append(float(np.var(sc, ddof=1)))
            rows.append(
                {"quantity": "score", "mode": mode, "axis": "N", "point": n,
                 "variance": score_vs_n[-1]}
            )
        slopes[f"train_vs_N/{mode}"] = _fit_slope(vc.ns, train_vs_n)
        slopes[f"test_vs_N/{mode}"] = _fit_slope(vc.ns, test_vs_n)
        slopes[f"score_vs_N/{mode}"] = _fit_slope(vc.ns, score_vs_n)
    return {"rows": rows, "slopes": slopes}


def variance_table_csv(sweep: dict) -> str:
    lines = ["quantity,mode,axis,point,variance"]
    for row in sweep["rows"]:
        lines.append(
            f"{row['quantity']},{row['mode']},{row['axis']},{row['point']},"
            f"{row['variance']:.10g}"
        )
    lines.append("")
    lines.append("slope,value")
    for key in sorted(sweep["slopes"]):
        lines.append(f"{key},{sweep['slopes'][key]:.6f}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Plots
# ---------------------------------------------------------------------------

def write_heatmaps(
    rows: list[CellResult],
    out_dir: str,
    threshold: float = 0.99,
    xaxis: str = "S",
) -> list[str]:
    """One SVG heatmap per (d, method): success rate over the (N, S) grid.

    Axes are log2 N (horizontal) and log2 S (vertical); xaxis="NS" switches
    the vertical axis to log2(N*S).  Cells in the pooled success region are
    outlined.  Output is deterministic (fixed hash salt, no timestamps).
    """
    if xaxis not in ("S", "NS"):
        raise ConfigError(f"xaxis must be 'S' or 'NS', got {xaxis!r}")
    import matplotlib

    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "entanglab"
    import matplotlib.pyplot as plt

    os.makedirs(out_dir, exist_ok=True)
    pooled = pool_trials(rows)
    region = success_region(rows, threshold)
    combos = sorted({(d, method) for (d, method, _, _) in pooled})
    paths = []
    for d, method in combos:
        cells = {
            (n, s): val
            for (dd, mm, n, s), val in pooled.items()
            if dd == d and mm == method
        }
        ns = sorted({n for n, _ in cells})
        raw_ss = sorted({s for _, s in cells})
        if xaxis == "NS":
            ys = sorted({n * s for (n, s) in cells})
        else:
            ys = raw_ss
        grid = np.full((len(ys), len(ns)), np.nan)
        for (n, s), (mean, _se) in cells.items():
            yv = n * s if xaxis == "NS" else s
            grid[ys.index(yv), ns.index(n)] = mean
        fig, ax = plt.subplots(figsize=(4.8, 4.0))
        im = ax.imshow(
            grid,
            origin="lower",
            aspect="auto",
            vmin=0.5,
            vmax=1.0,
            cmap="viridis",
            interpolation="nearest",
        )
        in_region = region.get((d, method), set())
        for (n, s) in in_region:
            yv = n * s if xaxis == "NS" else s
            xi, yi = ns.index(n), ys.index(yv)
            ax.add_patch(
                plt.Rectangle(
                    (xi - 0.5, yi - 0.5), 1, 1, fill=False, edgecolor="red", lw=1.4
                )
            )
        # exact-kernel rows carry the shots sentinel 0; label them instead of log2(0)
        def _tick(v: int) -> str:
            return "exact" if v == 0 else str(int(round(np.log2(v))))

        ax.set_xticks(range(len(ns)), [_tick(n) for n in ns])
        ax.set_yticks(range(len(ys)), [_tick(y) for y in ys])
        ax.set_xlabel("log2 N")
        ax.set_ylabel("log2 (N*S)" if xaxis == "NS" else "log2 S")
        ax.set_title(f"d={d} {method}")
        fig.colorbar(im, ax=ax, label="success rate")
        suffix = "_ns" if xaxis == "NS" else ""
        path = os.path.join(out_dir, f"success_d{d}_{method}{suffix}.svg")
        fig.savefig(path, metadata={"Date": None})
        plt.close(fig)
        paths.append(path)
    return paths
