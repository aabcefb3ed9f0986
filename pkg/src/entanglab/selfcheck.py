"""Cross-check suite wiring the analytic layer against the simulators.

Every check compares an independently computed quantity (closed form,
dense matrix algebra, or Monte Carlo) against what the library produces,
and reports a numeric margin next to its tolerance.  The CLI `validate`
subcommand renders the report and converts failures into a nonzero exit
code, making this the build's fast regression gate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import meanest, oracle, shadows
from .hilbert import (
    ENT,
    SEP,
    RngStream,
    copy_pair_vector,
    sample_state_block,
    states_from_block,
)
from .measurement import SINGLE_COPY, TWO_COPY, swap_baseline_success
from .svm import classify, solve_dual

_SEED = 20240915


@dataclass
class CheckResult:
    name: str
    passed: bool
    margin: float
    tolerance: float
    detail: str = ""


@dataclass
class ValidationReport:
    checks: list[CheckResult] = field(default_factory=list)
    table: list[dict] = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name, margin, tolerance, detail=""):
        self.checks.append(
            CheckResult(name, bool(margin <= tolerance), float(margin), float(tolerance), detail)
        )


def _delta_closed_forms(report: ValidationReport, delta_pp_offset: float):
    worst = 0.0
    for d in (2, 3, 4, 8, 16, 32):
        targets = {
            (SEP, SEP): 4.0 / (d**2 * (d + 1) ** 2) + delta_pp_offset,
            (ENT, ENT): 2.0 / d**4,
            (SEP, ENT): 2.0 / (d**3 * (d + 1)),
        }
        for (a, b), want in targets.items():
            worst = max(worst, abs(oracle.exact_delta(a, b, d) - want))
    report.add("delta_closed_forms", worst, 1e-12, "d in {2,3,4,8,16,32}")


def _delta_dense(report: ValidationReport):
    worst = 0.0
    for d in (2, 3, 4):
        for a in (SEP, ENT):
            for b in (SEP, ENT):
                dense = float(
                    np.trace(oracle.average_state(a, 2, d) @ oracle.average_state(b, 2, d)).real
                )
                worst = max(worst, abs(oracle.exact_delta(a, b, d) - dense))
    report.add("delta_dense_crosscheck", worst, 1e-10, "dense average states, d in {2,3,4}")


def _observable_expectation(report: ValidationReport, rng: RngStream):
    worst = 0.0
    for d in (2, 4):
        for kind, y in ((SEP, 1.0), (ENT, -1.0)):
            blk = sample_state_block(kind, d, 200, rng.derive("obs", d, kind))
            vals = oracle.optimal_expectation_block(blk, d)
            worst = max(worst, float(np.max(np.abs(vals - y))))
    report.add("observable_expectation", worst, 1e-9, "200 states/class, d in {2,4}")

    # Purity route vs the dense operator on copy pairs.  Only small d: the
    # dense form is d^4 x d^4.
    worst = 0.0
    for d in (2, 3):
        a_star = oracle.optimal_observable(d)
        for kind in (SEP, ENT):
            blk = sample_state_block(kind, d, 20, rng.derive("obsx", d, kind))
            fast = oracle.optimal_expectation_block(blk, d)
            for row, val in zip(states_from_block(blk, d, None), fast):
                v = copy_pair_vector(row)
                dense = float((v.conj() @ a_star @ v).real)
                worst = max(worst, abs(dense - val))
    report.add("observable_dense_crosscheck", worst, 1e-9, "pair-vector quadratic form, d in {2,3}")


def _representer_identity(report: ValidationReport):
    worst = 0.0
    for d in (2, 3):
        diff = oracle.representer_reconstruction(d) - oracle.optimal_observable(d)
        worst = max(worst, float(np.max(np.abs(diff))))
    report.add("representer_identity", worst, 1e-10, "d in {2,3}")


def _perm_gram_frozen(report: ValidationReport):
    worst = 0.0
    for d in (2, 3):
        got = oracle.perm_gram(2, d)
        want = np.array([[d * d, d], [d, d * d]], dtype=float)
        worst = max(worst, float(np.max(np.abs(got - want))))
    report.add("perm_gram_frozen", worst, 1e-12, "two-copy permutation Gram")


def _twirl_invariance(report: ValidationReport, rng: RngStream):
    g = rng.derive("twirl").gen
    a = g.standard_normal((16, 16)) + 1j * g.standard_normal((16, 16))
    a = a + a.conj().T
    dense = oracle.twirl(a, 2, 4).to_dense()
    swap = oracle.swap_operator(4)
    comm = dense @ swap - swap @ dense
    report.add(
        "twirl_swap_commutes",
        float(np.max(np.abs(comm))),
        1e-8,
        "twirled operator commutes with copy swap",
    )


def _estimator_unbiasedness(report: ValidationReport, rng: RngStream):
    trials = 3000
    worst = 0.0
    for mode in (TWO_COPY, SINGLE_COPY):
        for kind, want in ((SEP, oracle.exact_delta(SEP, SEP, 2)), (ENT, oracle.exact_delta(ENT, ENT, 2))):
            est = meanest.simulate_train_estimates(
                kind, 2, 8, 8, mode, trials, rng.derive("unb", mode, kind)
            )
            se = est.std(ddof=1) / np.sqrt(trials)
            worst = max(worst, abs(float(est.mean()) - want) / (4.0 * se))
    report.add("estimator_unbiasedness", worst, 1.0, "z/4 vs class self-overlaps, d=2")


def _score_sign(report: ValidationReport, rng: RngStream):
    trials = 2000
    worst = 0.0
    for kind, sign in ((SEP, 1.0), (ENT, -1.0)):
        b = meanest.simulate_scores(kind, 2, 16, 16, 16, SINGLE_COPY, trials, rng.derive("sc", kind))
        se = b.std(ddof=1) / np.sqrt(trials)
        # signed mean must sit at least 4 standard errors on its own side
        worst = max(worst, 1.0 - sign * float(b.mean()) / (4.0 * se))
    report.add("score_sign_margin", worst, 0.0, "mean decision statistic is 4 se off zero")


def _shadow_identity(report: ValidationReport, rng: RngStream):
    worst = 0.0
    for f in (0.0, 0.5, 1.0):
        got = shadows.collision_mean_via_twirl(f, 4)
        worst = max(worst, abs(got - (1.0 + f) / 5.0))
    report.add("shadow_collision_twirl", worst, 1e-12, "D=4, overlaps {0, 1/2, 1}")

    v1 = np.zeros(4, dtype=complex)
    v1[0] = 1.0
    v2 = np.zeros(4, dtype=complex)
    v2[0] = v2[1] = np.sqrt(0.5)
    reps = 150
    ests = np.empty(reps)
    for t in range(reps):
        seeds = shadows.make_seeds(40, rng.derive("sh", t))
        sa = shadows.build_shadow(v1, seeds, 20, rng.derive("sha", t))
        sb = shadows.build_shadow(v2, seeds, 20, rng.derive("shb", t))
        ests[t] = shadows.overlap_from_shadows(sa, sb)
    se = ests.std(ddof=1) / np.sqrt(reps)
    z4 = abs(float(ests.mean()) - 0.5) / (4.0 * se)
    report.add("shadow_estimate_mc", z4, 1.0, "z/4 for overlap 1/2 at D=4")


def _swap_baseline(report: ValidationReport, rng: RngStream):
    trials = 20000
    worst = 0.0
    for d in (2, 4):
        p = swap_baseline_success(d, trials, rng.derive("base", d))
        want = 0.75 - 1.0 / (4.0 * d)
        se = np.sqrt(want * (1.0 - want) / trials)
        worst = max(worst, abs(p - want) / (4.0 * se))
    report.add("swap_baseline", worst, 1.0, "z/4 vs 3/4 - 1/(4d), d in {2,4}")


def _svm_frozen(report: ValidationReport):
    model = solve_dual(np.eye(2), np.array([1.0, -1.0]))
    margin = max(
        float(np.max(np.abs(model.alphas - 1.0))),
        abs(model.bias),
        abs(classify(model, np.array([0.0, 0.0])) - 1),
    )
    report.add("svm_frozen_case", margin, 1e-9, "identity kernel, tie resolves to +1")


def _oracle_table(report: ValidationReport):
    for d in (2, 4, 8):
        report.table.append(
            {
                "d": d,
                "delta_pp": oracle.exact_delta(SEP, SEP, d),
                "delta_mm": oracle.exact_delta(ENT, ENT, d),
                "delta_pm": oracle.exact_delta(SEP, ENT, d),
                "margin": oracle.class_margin(d),
                "swap_success": oracle.swap_success_probability(d),
                "trace_distance": oracle.avg_trace_distance(d),
                "bound_two_copy": oracle.generalization_bound(2, d),
            }
        )


def validate(delta_pp_offset: float = 0.0) -> ValidationReport:
    """Run every cross-check; `delta_pp_offset` shifts one closed-form target
    to let tests confirm the gate actually bites."""
    rng = RngStream(_SEED)
    report = ValidationReport()
    _delta_closed_forms(report, delta_pp_offset)
    _delta_dense(report)
    _observable_expectation(report, rng)
    _representer_identity(report)
    _perm_gram_frozen(report)
    _twirl_invariance(report, rng)
    _estimator_unbiasedness(report, rng)
    _score_sign(report, rng)
    _shadow_identity(report, rng)
    _swap_baseline(report, rng)
    _svm_frozen(report)
    _oracle_table(report)
    return report


def render_report(report: ValidationReport) -> str:
    lines = []
    for c in report.checks:
        flag = "PASS" if c.passed else "FAIL"
        lines.append(
            f"{flag}  {c.name:26s} margin {c.margin:.3e}  tol {c.tolerance:.0e}  {c.detail}"
        )
    lines.append("")
    lines.append(
        "d   delta_pp      delta_mm      delta_pm      margin        "
        "swap_success  trace_dist    bound_c2"
    )
    for row in report.table:
        lines.append(
            f"{row['d']:<3d} {row['delta_pp']:<13.6g} {row['delta_mm']:<13.6g} "
            f"{row['delta_pm']:<13.6g} {row['margin']:<13.6g} "
            f"{row['swap_success']:<13.6g} {row['trace_distance']:<13.6g} "
            f"{row['bound_two_copy']:<.6g}"
        )
    lines.append("")
    failed = [c.name for c in report.checks if not c.passed]
    lines.append("all checks passed" if not failed else f"FAILED: {', '.join(failed)}")
    return "\n".join(lines)
