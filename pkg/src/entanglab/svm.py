"""Soft-margin kernel SVM trained by sequential minimal optimization.

Solves the dual problem
    max_α  Σ_n α_n − ½ Σ_{nm} α_n α_m y_n y_m K_{nm}
    s.t.   0 ≤ α_n ≤ C,   Σ_n α_n y_n = 0
with maximal-violating-pair working-set selection.  Shot-noise estimated
Gram matrices are generally indefinite; the solver runs on them directly
(a non-positive working-pair curvature is floored at a tiny positive value)
and an optional spectral clip to the PSD cone is available for ablations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOLS

MAX_PAIR_UPDATES = 10 ** 7
_TAU = 1e-12   # curvature floor for indefinite working pairs


class ConvergenceError(RuntimeError):
    """Raised when the update cap is hit; carries the best iterate."""

    def __init__(self, message: str, model: "SvmModel"):
        super().__init__(message)
        self.model = model


@dataclass
class SvmModel:
    """Trained dual variables and bias of a kernel SVM."""

    alphas: np.ndarray
    labels: np.ndarray
    bias: float
    c: float
    iterations: int
    converged: bool
    degenerate: bool     # no free support vectors; bias from interval midpoint
    objective: float

    @property
    def support_indices(self) -> np.ndarray:
        return np.flatnonzero(self.alphas > 0)


def project_psd(k: np.ndarray) -> np.ndarray:
    """Clip the spectrum of a symmetric matrix to the PSD cone."""
    sym = 0.5 * (k + k.T)
    vals, vecs = np.linalg.eigh(sym)
    return (vecs * np.clip(vals, 0.0, None)) @ vecs.T


def _finish(alpha, y, f0, c, iterations, converged):
    free = (alpha > 0.0) & (alpha < c)
    residual = y - f0
    degenerate = not bool(free.any())
    if not degenerate:
        bias = float(residual[free].mean())
    else:
        # midpoint of the bias interval allowed by the bound points' conditions
        lower = np.concatenate(
            [residual[(y > 0) & (alpha <= 0.0)], residual[(y < 0) & (alpha >= c)]]
        )
        upper = np.concatenate(
            [residual[(y > 0) & (alpha >= c)], residual[(y < 0) & (alpha <= 0.0)]]
        )
        if lower.size and upper.size:
            bias = float(0.5 * (lower.max() + upper.min()))
        elif lower.size:
            bias = float(lower.max())
        elif upper.size:
            bias = float(upper.min())
        else:
            bias = 0.0
    objective = float(alpha.sum() - 0.5 * np.dot(alpha * y, f0))
    return SvmModel(
        alphas=alpha,
        labels=y.copy(),
        bias=bias,
        c=c,
        iterations=iterations,
        converged=converged,
        degenerate=degenerate,
        objective=objective,
    )


def solve_dual(
    kernel: np.ndarray,
    labels: np.ndarray,
    c: float = 1.0,
    tol: float = DEFAULT_TOLS.svm_tol,
    max_updates: int = MAX_PAIR_UPDATES,
    psd_project: bool = False,
) -> SvmModel:
    """Run SMO to KKT-gap tolerance `tol` and return the trained model.

    Raises :class:`ConvergenceError` (carrying the best iterate) if the
    pair-update cap is exhausted first.
    """
    k = np.asarray(kernel, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    n = y.size
    if k.shape != (n, n):
        raise ValueError(f"kernel shape {k.shape} does not match {n} labels")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("labels must be ±1")
    if c <= 0:
        raise ValueError(f"C must be positive, got {c}")
    if n < 2 or np.all(y == y[0]):
        raise ValueError("need at least one state of each class")
    if psd_project:
        k = project_psd(k)

    alpha = np.zeros(n)
    f0 = np.zeros(n)           # Σ_m α_m y_m K[m, n]
    neg_e = y - f0             # −E_n; KKT gap = max_up(−E) − min_low(−E)
    pos = y > 0
    diag = np.diag(k).copy()
    iterations = 0
    while True:
        up = np.where(pos, alpha < c, alpha > 0.0)
        low = np.where(pos, alpha > 0.0, alpha < c)
        if not up.any() or not low.any():
            return _finish(alpha, y, f0, c, iterations, True)
        i = int(np.argmax(np.where(up, neg_e, -np.inf)))
        gap = neg_e[i] - np.min(np.where(low, neg_e, np.inf))
        if gap <= tol:
            return _finish(alpha, y, f0, c, iterations, True)
        if iterations >= max_updates:
            model = _finish(alpha, y, f0, c, iterations, False)
            raise ConvergenceError(
                f"SMO hit the {max_updates} pair-update cap with KKT gap {gap:.3e}",
                model,
            )
        # second-order choice of j: maximal guaranteed gain b²/a among the
        # low candidates that actually violate optimality against i
        k_i = k[i]
        b = neg_e[i] - neg_e
        a = np.maximum(diag[i] + diag - 2.0 * k_i, _TAU)
        cand = low & (b > 0.0)
        j = int(np.argmax(np.where(cand, b * b / a, -np.inf)))

        def take_step(jj: int) -> tuple[float, float]:
            # unconstrained Newton step along the two-variable direction,
            # then project onto the box; a variable that hits a wall is
            # pinned to the exact bound and its partner recomputed from the
            # conserved sum/difference, otherwise float dust leaves phantom
            # slack that stalls the working-set selection
            ai, aj = alpha[i], alpha[jj]
            step = b[jj] / a[jj]
            ai_n = ai + y[i] * step
            aj_n = aj - y[jj] * step
            if y[i] != y[jj]:
                diff = ai - aj
                if diff > 0.0:
                    if aj_n < 0.0:
                        aj_n, ai_n = 0.0, diff
                    if ai_n > c:
                        ai_n, aj_n = c, c - diff
                else:
                    if ai_n < 0.0:
                        ai_n, aj_n = 0.0, -diff
                    if aj_n > c:
                        aj_n, ai_n = c, c + diff
            else:
                tot = ai + aj
                if tot > c:
                    if ai_n > c:
                        ai_n, aj_n = c, tot - c
                    if aj_n > c:
                        aj_n, ai_n = c, tot - c
                else:
                    if aj_n < 0.0:
                        aj_n, ai_n = 0.0, tot
                    if ai_n < 0.0:
                        ai_n, aj_n = 0.0, tot
            return ai_n, aj_n

        ai_new, aj_new = take_step(j)
        if ai_new == alpha[i] and aj_new == alpha[j]:
            # degenerate second-order pick; retry with the plain
            # maximal-violating partner before giving up
            j = int(np.argmin(np.where(low, neg_e, np.inf)))
            ai_new, aj_new = take_step(j)
            if ai_new == alpha[i] and aj_new == alpha[j]:
                model = _finish(alpha, y, f0, c, iterations, False)
                raise ConvergenceError(
                    f"SMO stalled at KKT gap {gap:.3e}", model
                )
        da_i = ai_new - alpha[i]
        da_j = aj_new - alpha[j]
        f0 += (da_i * y[i]) * k_i + (da_j * y[j]) * k[j]
        neg_e = y - f0
        alpha[i] = ai_new
        alpha[j] = aj_new
        iterations += 1


def decision_values(model: SvmModel, kernel_rows: np.ndarray) -> np.ndarray:
    """f(x) = Σ_n α_n y_n K(x, n) + β for each row of kernel values."""
    rows = np.atleast_2d(np.asarray(kernel_rows, dtype=np.float64))
    return rows @ (model.alphas * model.labels) + model.bias


def decision_value(model: SvmModel, kernel_row: np.ndarray) -> float:
    return float(decision_values(model, kernel_row)[0])


def classify(model: SvmModel, kernel_row: np.ndarray) -> int:
    """Predicted label; an exact-zero decision value resolves to +1."""
    return 1 if decision_value(model, kernel_row) >= 0.0 else -1
