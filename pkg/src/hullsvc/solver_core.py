"""Dual state shared by both inner solvers: objective, gradient, KKT checks.

The problem solved is

    min 0.5 * a' (G + I/C) a   s.t.  sum(a[pos]) = sum(a[neg]) = 1,  0 <= a <= 1

i.e. the squared distance between the closest points of the two class hulls
in the feature space of the regularized kernel.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data_io import TrainingSet
from .kernel import GramPack

# a component within BOUND_TOL of 0 or 1 counts as sitting on that bound
BOUND_TOL = 1e-12
SUM_TOL = 1e-9
REFRESH_EVERY = 100


@dataclass
class AlphaState:
    """Dual variables plus cached gradient/objective.

    ``history`` collects the objective after every accepted solver step so
    monotone descent can be asserted after the fact.
    """

    alpha: np.ndarray
    grad: np.ndarray
    obj: float
    iterations: int = 0
    converged: bool = False
    history: list[float] = field(default_factory=list)

    def copy(self) -> "AlphaState":
        return AlphaState(self.alpha.copy(), self.grad.copy(), self.obj,
                          self.iterations, self.converged, list(self.history))


@dataclass(frozen=True)
class KktReport:
    mu_plus: float | None
    mu_minus: float | None
    m_plus: float
    M_plus: float
    m_minus: float
    M_minus: float
    max_violation: float
    satisfied: bool
    eps: float


def class_masks(data: TrainingSet) -> tuple[np.ndarray, np.ndarray]:
    return data.y == 1, data.y == -1


def at_lower(a: np.ndarray) -> np.ndarray:
    return a <= BOUND_TOL


def at_upper(a: np.ndarray) -> np.ndarray:
    return a >= 1.0 - BOUND_TOL


def free_mask(a: np.ndarray) -> np.ndarray:
    return (a > BOUND_TOL) & (a < 1.0 - BOUND_TOL)


def clamp(a: np.ndarray) -> np.ndarray:
    np.clip(a, 0.0, 1.0, out=a)
    return a


def init_alpha(data: TrainingSet, pack: GramPack | None = None) -> AlphaState:
    """Uniform weights 1/l+ on the positive class and 1/l- on the negative one."""
    if data.n_pos < 1 or data.n_neg < 1:
        raise ValueError("both classes need at least one sample")
    a = np.empty(data.l)
    a[data.pos_idx] = 1.0 / data.n_pos
    a[data.neg_idx] = 1.0 / data.n_neg
    return make_state(a, pack)


def make_state(alpha: np.ndarray, pack: GramPack | None = None) -> AlphaState:
    a = np.array(alpha, dtype=np.float64)
    if pack is None:
        return AlphaState(a, np.full_like(a, np.nan), float("nan"))
    g = gradient(a, pack)
    return AlphaState(a, g, 0.5 * float(a @ g))


def objective(alpha, pack: GramPack) -> float:
    a = np.asarray(getattr(alpha, "alpha", alpha), dtype=np.float64)
    return 0.5 * float(a @ pack.matvec(a))


def gradient(alpha, pack: GramPack) -> np.ndarray:
    a = np.asarray(getattr(alpha, "alpha", alpha), dtype=np.float64)
    return pack.matvec(a)


def refresh(state: AlphaState, pack: GramPack) -> AlphaState:
    state.grad = gradient(state.alpha, pack)
    state.obj = 0.5 * float(state.alpha @ state.grad)
    return state


def class_sums(alpha, data: TrainingSet) -> tuple[float, float]:
    a = np.asarray(getattr(alpha, "alpha", alpha))
    return float(a[data.pos_idx].sum()), float(a[data.neg_idx].sum())


def is_feasible(alpha, data: TrainingSet, sum_tol: float = SUM_TOL,
                bound_tol: float = BOUND_TOL) -> bool:
    a = np.asarray(getattr(alpha, "alpha", alpha))
    sp, sn = class_sums(a, data)
    return (abs(sp - 1.0) <= sum_tol and abs(sn - 1.0) <= sum_tol
            and a.min() >= -bound_tol and a.max() <= 1.0 + bound_tol)


def _extrema(neg_grad: np.ndarray, up: np.ndarray, low: np.ndarray):
    m = float(neg_grad[up].max()) if up.any() else -np.inf
    M = float(neg_grad[low].min()) if low.any() else np.inf
    return m, M


def kkt_report(alpha: AlphaState, data: TrainingSet, eps: float) -> KktReport:
    """Check the m/M extrema condition and the free-set means for both classes.

    ``mu_plus``/``mu_minus`` are None when that class has no strictly
    interior component (the mean over an empty set is undefined).
    """
    a, g = alpha.alpha, -alpha.grad
    pos, neg = class_masks(data)
    up = ~at_upper(a)
    low = ~at_lower(a)
    free = free_mask(a)
    m_p, M_p = _extrema(g, up & pos, low & pos)
    m_n, M_n = _extrema(g, up & neg, low & neg)
    mu_p = float(g[free & pos].mean()) if (free & pos).any() else None
    mu_n = float(g[free & neg].mean()) if (free & neg).any() else None
    viol = max(m_p - M_p, m_n - M_n, 0.0)
    ok = m_p <= M_p + eps and m_n <= M_n + eps
    return KktReport(mu_p, mu_n, m_p, M_p, m_n, M_n, viol, ok, eps)


def componentwise_kkt_violation(alpha: AlphaState, data: TrainingSet) -> float:
    """Largest violation of the per-component conditions around the free-set means.

    Interior components should sit at ``mu``; components at 0 below it and
    at 1 above it. Classes without interior components are skipped.
    """
    a, g = alpha.alpha, -alpha.grad
    worst = 0.0
    for mask in class_masks(data):
        free = mask & free_mask(a)
        if not free.any():
            continue
        mu = g[free].mean()
        worst = max(worst, float(np.abs(g[free] - mu).max()))
        lo = mask & at_lower(a)
        if lo.any():
            worst = max(worst, float((g[lo] - mu).max()))
        hi = mask & at_upper(a)
        if hi.any():
            worst = max(worst, float((mu - g[hi]).max()))
    return worst


def class_pair(alpha: AlphaState, data: TrainingSet, sign: int):
    """(i, j, violation) for one class: argmax of -grad over I_up, argmin over I_low."""
    a, g = alpha.alpha, -alpha.grad
    mask = data.y == sign
    up = np.flatnonzero(mask & ~at_upper(a))
    low = np.flatnonzero(mask & ~at_lower(a))
    if len(up) == 0 or len(low) == 0:
        return None, None, -np.inf
    # argmax/argmin return the first occurrence, i.e. the lowest index on ties
    i = int(up[np.argmax(g[up])])
    j = int(low[np.argmin(g[low])])
    return i, j, float(g[i] - g[j])


def violating_pair(alpha: AlphaState, data: TrainingSet, eps: float = 0.0):
    """Maximal violating pair over both classes.

    Returns ``(i, j, sign)``; ``i`` should grow and ``j`` shrink. Ties between
    the classes go to the positive one.
    """
    ip, jp, vp = class_pair(alpha, data, 1)
    im, jm, vm = class_pair(alpha, data, -1)
    if max(vp, vm) <= eps:
        raise RuntimeError("violating_pair called on a state that satisfies KKT")
    if vp >= vm:
        return ip, jp, 1
    return im, jm, -1
