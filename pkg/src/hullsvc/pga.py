"""Projected gradient solver for the hull-distance dual.

Each iteration projects the negative gradient onto the face of the feasible
set defined by the bounds currently in force, releases the most-violated
bound once that projection vanishes, and takes the exact minimizing step
along the result, capped so no component leaves [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data_io import TrainingSet
from .kernel import GramPack
from .solver_core import (
    REFRESH_EVERY,
    AlphaState,
    at_lower,
    at_upper,
    clamp,
    class_pair,
    free_mask,
    init_alpha,
    kkt_report,
    refresh,
)

# components with |d_i| below this never limit the step length
D_TINY = 1e-14


@dataclass(frozen=True)
class DirectionInfo:
    """Projected direction and the multipliers that come with it.

    ``free`` marks the components the direction is allowed to move;
    ``mu`` holds the bound multipliers (NaN where the component is free or
    its class mean is undefined). ``mu_plus``/``mu_minus`` are the equality
    multipliers.
    """

    d: np.ndarray
    free: np.ndarray
    mu: np.ndarray
    mu_plus: float | None
    mu_minus: float | None
    released: int | None = None

    @property
    def d_inf_norm(self) -> float:
        return float(np.abs(self.d).max()) if self.d.size else 0.0


@dataclass(frozen=True)
class StepInfo:
    eta_bar: float
    eta_max: float
    eta_star: float
    binding: int | None = None
    Qd: np.ndarray | None = field(default=None, repr=False)


def _bound_multipliers(a, neg_grad, y, free, mu_plus, mu_minus):
    mu = np.full(a.shape, np.nan)
    for sign, mu_c in ((1, mu_plus), (-1, mu_minus)):
        if mu_c is None:
            continue
        cls = (y == sign) & ~free
        lo = cls & at_lower(a)
        hi = cls & at_upper(a)
        mu[lo] = mu_c - neg_grad[lo]
        mu[hi] = neg_grad[hi] - mu_c
    return mu


def direction(alpha: AlphaState, data: TrainingSet) -> DirectionInfo:
    """Negative gradient projected onto the current active face.

    Interior components get ``-grad_i - mu`` with ``mu`` the class mean of
    ``-grad`` over interior components; bounded components get 0. A class
    with no interior component falls back to its maximal violating pair,
    which is the same projection with only that pair left free.
    """
    a, g, y = alpha.alpha, -alpha.grad, data.y
    free = free_mask(a)
    d = np.zeros_like(a)
    mus: dict[int, float | None] = {}
    for sign in (1, -1):
        cls = free & (y == sign)
        if cls.any():
            mu = float(g[cls].mean())
            d[cls] = g[cls] - mu
            mus[sign] = mu
            continue
        i, j, viol = class_pair(alpha, data, sign)
        if i is None or viol <= 0:
            mus[sign] = None
            continue
        mu = 0.5 * (g[i] + g[j])
        free[i] = free[j] = True
        d[i] = g[i] - mu
        d[j] = g[j] - mu
        mus[sign] = mu
    mu_vec = _bound_multipliers(a, g, y, free, mus[1], mus[-1])
    return DirectionInfo(d, free, mu_vec, mus[1], mus[-1])


def release(alpha: AlphaState, info: DirectionInfo, data: TrainingSet) -> DirectionInfo:
    """Drop the bound with the most negative multiplier and re-project.

    The released index joins its class's free set, the class mean is
    recomputed over the enlarged set and ``d`` is rebuilt for that class.
    """
    mu = np.where(np.isnan(info.mu), np.inf, info.mu)
    j = int(np.argmin(mu))
    if not mu[j] < 0:
        raise RuntimeError("release called with no negative bound multiplier")
    g, y = -alpha.grad, data.y
    free = info.free.copy()
    free[j] = True
    cls = free & (y == y[j])
    mu_c = float(g[cls].mean())
    d = info.d.copy()
    d[cls] = g[cls] - mu_c
    mu_plus, mu_minus = (mu_c, info.mu_minus) if y[j] == 1 else (info.mu_plus, mu_c)
    mu_vec = _bound_multipliers(alpha.alpha, g, y, free, mu_plus, mu_minus)
    return DirectionInfo(d, free, mu_vec, mu_plus, mu_minus, released=j)


def step_bounds(alpha: AlphaState, info: DirectionInfo) -> tuple[float, int | None]:
    """Largest step keeping every moving component inside [0, 1]."""
    a, d = alpha.alpha, info.d
    dec = np.flatnonzero(info.free & (d < -D_TINY))
    inc = np.flatnonzero(info.free & (d > D_TINY))
    cand = np.concatenate([a[dec] / -d[dec], (1.0 - a[inc]) / d[inc]])
    if cand.size == 0:
        return np.inf, None
    k = int(np.argmin(cand))
    idx = np.concatenate([dec, inc])[k]
    return float(max(cand[k], 0.0)), int(idx)


def line_search(alpha: AlphaState, info: DirectionInfo, pack: GramPack,
                eta_max: float, binding: int | None = None) -> StepInfo:
    """Exact minimizer of the objective along ``d``, clipped to [0, eta_max]."""
    d = info.d
    Qd = pack.matvec(d)
    curv = float(d @ Qd)
    assert curv > 0, "reg_gram must be positive definite along d"
    # -d'grad equals |d|^2 because d sums to zero within each class; the
    # direct dot product loses that to cancellation once |d| nears 1e-8
    eta_bar = float(d @ d) / curv
    eta_star = min(max(eta_bar, 0.0), eta_max)
    return StepInfo(eta_bar, eta_max, eta_star, binding if eta_star == eta_max else None, Qd)


def apply_step(alpha: AlphaState, info: DirectionInfo, step: StepInfo) -> AlphaState:
    eta = step.eta_star
    a = alpha.alpha
    a += eta * info.d
    if step.binding is not None:
        j = step.binding
        a[j] = 0.0 if info.d[j] < 0 else 1.0
    clamp(a)
    alpha.grad += eta * step.Qd
    alpha.obj = 0.5 * float(a @ alpha.grad)
    return alpha


def pga_iteration(alpha: AlphaState, data: TrainingSet, pack: GramPack, eps1: float):
    """One iteration. Returns (state, done) where done means converged."""
    info = direction(alpha, data)
    if info.d_inf_norm <= eps1:
        if kkt_report(alpha, data, eps1).satisfied:
            return alpha, True
        if np.nanmin(info.mu, initial=np.inf) < 0:
            info = release(alpha, info, data)
        elif info.d_inf_norm == 0.0:
            return alpha, True
    eta_max, binding = step_bounds(alpha, info)
    step = line_search(alpha, info, pack, eta_max, binding)
    apply_step(alpha, info, step)
    return alpha, False


def pga_solve(data: TrainingSet, pack: GramPack, eps1: float = 1e-6,
              max_epochs: int = 2000, alpha0: AlphaState | np.ndarray | None = None,
              record: bool = True) -> AlphaState:
    """Run the projected gradient method until KKT holds at ``eps1``.

    Starts from the uniform point unless ``alpha0`` is given (any feasible
    vector works, e.g. the previous solution at another kernel width).
    Hitting ``max_epochs`` leaves ``converged`` False; it is not an error.
    """
    if alpha0 is None:
        state = init_alpha(data)
    else:
        a0 = getattr(alpha0, "alpha", alpha0)
        state = AlphaState(np.array(a0, dtype=np.float64), np.empty(0), 0.0)
    refresh(state, pack)
    if record:
        state.history = [state.obj]
    done = False
    k = 0
    while k < max_epochs:
        if k and k % REFRESH_EVERY == 0:
            refresh(state, pack)
        state, done = pga_iteration(state, data, pack, eps1)
        if done:
            break
        k += 1
        if record:
            state.history.append(state.obj)
    refresh(state, pack)
    state.iterations = k
    state.converged = done or kkt_report(state, data, eps1).satisfied
    return state


def pair_direction(alpha: AlphaState, data: TrainingSet, i: int, j: int) -> DirectionInfo:
    """Projected direction with every component except ``i`` and ``j`` held fixed."""
    if data.y[i] != data.y[j] or i == j:
        raise ValueError("pair must be two distinct indices of one class")
    g = -alpha.grad
    mu = 0.5 * (g[i] + g[j])
    d = np.zeros_like(g)
    d[i] = g[i] - mu
    d[j] = g[j] - mu
    free = np.zeros(len(g), dtype=bool)
    free[[i, j]] = True
    mu_plus, mu_minus = (mu, None) if data.y[i] == 1 else (None, mu)
    return DirectionInfo(d, free, np.full(len(g), np.nan), mu_plus, mu_minus)


def pga_pair_step(alpha: AlphaState, data: TrainingSet, pack: GramPack,
                  i: int, j: int) -> AlphaState:
    """One projected-gradient step restricted to the pair (i, j); returns a new state."""
    state = alpha.copy()
    info = pair_direction(state, data, i, j)
    if info.d_inf_norm == 0.0:
        return state
    eta_max, binding = step_bounds(state, info)
    step = line_search(state, info, pack, eta_max, binding)
    return apply_step(state, info, step)
