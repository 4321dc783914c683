"""Sequential minimal optimization on the maximal violating pair."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data_io import TrainingSet
from .kernel import GramPack
from .solver_core import (
    REFRESH_EVERY,
    AlphaState,
    init_alpha,
    kkt_report,
    refresh,
    violating_pair,
)


@dataclass(frozen=True)
class PairSolution:
    i: int
    j: int
    alpha_i_uc: float
    alpha_j_uc: float
    alpha_i_new: float
    alpha_j_new: float
    sum_const: float


def pair_linear_terms(alpha: AlphaState, pack: GramPack, i: int, j: int) -> tuple[float, float]:
    """v_i, v_j: the parts of the gradient coming from components other than i and j.

    Read off the cached gradient in O(1) instead of summing over l terms.
    """
    a, g, Q = alpha.alpha, alpha.grad, pack.reg_gram
    q_ii, q_jj, q_ij = float(Q[i, i]), float(Q[j, j]), float(Q[i, j])
    v_i = g[i] - q_ii * a[i] - q_ij * a[j]
    v_j = g[j] - q_jj * a[j] - q_ij * a[i]
    return float(v_i), float(v_j)


def pair_subproblem(alpha: AlphaState, pack: GramPack, i: int, j: int) -> PairSolution:
    """Minimize the objective over (alpha_i, alpha_j) with their sum held fixed.

    Both indices must belong to the same class. The unconstrained optimum is
    clipped to the feasible segment, which enforces alpha <= 1 as well as
    alpha >= 0.
    """
    y = pack.y
    if i == j or y[i] != y[j]:
        raise ValueError(f"({i}, {j}) is not a same-class pair")
    a, Q = alpha.alpha, pack.reg_gram
    s = float(a[i] + a[j])
    q_ii, q_jj = float(Q[i, i]), float(Q[j, j])
    k_ij = float(Q[i, j])  # off-diagonal: y_i y_j k(x_i, x_j), no 1/C term
    v_i, v_j = pair_linear_terms(alpha, pack, i, j)
    denom = q_ii + q_jj - 2.0 * k_ij
    ai_uc = ((q_jj - k_ij) * s - v_i + v_j) / denom
    aj_uc = s - ai_uc
    lo, hi = max(0.0, s - 1.0), min(s, 1.0)
    ai = min(max(ai_uc, lo), hi)
    return PairSolution(i, j, ai_uc, aj_uc, ai, s - ai, s)


def apply_pair(alpha: AlphaState, pack: GramPack, sol: PairSolution) -> AlphaState:
    a = alpha.alpha
    di = sol.alpha_i_new - a[sol.i]
    dj = sol.alpha_j_new - a[sol.j]
    a[sol.i] = sol.alpha_i_new
    a[sol.j] = sol.alpha_j_new
    alpha.grad += di * pack.column(sol.i) + dj * pack.column(sol.j)
    alpha.obj = 0.5 * float(a @ alpha.grad)
    return alpha


def smo_step(alpha: AlphaState, data: TrainingSet, pack: GramPack) -> AlphaState:
    """One update on the maximal violating pair; returns a new state."""
    state = alpha.copy()
    i, j, _ = violating_pair(state, data)
    return apply_pair(state, pack, pair_subproblem(state, pack, i, j))


def smo_solve(data: TrainingSet, pack: GramPack, eps1: float = 1e-6,
              max_epochs: int = 2000, alpha0: AlphaState | np.ndarray | None = None,
              record: bool = True) -> AlphaState:
    """Iterate pair updates until m+ <= M+ + eps1 and m- <= M- + eps1."""
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
        if kkt_report(state, data, eps1).satisfied:
            done = True
            break
        i, j, _ = violating_pair(state, data)
        apply_pair(state, pack, pair_subproblem(state, pack, i, j))
        k += 1
        if record:
            state.history.append(state.obj)
    refresh(state, pack)
    state.iterations = k
    state.converged = done or kkt_report(state, data, eps1).satisfied
    return state
