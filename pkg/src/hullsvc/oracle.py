"""Slow, independent reference computations used to check the solvers.

Nothing here is on a production path; everything is written to be obviously
correct rather than fast.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .data_io import TrainingSet
from .kernel import GramPack
from .solver_core import at_lower, at_upper


class OracleError(ValueError):
    pass


class SingularSystem(OracleError):
    pass


@dataclass(frozen=True)
class GridOracleResult:
    alpha_hat: np.ndarray
    obj_hat: float
    grid_step: float
    lipschitz: float


def _simplex_grid(n: int, step: float) -> np.ndarray:
    """Points of the n-simplex {a >= 0, sum a = 1} on a lattice of spacing ``step``."""
    m = int(round(1.0 / step))
    if n == 1:
        return np.ones((1, 1))
    t = np.arange(m + 1) / m
    if n == 2:
        return np.column_stack([t, 1.0 - t])
    if n == 3:
        i, j = np.meshgrid(np.arange(m + 1), np.arange(m + 1), indexing="ij")
        keep = i + j <= m
        a1, a2 = i[keep] / m, j[keep] / m
        return np.column_stack([a1, a2, 1.0 - a1 - a2])
    raise OracleError("grid oracle supports at most 3 samples per class")


def grid_qp(data: TrainingSet, pack: GramPack, step: float = 1e-3,
            max_evals: int = 30_000_000) -> GridOracleResult:
    """Exhaustive minimization of the dual objective over a lattice.

    Each class simplex is gridded independently and every pair of class
    points is evaluated.
    """
    if data.l > 6 or data.n_pos > 3 or data.n_neg > 3:
        raise OracleError(f"instance too large for the grid oracle (l={data.l})")
    Q = np.asarray(pack.reg_gram, dtype=np.float64)
    P = _simplex_grid(data.n_pos, step)
    N = _simplex_grid(data.n_neg, step)
    if len(P) * len(N) > max_evals:
        raise OracleError(f"{len(P) * len(N)} grid evaluations exceeds {max_evals}")
    pi, ni = data.pos_idx, data.neg_idx
    Qpp, Qnn, Qpn = Q[np.ix_(pi, pi)], Q[np.ix_(ni, ni)], Q[np.ix_(pi, ni)]
    fp = 0.5 * np.einsum("ki,ij,kj->k", P, Qpp, P)
    fn = 0.5 * np.einsum("ki,ij,kj->k", N, Qnn, N)
    best, best_p, best_n = np.inf, 0, 0
    PQ = P @ Qpn
    block = max(1, 2_000_000 // max(len(N), 1))
    for s in range(0, len(P), block):
        vals = fp[s : s + block, None] + fn[None, :] + PQ[s : s + block] @ N.T
        k = int(np.argmin(vals))
        r, c = divmod(k, vals.shape[1])
        if vals[r, c] < best:
            best, best_p, best_n = float(vals[r, c]), s + r, c
    a = np.zeros(data.l)
    a[pi] = P[best_p]
    a[ni] = N[best_n]
    lip = float(np.abs(Q).sum(axis=1).max())
    return GridOracleResult(a, best, step, lip)


def gauss_solve(A: np.ndarray, B: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Solve A X = B by Gaussian elimination with partial pivoting."""
    A = np.array(A, dtype=np.float64)
    B = np.array(B, dtype=np.float64)
    vec = B.ndim == 1
    if vec:
        B = B[:, None]
    n = A.shape[0]
    scale = max(np.abs(A).max(), 1.0)
    for k in range(n):
        p = k + int(np.argmax(np.abs(A[k:, k])))
        if abs(A[p, k]) <= tol * scale:
            raise SingularSystem(f"matrix is singular at column {k}")
        if p != k:
            A[[k, p]] = A[[p, k]]
            B[[k, p]] = B[[p, k]]
        f = A[k + 1 :, k] / A[k, k]
        A[k + 1 :, k:] -= np.outer(f, A[k, k:])
        B[k + 1 :] -= np.outer(f, B[k])
    X = np.zeros_like(B)
    for k in range(n - 1, -1, -1):
        X[k] = (B[k] - A[k, k + 1 :] @ X[k + 1 :]) / A[k, k]
    return X[:, 0] if vec else X


def constraint_matrix(alpha, data: TrainingSet, active=None) -> tuple[np.ndarray, np.ndarray]:
    """Rows for the active bounds followed by the two class-sum rows.

    A bound at 0 is written as ``-a_i <= 0`` and a bound at 1 as
    ``a_i <= 1``, so a nonnegative multiplier means the bound is correctly
    active. Returns (M, active_indices).
    """
    a = np.asarray(getattr(alpha, "alpha", alpha))
    l = len(a)
    if active is None:
        active = np.flatnonzero(at_lower(a) | at_upper(a))
    active = np.asarray(active, dtype=np.int64)
    M = np.zeros((len(active) + 2, l))
    for r, i in enumerate(active):
        M[r, i] = -1.0 if a[i] <= 0.5 else 1.0
    M[-2, data.pos_idx] = 1.0
    M[-1, data.neg_idx] = 1.0
    return M, active


def projection_matrix(M: np.ndarray) -> np.ndarray:
    l = M.shape[1]
    return np.eye(l) - M.T @ gauss_solve(M @ M.T, M)


def explicit_projection(alpha, data: TrainingSet, grad: np.ndarray, active=None):
    """Projected negative gradient and multipliers from the dense projector.

    Returns ``(d, mu, active)`` where ``mu`` lists the active-bound
    multipliers in the order of ``active`` followed by the two class-sum
    multipliers. Raises :class:`SingularSystem` when the active set makes
    ``M M'`` singular (a whole class pinned at its bounds).
    """
    if data.l > 12:
        raise OracleError("explicit projection is limited to l <= 12")
    grad = np.asarray(grad, dtype=np.float64)
    M, active = constraint_matrix(alpha, data, active)
    MMt = M @ M.T
    d = -projection_matrix(M) @ grad
    mu = -gauss_solve(MMt, M @ grad)
    return d, mu, active


def fd_gradient(f: Callable[[np.ndarray], float], x, h: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of a scalar field."""
    if not h > 0:
        raise ValueError("h must be positive")
    x = np.asarray(x, dtype=np.float64)
    g = np.empty_like(x)
    for k in range(x.size):
        xp, xm = x.copy(), x.copy()
        xp.flat[k] += h
        xm.flat[k] -= h
        g.flat[k] = (f(xp) - f(xm)) / (2.0 * h)
    return g


def fd_derivative(f: Callable[[float], float], t: float, h: float = 1e-6) -> float:
    return (f(t + h) - f(t - h)) / (2.0 * h)
