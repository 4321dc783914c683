"""Gaussian kernel, labelled Gram matrices and the width derivative."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data_io import TrainingSet

GAMMA_LO = 2.0**-15
GAMMA_HI = 2.0**3

_ROW_BLOCK = 1024


@dataclass(frozen=True)
class KernelParams:
    gamma: float
    c_reg: float = 1.0

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if not self.c_reg > 0:
            raise ValueError(f"c_reg must be positive, got {self.c_reg}")


@dataclass(frozen=True, eq=False)
class GramPack:
    """Cached matrices for one (gamma, C) pair on one dataset.

    ``labeled_gram[i, j] = y_i y_j exp(-gamma * sqdist[i, j])`` and
    ``reg_gram`` adds ``1/C`` on its diagonal. With ``dtype=float32`` the
    matrices are stored in single precision but :meth:`matvec` accumulates
    in double.
    """

    sqdist: np.ndarray
    labeled_gram: np.ndarray
    reg_gram: np.ndarray
    y: np.ndarray
    gamma: float
    c_reg: float

    @property
    def l(self) -> int:
        return self.reg_gram.shape[0]

    def matvec(self, v: np.ndarray) -> np.ndarray:
        Q = self.reg_gram
        if Q.dtype == np.float64:
            return Q @ v
        out = np.empty(Q.shape[0])
        for s in range(0, Q.shape[0], _ROW_BLOCK):
            out[s : s + _ROW_BLOCK] = Q[s : s + _ROW_BLOCK].astype(np.float64) @ v
        return out

    def column(self, i: int) -> np.ndarray:
        # reg_gram is symmetric; a row is contiguous in C order
        return np.asarray(self.reg_gram[i], dtype=np.float64)

    def diag(self) -> np.ndarray:
        return np.asarray(np.diagonal(self.reg_gram), dtype=np.float64)


def gaussian_kernel(a, b, gamma: float) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    diff = a - b
    return float(np.exp(-gamma * float(diff @ diff)))


def pairwise_sqdist(X: np.ndarray, Z: np.ndarray | None = None) -> np.ndarray:
    """Squared Euclidean distances, clipped at zero, exact zero diagonal when Z is None."""
    X = np.asarray(X, dtype=np.float64)
    sym = Z is None
    Z = X if sym else np.asarray(Z, dtype=np.float64)
    xx = np.einsum("ij,ij->i", X, X)
    zz = xx if sym else np.einsum("ij,ij->i", Z, Z)
    D = xx[:, None] + zz[None, :] - 2.0 * (X @ Z.T)
    np.maximum(D, 0.0, out=D)
    if sym:
        D = 0.5 * (D + D.T)
        np.fill_diagonal(D, 0.0)
    return D


def build_gram(
    data: TrainingSet,
    params: KernelParams,
    sqdist: np.ndarray | None = None,
    dtype=np.float64,
) -> GramPack:
    """Build the labelled and C-regularized Gram matrices at ``params.gamma``.

    Pass a precomputed ``sqdist`` to reuse it across many widths.
    """
    if sqdist is None:
        sqdist = pairwise_sqdist(data.X)
    y = data.y.astype(np.float64)
    G = np.exp(-params.gamma * sqdist)
    G *= y[:, None]
    G *= y[None, :]
    np.fill_diagonal(G, 1.0)
    Q = G.copy()
    Q[np.diag_indices_from(Q)] += 1.0 / params.c_reg
    if dtype != np.float64:
        G = G.astype(dtype)
        Q = Q.astype(dtype)
    for m in (sqdist, G, Q):
        m.flags.writeable = False
    return GramPack(sqdist=sqdist, labeled_gram=G, reg_gram=Q, y=y,
                    gamma=params.gamma, c_reg=params.c_reg)


def gamma_derivative(alpha, pack: GramPack, gamma: float | None = None) -> float:
    """Partial derivative of the objective with respect to the kernel width.

    ``0.5 * a' [y_i y_j (-|x_i - x_j|^2) exp(-gamma |x_i - x_j|^2)] a`` at fixed
    ``a``; the ``I/C`` term does not depend on gamma. ``pack`` must have been
    built at ``gamma``.
    """
    a = np.asarray(getattr(alpha, "alpha", alpha), dtype=np.float64)
    if gamma is not None and not np.isclose(gamma, pack.gamma, rtol=1e-12, atol=0):
        raise ValueError(f"pack built at gamma={pack.gamma}, asked for {gamma}")
    total = 0.0
    G, D = pack.labeled_gram, pack.sqdist
    for s in range(0, pack.l, _ROW_BLOCK):
        blk = np.asarray(G[s : s + _ROW_BLOCK], dtype=np.float64) * D[s : s + _ROW_BLOCK]
        total += float(a[s : s + _ROW_BLOCK] @ (blk @ a))
    return -0.5 * total
