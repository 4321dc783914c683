"""Trained classifier: thresholds, decisions, persistence and evaluation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data_io import DatasetError, StandardizationStats, TrainingSet
from .kernel import KernelParams, pairwise_sqdist
from .solver_core import BOUND_TOL, AlphaState

FORMAT_VERSION = 1
MAGIC = "hullsvc-model"


class ModelError(ValueError):
    pass


class CorruptModel(ModelError):
    pass


class VersionMismatch(ModelError):
    def __init__(self, found: int, expected: int = FORMAT_VERSION):
        super().__init__(f"model format version {found} is not supported (expected {expected})")
        self.found = found
        self.expected = expected


@dataclass(frozen=True, eq=False)
class SvcModel:
    """A fitted classifier.

    Support vectors are stored already standardized; ``stats`` is applied to
    raw inputs before the kernel is evaluated.
    """

    gamma: float
    c_reg: float
    sv_X: np.ndarray
    sv_y: np.ndarray
    sv_alpha: np.ndarray
    p_star: float
    q_star: float
    stats: StandardizationStats
    format_version: int = FORMAT_VERSION

    @property
    def support(self) -> list[tuple[np.ndarray, int, float]]:
        return [(x, int(y), float(a)) for x, y, a in zip(self.sv_X, self.sv_y, self.sv_alpha)]

    @property
    def dim(self) -> int:
        return self.sv_X.shape[1]

    @property
    def threshold(self) -> float:
        return 0.5 * (self.p_star + self.q_star)

    def decision_values(self, X, standardized: bool = False) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.dim:
            raise DatasetError(f"dimension mismatch: model expects {self.dim}, got {X.shape[1]}")
        Z = X if standardized else self.stats.apply(X)
        K = np.exp(-self.gamma * pairwise_sqdist(Z, self.sv_X))
        return K @ (self.sv_y * self.sv_alpha) - self.threshold

    def predict(self, X, standardized: bool = False) -> np.ndarray:
        return np.where(self.decision_values(X, standardized) >= 0, 1, -1)


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    n_correct: int
    n_total: int
    fisher_ratio: float | None = None

    @property
    def error_rate(self) -> float:
        return 1.0 - self.accuracy


def _threshold_terms(alpha: AlphaState, data: TrainingSet) -> tuple[np.ndarray, np.ndarray]:
    # sum_i y_i a_i k(x_j, x_i) + y_j a_j / C equals y_j * grad_j
    a, g = alpha.alpha, alpha.grad
    sv = a > BOUND_TOL
    pos = np.flatnonzero(sv & (data.y == 1))
    neg = np.flatnonzero(sv & (data.y == -1))
    return g[pos], -g[neg]


def threshold_spread(alpha: AlphaState, data: TrainingSet) -> tuple[float, float]:
    """Max minus min of the per-support-vector estimates of p* and q*."""
    p, q = _threshold_terms(alpha, data)
    return float(np.ptp(p)), float(np.ptp(q))


def thresholds(alpha: AlphaState, data: TrainingSet, params: KernelParams | None = None
               ) -> tuple[float, float]:
    """p* and q* averaged over the support vectors of each class.

    ``alpha.grad`` must be fresh for the kernel the state was solved with.
    """
    p, q = _threshold_terms(alpha, data)
    if p.size == 0 or q.size == 0:
        raise ModelError("a class has no support vector")
    return float(p.mean()), float(q.mean())


def fit_model(alpha: AlphaState, data: TrainingSet, params: KernelParams,
              stats: StandardizationStats | None = None) -> SvcModel:
    """Package a solved state into a predictor. ``data`` is the standardized training set."""
    p_star, q_star = thresholds(alpha, data, params)
    sv = np.flatnonzero(alpha.alpha > BOUND_TOL)
    if stats is None:
        stats = StandardizationStats(np.zeros(data.dim), np.ones(data.dim))
    return SvcModel(
        gamma=float(params.gamma),
        c_reg=float(params.c_reg),
        sv_X=data.X[sv].copy(),
        sv_y=data.y[sv].astype(np.int64),
        sv_alpha=alpha.alpha[sv].copy(),
        p_star=p_star,
        q_star=q_star,
        stats=stats,
    )


def decide(x, model: SvcModel) -> int:
    """Label for one raw (unstandardized) input; a zero decision value maps to +1."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DatasetError("decide expects a single vector")
    return int(model.predict(x[None, :])[0])


def accuracy(model: SvcModel, test: TrainingSet, standardized: bool = False) -> EvalReport:
    if test.l == 0:
        raise DatasetError("empty test set")
    pred = model.predict(test.X, standardized=standardized)
    n_ok = int(np.sum(pred == test.y))
    return EvalReport(n_ok / test.l, n_ok, test.l)


def fisher_ratio(data: TrainingSet, params: KernelParams | float) -> float:
    """Between-class mean distance over within-class variance in kernel space.

    Uses the plain Gaussian kernel (no 1/C term). With k(x, x) = 1 the
    within-class variance of a class reduces to ``1 - mean(K_cc)``.
    """
    gamma = params.gamma if isinstance(params, KernelParams) else float(params)
    Xp, Xn = data.X[data.pos_idx], data.X[data.neg_idx]
    kpp = np.exp(-gamma * pairwise_sqdist(Xp)).mean()
    knn = np.exp(-gamma * pairwise_sqdist(Xn)).mean()
    kpn = np.exp(-gamma * pairwise_sqdist(Xp, Xn)).mean()
    d_inter = kpp + knn - 2.0 * kpn
    d_inner = (1.0 - kpp) + (1.0 - knn)
    if d_inner <= 0:
        return 0.0 if d_inter <= 0 else np.inf
    return float(max(d_inter, 0.0) / d_inner)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def serialize(model: SvcModel) -> bytes:
    """Versioned line-oriented text; floats written with 17 significant digits."""
    lines = [
        MAGIC,
        f"version {model.format_version}",
        f"gamma {_fmt(model.gamma)}",
        f"c {_fmt(model.c_reg)}",
        f"p_star {_fmt(model.p_star)}",
        f"q_star {_fmt(model.q_star)}",
        f"dim {model.dim}",
        "stats_mean " + " ".join(_fmt(v) for v in model.stats.mean),
        "stats_scale " + " ".join(_fmt(v) for v in model.stats.scale),
        f"n_support {len(model.sv_y)}",
    ]
    for x, y, a in zip(model.sv_X, model.sv_y, model.sv_alpha):
        toks = [f"{int(y):+d}", _fmt(a)]
        toks.extend(f"{j + 1}:{_fmt(x[j])}" for j in np.flatnonzero(x))
        lines.append(" ".join(toks))
    lines.append("end")
    return ("\n".join(lines) + "\n").encode("utf-8")


def _field(lines: list[str], k: int, name: str) -> str:
    if k >= len(lines):
        raise CorruptModel(f"truncated model: missing field {name!r}")
    key, _, value = lines[k].partition(" ")
    if key != name:
        raise CorruptModel(f"line {k + 1}: expected {name!r}, found {key!r}")
    return value


def _floats(s: str, what: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in s.split()], dtype=np.float64)
    except ValueError:
        raise CorruptModel(f"bad number in {what}") from None


def deserialize(blob: bytes | str) -> SvcModel:
    text = blob.decode("utf-8") if isinstance(blob, bytes) else blob
    lines = text.split("\n")
    if not lines or lines[0].strip() != MAGIC:
        raise CorruptModel("not a hullsvc model file")
    try:
        version = int(_field(lines, 1, "version"))
    except ValueError:
        raise CorruptModel("bad version field") from None
    if version != FORMAT_VERSION:
        raise VersionMismatch(version)
    try:
        gamma = float(_field(lines, 2, "gamma"))
        c_reg = float(_field(lines, 3, "c"))
        p_star = float(_field(lines, 4, "p_star"))
        q_star = float(_field(lines, 5, "q_star"))
        dim = int(_field(lines, 6, "dim"))
        n_sv = int(_field(lines, 9, "n_support"))
    except ValueError:
        raise CorruptModel("bad scalar field") from None
    mean = _floats(_field(lines, 7, "stats_mean"), "stats_mean")
    scale = _floats(_field(lines, 8, "stats_scale"), "stats_scale")
    if len(mean) != dim or len(scale) != dim:
        raise CorruptModel("standardization stats do not match dim")
    X = np.zeros((n_sv, dim))
    ys = np.empty(n_sv, dtype=np.int64)
    al = np.empty(n_sv)
    for r in range(n_sv):
        k = 10 + r
        if k >= len(lines) or not lines[k].strip() or lines[k] == "end":
            raise CorruptModel(f"truncated model: {r} of {n_sv} support vectors present")
        toks = lines[k].split()
        try:
            ys[r] = int(toks[0])
            al[r] = float(toks[1])
            for tok in toks[2:]:
                j, _, v = tok.partition(":")
                X[r, int(j) - 1] = float(v)
        except (ValueError, IndexError):
            raise CorruptModel(f"line {k + 1}: bad support vector") from None
        if ys[r] not in (1, -1) or not al[r] > 0:
            raise CorruptModel(f"line {k + 1}: bad label or weight")
    end = 10 + n_sv
    if end >= len(lines) or lines[end].strip() != "end":
        raise CorruptModel("truncated model: missing end marker")
    return SvcModel(gamma, c_reg, X, ys, al, p_star, q_star,
                    StandardizationStats(mean, scale), version)
