"""Sparse dataset parsing, standardization and seeded train/test splits."""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, TextIO

import numpy as np


class DatasetError(ValueError):
    """Base class for dataset problems."""


class EmptyInput(DatasetError):
    pass


class MalformedLine(DatasetError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no


class SingleClass(DatasetError):
    pass


class SplitError(DatasetError):
    pass


@dataclass(frozen=True)
class Sample:
    """One labelled example; ``features`` maps 1-based index to value."""

    features: dict[int, float]
    label: int


@dataclass(frozen=True, eq=False)
class TrainingSet:
    """Dense labelled data with the class index sets precomputed.

    ``X`` has shape (l, dim) and ``y`` holds +1/-1 labels. Arrays are marked
    read-only so a set can be shared freely between solves.
    """

    X: np.ndarray
    y: np.ndarray
    pos_idx: np.ndarray = field(init=False, repr=False)
    neg_idx: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        X = np.array(self.X, dtype=np.float64, copy=True)
        y = np.array(self.y, dtype=np.int64, copy=True)
        if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
            raise DatasetError(f"shape mismatch: X {X.shape}, y {y.shape}")
        if not np.all((y == 1) | (y == -1)):
            raise DatasetError("labels must be +1 or -1")
        X.flags.writeable = False
        y.flags.writeable = False
        pos = np.flatnonzero(y == 1)
        neg = np.flatnonzero(y == -1)
        pos.flags.writeable = False
        neg.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "pos_idx", pos)
        object.__setattr__(self, "neg_idx", neg)

    @property
    def l(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    @property
    def n_pos(self) -> int:
        return len(self.pos_idx)

    @property
    def n_neg(self) -> int:
        return len(self.neg_idx)

    @property
    def samples(self) -> list[Sample]:
        out = []
        for row, label in zip(self.X, self.y):
            nz = np.flatnonzero(row)
            out.append(Sample({int(j) + 1: float(row[j]) for j in nz}, int(label)))
        return out

    def subset(self, idx) -> "TrainingSet":
        idx = np.asarray(idx, dtype=np.int64)
        return TrainingSet(self.X[idx], self.y[idx])

    def __eq__(self, other):
        if not isinstance(other, TrainingSet):
            return NotImplemented
        return (
            self.X.shape == other.X.shape
            and np.array_equal(self.X, other.X)
            and np.array_equal(self.y, other.y)
        )

    def __len__(self):
        return self.l


@dataclass(frozen=True)
class StandardizationStats:
    mean: np.ndarray
    scale: np.ndarray

    def apply(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.shape[-1] != len(self.mean):
            raise DatasetError(
                f"dimension mismatch: data has {X.shape[-1]} features, stats have {len(self.mean)}"
            )
        return (X - self.mean) / self.scale


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 0
    max_retries: int = 100

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie in (0, 1)")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


def _map_labels(raw: list[float]) -> np.ndarray:
    distinct = sorted(set(raw))
    if len(distinct) == 1:
        raise SingleClass(f"only one class present (label {distinct[0]:g})")
    if len(distinct) > 2:
        raise DatasetError(f"expected two classes, found {len(distinct)}: {distinct[:5]}")
    lo, hi = distinct
    # covers {-1,+1}, {0,1}, {1,2}: larger raw label becomes +1
    return np.array([1 if v == hi else -1 for v in raw], dtype=np.int64)


def _parse_rows(lines: Iterable[str]):
    labels: list[float] = []
    rows: list[tuple[list[int], list[float]]] = []
    dim = 0
    for line_no, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            label = float(parts[0])
        except ValueError:
            raise MalformedLine(line_no, f"invalid label {parts[0]!r}") from None
        if not np.isfinite(label):
            raise MalformedLine(line_no, f"invalid label {parts[0]!r}")
        idx: list[int] = []
        vals: list[float] = []
        prev = 0
        for tok in parts[1:]:
            key, sep, val = tok.partition(":")
            if not sep:
                raise MalformedLine(line_no, f"token {tok!r} is not idx:value")
            try:
                j = int(key)
                v = float(val)
            except ValueError:
                raise MalformedLine(line_no, f"token {tok!r} is not idx:value") from None
            if j <= prev:
                raise MalformedLine(line_no, f"feature index {j} not ascending/positive")
            if not np.isfinite(v):
                raise MalformedLine(line_no, f"non-finite value in {tok!r}")
            prev = j
            idx.append(j)
            vals.append(v)
        if idx:
            dim = max(dim, idx[-1])
        labels.append(label)
        rows.append((idx, vals))
    return labels, rows, dim


def _as_lines(text: str | TextIO | Iterable[str]) -> Iterable[str]:
    return io.StringIO(text) if isinstance(text, str) else text


def _dense(rows, dim: int) -> np.ndarray:
    X = np.zeros((len(rows), dim))
    for r, (idx, vals) in enumerate(rows):
        if idx:
            X[r, np.asarray(idx) - 1] = vals
    return X


def parse_sparse_dataset(text: str | TextIO | Iterable[str]) -> TrainingSet:
    """Parse LIBSVM-format text into a :class:`TrainingSet`.

    Lines look like ``<label> <idx>:<val> ...`` with strictly ascending
    1-based indices. ``#`` starts a comment. Missing indices are zero and
    ``dim`` is the largest index seen on any line.
    """
    labels, rows, dim = _parse_rows(_as_lines(text))
    if not rows:
        raise EmptyInput("no samples in input")
    return TrainingSet(_dense(rows, dim), _map_labels(labels))


def parse_features(text: str | TextIO | Iterable[str], dim: int) -> tuple[np.ndarray, list[float]]:
    """Feature rows padded to ``dim`` columns plus the raw label column.

    Unlike :func:`parse_sparse_dataset` this accepts empty input and
    single-class files, which is what prediction needs.
    """
    labels, rows, seen = _parse_rows(_as_lines(text))
    if seen > dim:
        raise DatasetError(f"dimension mismatch: data has index {seen}, model expects {dim}")
    return _dense(rows, dim), labels


def format_sparse_dataset(data: TrainingSet) -> str:
    """Inverse of :func:`parse_sparse_dataset` (labels written as +1/-1).

    Zeros are omitted. If the last feature column is entirely zero an explicit
    ``dim:0`` entry goes on the first line so ``dim`` survives a round trip.
    """
    out = []
    pad_last = data.dim > 0 and not np.any(data.X[:, -1])
    for r, (row, label) in enumerate(zip(data.X, data.y)):
        toks = ["+1" if label == 1 else "-1"]
        nz = np.flatnonzero(row)
        toks.extend(f"{j + 1}:{float(row[j])!r}" for j in nz)
        if r == 0 and pad_last:
            toks.append(f"{data.dim}:0")
        out.append(" ".join(toks))
    return "\n".join(out) + "\n"


def load_dataset(path: str | Path) -> TrainingSet:
    with open(path, encoding="utf-8", newline=None) as fh:
        return parse_sparse_dataset(fh)


def load_features(path: str | Path, dim: int) -> tuple[np.ndarray, list[float]]:
    with open(path, encoding="utf-8", newline=None) as fh:
        return parse_features(fh, dim)


def save_dataset(data: TrainingSet, path: str | Path) -> None:
    Path(path).write_text(format_sparse_dataset(data), encoding="utf-8", newline="\n")


def fit_standardization(X: np.ndarray) -> StandardizationStats:
    X = np.asarray(X, dtype=np.float64)
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    # zero-variance guard; relative test so constant columns with rounding noise count too
    degenerate = std <= 1e-12 * np.maximum(1.0, np.abs(mean))
    scale = np.where(degenerate, 1.0, std)
    return StandardizationStats(mean=mean, scale=scale)


def standardize(
    train: TrainingSet, test: TrainingSet | None = None
) -> tuple[TrainingSet, TrainingSet | None, StandardizationStats]:
    """Zero-mean/unit-variance scaling fitted on ``train`` only."""
    if train.l == 0:
        raise DatasetError("cannot standardize an empty training set")
    stats = fit_standardization(train.X)
    train_s = TrainingSet(stats.apply(train.X), train.y)
    test_s = None if test is None else TrainingSet(stats.apply(test.X), test.y)
    return train_s, test_s, stats


def split(data: TrainingSet, spec: SplitSpec) -> tuple[TrainingSet, TrainingSet]:
    """Seeded random split with ``round(fraction * l)`` training samples.

    A permutation that leaves either side without one of the classes is
    rejected and redrawn with the next seed, at most ``spec.max_retries`` times.
    """
    if data.n_pos < 2 or data.n_neg < 2:
        raise SplitError("need at least two samples per class to split")
    n_train = int(round(spec.train_fraction * data.l))
    if not 2 <= n_train <= data.l - 2:
        raise SplitError(f"train size {n_train} leaves a side with fewer than two samples")
    for attempt in range(spec.max_retries + 1):
        rng = np.random.default_rng(spec.seed + attempt)
        perm = rng.permutation(data.l)
        tr, te = np.sort(perm[:n_train]), np.sort(perm[n_train:])
        if len(np.unique(data.y[tr])) == 2 and len(np.unique(data.y[te])) == 2:
            return data.subset(tr), data.subset(te)
    raise SplitError(
        f"no class-balanced split found after {spec.max_retries} retries from seed {spec.seed}"
    )
