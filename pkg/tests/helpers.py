"""Instance generators shared by the test modules."""

from __future__ import annotations

import numpy as np
from hypothesis import strategies as st

from hullsvc.data_io import TrainingSet


def random_instance(rng: np.random.Generator, l: int, dim: int = 2,
                    n_pos: int | None = None) -> TrainingSet:
    if n_pos is None:
        n_pos = int(rng.integers(1, l))
    y = np.array([1] * n_pos + [-1] * (l - n_pos))
    return TrainingSet(rng.normal(size=(l, dim)), y)


def random_alpha(data: TrainingSet, rng: np.random.Generator, p_zero: float = 0.3,
                 p_one: float = 0.0) -> np.ndarray:
    """Feasible point with a random share of components pinned at 0 (or one at 1)."""
    a = np.zeros(data.l)
    for idx in (data.pos_idx, data.neg_idx):
        if p_one and rng.random() < p_one:
            a[idx[int(rng.integers(len(idx)))]] = 1.0
            continue
        w = rng.random(len(idx))
        w[rng.random(len(idx)) < p_zero] = 0.0
        if w.sum() == 0:
            w[int(rng.integers(len(idx)))] = 1.0
        a[idx] = w / w.sum()
    return a


seeds = st.integers(min_value=0, max_value=2**32 - 1)
gammas = st.sampled_from([0.1, 1.0, 10.0])
