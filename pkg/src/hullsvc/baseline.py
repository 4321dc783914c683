"""Grid-search cross-validated C-SVC, the reference the width selector is compared with."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data_io import TrainingSet

GAMMA_GRID = tuple(2.0**k for k in range(-15, 4, 2))
C_GRID = tuple(2.0**k for k in range(-5, 16, 2))


@dataclass(frozen=True)
class CvResult:
    gamma: float
    c_reg: float
    cv_accuracy: float
    test_accuracy: float | None
    n_fits: int


def cv_svc(train: TrainingSet, test: TrainingSet | None = None, folds: int = 5,
           gammas=GAMMA_GRID, cs=C_GRID, seed: int = 0) -> CvResult:
    """Pick (gamma, C) by stratified k-fold accuracy, refit on all of ``train``.

    ``n_fits`` counts the cross-validation fits only (grid size times folds).
    Ties go to the first grid point in (gamma, C) order.
    """
    from sklearn.model_selection import StratifiedKFold
    from sklearn.svm import SVC

    X, y = train.X, train.y
    n_splits = min(folds, train.n_pos, train.n_neg)
    skf = StratifiedKFold(n_splits=n_splits, shuffle=True, random_state=seed)
    fold_idx = list(skf.split(X, y))
    best = (-1.0, None, None)
    n_fits = 0
    for g in gammas:
        for c in cs:
            hits = 0
            for tr, va in fold_idx:
                clf = SVC(C=c, kernel="rbf", gamma=g).fit(X[tr], y[tr])
                hits += int(np.sum(clf.predict(X[va]) == y[va]))
                n_fits += 1
            acc = hits / train.l
            if acc > best[0]:
                best = (acc, g, c)
    acc, g, c = best
    test_acc = None
    if test is not None:
        clf = SVC(C=c, kernel="rbf", gamma=g).fit(X, y)
        test_acc = float(np.mean(clf.predict(test.X) == test.y))
    return CvResult(float(g), float(c), float(acc), test_acc, n_fits)
