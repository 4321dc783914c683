"""Convert locally available copies of the benchmark datasets to sparse LIBSVM files.

    python scripts/build_datasets.py --keel DIR [--orange-wheel WHL] [--out data]

``--keel`` points at a directory with the KEEL CSV exports (sonar.dat,
heart.dat, ionosphere.dat, australian.dat), e.g. unpacked from the
``keel-ds`` wheel. The Orange3 wheel, if given, supplies a full-precision
ionosphere table. Breast cancer comes from scikit-learn's bundled copy.
Parkinsons is not bundled by any of these; drop ``parkinsons.libsvm`` into
the output directory by hand (label column ``status``, 22 voice features).
"""

from __future__ import annotations

import argparse
import csv
import io
import zipfile
from pathlib import Path

import numpy as np

from hullsvc.data_io import TrainingSet, save_dataset
from hullsvc.datasets import FILES


def _keel(path: Path, positive: str) -> TrainingSet:
    rows = [r for r in csv.reader(path.read_text().splitlines(), skipinitialspace=True) if r]
    X = np.array([[float(v) for v in r[:-1]] for r in rows])
    y = np.array([1 if r[-1].strip() == positive else -1 for r in rows])
    return TrainingSet(X, y)


def _orange_ionosphere(wheel: Path) -> TrainingSet:
    with zipfile.ZipFile(wheel) as z:
        name = next(n for n in z.namelist() if n.endswith("datasets/ionosphere.tab"))
        lines = io.TextIOWrapper(z.open(name), encoding="utf-8").read().splitlines()
    rows = [ln.split("\t") for ln in lines[3:] if ln.strip()]
    X = np.array([[float(v) for v in r[:-1]] for r in rows])
    # the second attribute is identically zero
    X = X[:, X.std(axis=0) > 0]
    y = np.array([1 if r[-1].strip() == "g" else -1 for r in rows])
    return TrainingSet(X, y)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--keel", type=Path, required=True)
    ap.add_argument("--orange-wheel", type=Path)
    ap.add_argument("--out", type=Path, default=Path("data"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    sets = {
        "SON": _keel(args.keel / "sonar.dat", "M"),
        "HEA": _keel(args.keel / "heart.dat", "2"),
        "AUS": _keel(args.keel / "australian.dat", "1"),
    }
    if args.orange_wheel:
        sets["ION"] = _orange_ionosphere(args.orange_wheel)
    else:
        sets["ION"] = _keel(args.keel / "ionosphere.dat", "g")

    from sklearn.datasets import load_breast_cancer
    bc = load_breast_cancer()
    # malignant (target 0) is the positive class
    sets["BRE"] = TrainingSet(bc.data, np.where(bc.target == 0, 1, -1))

    for key, ds in sets.items():
        path = args.out / FILES[key]
        save_dataset(ds, path)
        print(f"{key}: {ds.l} samples, {ds.dim} features ({ds.n_pos}+/{ds.n_neg}-) -> {path}")


if __name__ == "__main__":
    main()
