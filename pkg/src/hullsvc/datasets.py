"""Lookup of the benchmark datasets by their short keys."""

from __future__ import annotations

import os
from pathlib import Path

from .data_io import TrainingSet, load_dataset

FILES = {
    "PAR": "parkinsons.libsvm",
    "SON": "sonar.libsvm",
    "HEA": "heart.libsvm",
    "ION": "ionosphere.libsvm",
    "BRE": "breast_cancer.libsvm",
    "AUS": "australian.libsvm",
}


def data_dir() -> Path:
    """``$HULLSVC_DATA`` if set, else ``data/`` at the repository root."""
    env = os.environ.get("HULLSVC_DATA")
    if env:
        return Path(env)
    return Path(__file__).resolve().parents[2] / "data"


def dataset_path(key: str) -> Path:
    try:
        return data_dir() / FILES[key.upper()]
    except KeyError:
        raise KeyError(f"unknown dataset key {key!r}; known: {', '.join(FILES)}") from None


def available(key: str) -> bool:
    return dataset_path(key).is_file()


def load(key: str) -> TrainingSet:
    path = dataset_path(key)
    if not path.is_file():
        raise FileNotFoundError(f"dataset {key.upper()} not found at {path}")
    return load_dataset(path)
