"""Hull-distance support vector classification with gradient-based kernel width selection."""

from .data_io import SplitSpec, StandardizationStats, TrainingSet, load_dataset, split, standardize
from .kernel import GramPack, KernelParams, build_gram, gamma_derivative
from .maxmin import GammaTrace, MaxMinConfig, MaxMinResult, Outcome, gb_train
from .model import SvcModel, accuracy, decide, deserialize, fisher_ratio, serialize
from .pga import pga_solve
from .smo import smo_solve
from .solver_core import AlphaState, kkt_report

__version__ = "0.1.0"

__all__ = [
    "AlphaState", "GammaTrace", "GramPack", "KernelParams", "MaxMinConfig", "MaxMinResult",
    "Outcome", "SplitSpec", "StandardizationStats", "SvcModel", "TrainingSet", "accuracy",
    "build_gram", "decide", "deserialize", "fisher_ratio", "gamma_derivative", "gb_train",
    "kkt_report", "load_dataset", "pga_solve", "serialize", "smo_solve", "split", "standardize",
]
