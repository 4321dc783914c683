"""Standardize, select the width, fit, score: the end-to-end training path."""

from __future__ import annotations

from dataclasses import dataclass

from .data_io import SplitSpec, TrainingSet, split, standardize
from .kernel import KernelParams, gamma_derivative
from .maxmin import MaxMinConfig, MaxMinResult, gb_train
from .model import SvcModel, accuracy, fit_model


@dataclass
class TrainOutput:
    model: SvcModel
    result: MaxMinResult
    train_std: TrainingSet

    @property
    def final_grad(self) -> float:
        return gamma_derivative(self.result.alpha, self.result.pack)


def train(data: TrainingSet, config: MaxMinConfig | None = None) -> TrainOutput:
    """Fit on raw ``data``; standardization statistics come from ``data`` alone."""
    cfg = config or MaxMinConfig()
    train_s, _, stats = standardize(data)
    res = gb_train(train_s, cfg)
    model = fit_model(res.alpha, train_s, KernelParams(res.gamma, cfg.c_reg), stats)
    return TrainOutput(model, res, train_s)


@dataclass(frozen=True)
class RepeatRecord:
    repeat: int
    seed: int
    gamma: float
    outer_iterations: int
    outcome: str
    final_grad: float
    accuracy: float


def run_split(data: TrainingSet, seed: int, fraction: float = 0.8,
              config: MaxMinConfig | None = None, repeat: int = 0
              ) -> tuple[RepeatRecord, TrainOutput, TrainingSet, TrainingSet]:
    """One seeded split: train on the larger side, score on the held-out side."""
    tr, te = split(data, SplitSpec(train_fraction=fraction, seed=seed))
    out = train(tr, config)
    acc = accuracy(out.model, te).accuracy
    rec = RepeatRecord(repeat, seed, out.result.gamma, out.result.outer_iterations,
                       out.result.outcome.value, out.final_grad, acc)
    return rec, out, tr, te
