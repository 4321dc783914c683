"""Kernel-width selection by gradient ascent on the inner minimum.

The outer problem maximizes ``min_a f(a, gamma)`` over the Gaussian width.
Each outer step solves the inner QP, reads off the partial derivative in
gamma at the inner solution, and moves gamma by ``eta * f'(gamma)``. The
learning rate is derived from the previous move: either its length alone
(``eta_rule="dlr"``) or its length over the change in ``f'`` it caused
(``eta_rule="secant"``, the default). A proposed width is only accepted when
the re-solved inner minimum rises by at least ``ascent_c * step * f'``;
otherwise ``eta`` is halved.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .data_io import TrainingSet
from .kernel import GAMMA_HI, GAMMA_LO, GramPack, KernelParams, build_gram, gamma_derivative, pairwise_sqdist
from .pga import pga_solve
from .smo import smo_solve
from .solver_core import AlphaState

log = logging.getLogger(__name__)

TRACE_HEADER = ("iter", "gamma", "objective", "grad_gamma", "eta", "halvings")


class InnerSolver(str, Enum):
    PGA = "pga"
    SMO = "smo"


class Outcome(str, Enum):
    CONVERGED = "converged"      # |f'(gamma)| <= eps2
    EPOCHS = "epochs"            # epoch_gamma exhausted
    STALLED = "stalled"          # no ascending step after max_halvings halvings
    BOUNDARY = "boundary"        # clamped at the search interval and pushing outward


@dataclass(frozen=True)
class MaxMinConfig:
    gamma0: float = 0.004
    c_reg: float = 1.0
    eps1: float = 1e-6
    eps2: float = 1e-3
    epoch_gamma: int = 500
    epoch_alpha: int = 2000
    gamma_lo: float = GAMMA_LO
    gamma_hi: float = GAMMA_HI
    inner_solver: InnerSolver = InnerSolver.PGA
    eta_floor: float = 1e-10
    max_halvings: int = 40
    gram_dtype: str = "f64"
    # sufficient-increase constant; 0 accepts any increase of the inner minimum
    ascent_c: float = 0.1
    # "secant": |dgamma| / |df'|; "dlr": |dgamma| alone
    eta_rule: str = "secant"
    # start each inner solve from the previous solution instead of the uniform point
    warm_start: bool = False

    def __post_init__(self):
        if not self.gamma_lo < self.gamma0 < self.gamma_hi:
            raise ValueError(f"gamma0={self.gamma0} outside ({self.gamma_lo}, {self.gamma_hi})")
        for name in ("c_reg", "eps1", "eps2", "eta_floor"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 <= self.ascent_c < 1.0:
            raise ValueError("ascent_c must lie in [0, 1)")
        if self.epoch_gamma < 1 or self.epoch_alpha < 1 or self.max_halvings < 0:
            raise ValueError("epoch counts must be positive")
        object.__setattr__(self, "inner_solver", InnerSolver(self.inner_solver))
        if self.eta_rule not in ("dlr", "secant"):
            raise ValueError("eta_rule must be 'dlr' or 'secant'")
        if self.gram_dtype not in ("f64", "f32"):
            raise ValueError("gram_dtype must be 'f64' or 'f32'")


@dataclass(frozen=True)
class GammaRecord:
    """One accepted outer iteration.

    ``eta`` and ``halvings`` describe the move that produced this ``gamma``
    (zero for the starting width).
    """

    gamma: float
    objective: float
    grad_gamma: float
    eta: float
    halvings: int


@dataclass
class GammaTrace:
    iterations: list[GammaRecord] = field(default_factory=list)

    def __len__(self):
        return len(self.iterations)

    @property
    def gammas(self) -> list[float]:
        return [r.gamma for r in self.iterations]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for k, r in enumerate(self.iterations):
            w.writerow([k, repr(r.gamma), repr(r.objective), repr(r.grad_gamma),
                        repr(r.eta), r.halvings])
        return buf.getvalue()

    def write_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv(), encoding="utf-8", newline="")

    @classmethod
    def from_csv(cls, text: str) -> "GammaTrace":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or tuple(rows[0]) != TRACE_HEADER:
            raise ValueError("not a gamma trace: bad header")
        return cls([GammaRecord(float(r[1]), float(r[2]), float(r[3]), float(r[4]), int(r[5]))
                    for r in rows[1:]])


@dataclass
class MaxMinResult:
    alpha: AlphaState
    gamma: float
    trace: GammaTrace
    outcome: Outcome
    n_inner_solves: int
    pack: GramPack = field(repr=False)

    @property
    def alpha_star(self) -> AlphaState:
        return self.alpha

    @property
    def gamma_star(self) -> float:
        return self.gamma

    @property
    def outer_iterations(self) -> int:
        return len(self.trace)

    def __iter__(self):
        # (alpha_star, gamma_star, trace) unpacking
        return iter((self.alpha, self.gamma, self.trace))


def gamma_update(gamma: float, grad: float, eta: float,
                 lo: float = GAMMA_LO, hi: float = GAMMA_HI) -> float:
    if not eta > 0:
        raise ValueError("eta must be positive")
    return float(min(max(gamma + eta * grad, lo), hi))


def secant_eta(prev_gamma: float | None, new_gamma: float | None, prev_grad: float | None,
               new_grad: float, eta_floor: float = 1e-10) -> float:
    """|delta gamma| / |delta f'|: the inverse of the observed curvature along gamma.

    Falls back to 1.0 at the start and to :func:`dynamic_eta` when the
    derivative did not change.
    """
    if prev_gamma is None or prev_grad is None:
        return 1.0
    dg = abs(new_gamma - prev_gamma)
    dd = abs(new_grad - prev_grad)
    if dd == 0.0:
        return max(dg, eta_floor)
    return max(dg / dd, eta_floor)


def dynamic_eta(prev_gamma: float | None, new_gamma: float | None, initial: bool,
                eta_floor: float = 1e-10) -> float:
    """Learning rate equal to the size of the last accepted move (1.0 at the start)."""
    if initial:
        return 1.0
    return max(abs(new_gamma - prev_gamma), eta_floor)


class _Inner:
    """Inner solves at arbitrary widths sharing one distance matrix."""

    def __init__(self, data: TrainingSet, config: MaxMinConfig):
        self.data = data
        self.config = config
        self.sqdist = pairwise_sqdist(data.X)
        self.dtype = np.float32 if config.gram_dtype == "f32" else np.float64
        self.solve_fn = pga_solve if config.inner_solver is InnerSolver.PGA else smo_solve
        self.count = 0

    def solve(self, gamma: float, warm: AlphaState | None):
        pack = build_gram(self.data, KernelParams(gamma, self.config.c_reg),
                          sqdist=self.sqdist, dtype=self.dtype)
        state = self.solve_fn(self.data, pack, self.config.eps1, self.config.epoch_alpha,
                              alpha0=warm, record=False)
        self.count += 1
        if not state.converged:
            log.warning("inner solve at gamma=%g stopped after %d iterations without converging",
                        gamma, state.iterations)
        return state, pack


def gb_train(data: TrainingSet, config: MaxMinConfig | None = None) -> MaxMinResult:
    """Alternate inner QP solves with ascent steps on the kernel width.

    Stops when ``|f'(gamma)| <= eps2``, after ``epoch_gamma`` outer
    iterations, when no ascending step is found after ``max_halvings``
    halvings, or when the width is pinned at an end of the search interval.
    Inner solves start from the uniform point unless ``config.warm_start``.
    """
    cfg = config or MaxMinConfig()
    inner = _Inner(data, cfg)
    gamma = cfg.gamma0
    state, pack = inner.solve(gamma, None)
    trace = GammaTrace()
    eta_in, halv_in = 0.0, 0
    prev_gamma: float | None = None
    prev_grad: float | None = None
    outcome = Outcome.EPOCHS

    for n in range(cfg.epoch_gamma):
        grad = gamma_derivative(state, pack)
        trace.iterations.append(GammaRecord(gamma, state.obj, grad, eta_in, halv_in))
        log.debug("outer %d: gamma=%.6g f=%.10g f'=%.3e", n, gamma, state.obj, grad)
        if abs(grad) <= cfg.eps2:
            outcome = Outcome.CONVERGED
            break
        if n == cfg.epoch_gamma - 1:
            break
        if cfg.eta_rule == "secant":
            eta = secant_eta(prev_gamma, gamma, prev_grad, grad, cfg.eta_floor)
        else:
            eta = dynamic_eta(prev_gamma, gamma, initial=prev_gamma is None, eta_floor=cfg.eta_floor)
        halvings = 0
        accepted = None
        while halvings <= cfg.max_halvings and eta >= cfg.eta_floor:
            cand = gamma_update(gamma, grad, eta, cfg.gamma_lo, cfg.gamma_hi)
            if cand == gamma:
                if gamma in (cfg.gamma_lo, cfg.gamma_hi):
                    outcome = Outcome.BOUNDARY
                break
            c_state, c_pack = inner.solve(cand, state if cfg.warm_start else None)
            if c_state.obj > state.obj + cfg.ascent_c * (cand - gamma) * grad:
                accepted = (cand, c_state, c_pack)
                break
            eta *= 0.5
            halvings += 1
        if accepted is None:
            if outcome is not Outcome.BOUNDARY:
                outcome = Outcome.STALLED
                log.warning("no ascending step from gamma=%g after %d halvings", gamma, halvings)
            break
        prev_gamma, prev_grad = gamma, grad
        gamma, state, pack = accepted
        eta_in, halv_in = eta, halvings

    return MaxMinResult(state, gamma, trace, outcome, inner.count, pack)


def inner_minimum(data: TrainingSet, gamma: float, config: MaxMinConfig | None = None,
                  warm: AlphaState | None = None) -> AlphaState:
    """Solve the inner problem at one width with the configured solver."""
    cfg = config or MaxMinConfig()
    state, _ = _Inner(data, cfg).solve(gamma, warm)
    return state
