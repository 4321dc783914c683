"""Command-line entry point: train, predict, eval and bench."""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
import time
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .data_io import DatasetError, load_dataset, load_features, standardize
from .kernel import KernelParams, build_gram
from .maxmin import MaxMinConfig, Outcome
from .model import ModelError, accuracy, deserialize, serialize
from .pga import pga_solve
from .pipeline import RepeatRecord, run_split, train
from .smo import smo_solve

EVAL_HEADER = [f.name for f in fields(RepeatRecord)]
CV_HEADER = ["cv_gamma", "cv_c", "cv_accuracy", "cv_fits"]


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    data_path: Path | None
    model_path: Path | None
    out_path: Path | None
    trace_path: Path | None
    seed: int
    repeats: int
    fraction: float
    solver: str
    baseline: str
    maxmin: MaxMinConfig

    def __post_init__(self):
        if self.repeats < 1:
            raise UsageError("--repeats must be at least 1")
        need = {
            "train": ("data_path",),
            "predict": ("data_path", "model_path", "out_path"),
            "eval": ("data_path",),
            "bench": ("data_path",),
        }[self.command]
        for name in need:
            if getattr(self, name) is None:
                raise UsageError(f"{self.command} needs --{name.split('_')[0]}")
        if self.command == "train" and self.model_path is None and self.out_path is None:
            raise UsageError("train needs --out (or --model) for the model file")


def _write_csv(path: Path | None, header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    text = buf.getvalue()
    if path is not None:
        path.write_text(text, encoding="utf-8", newline="")
    return text


def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, (float, np.floating)) else str(x)


def _header(cfg: RunConfig, out) -> None:
    m = cfg.maxmin
    print(f"# gamma0={m.gamma0:g} c={m.c_reg:g} eps1={m.eps1:g} eps2={m.eps2:g} "
          f"epoch_gamma={m.epoch_gamma} epoch_alpha={m.epoch_alpha} solver={m.inner_solver.value} "
          f"gram={m.gram_dtype} eta_rule={m.eta_rule} ascent_c={m.ascent_c:g}", file=out)


def cmd_train(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    data = load_dataset(cfg.data_path)
    _header(cfg, out)
    res = train(data, cfg.maxmin)
    model_path = cfg.model_path or cfg.out_path
    model_path.write_bytes(serialize(res.model))
    if cfg.trace_path is not None:
        res.result.trace.write_csv(cfg.trace_path)
    if res.result.outcome in (Outcome.STALLED, Outcome.EPOCHS):
        print(f"WARN outer loop ended with outcome={res.result.outcome.value}", file=out)
    train_acc = accuracy(res.model, res.train_std, standardized=True).accuracy
    print(f"gamma={res.result.gamma!r}", file=out)
    print(f"outer_iterations={res.result.outer_iterations}", file=out)
    print(f"abs_grad_gamma={abs(res.final_grad):.6g}", file=out)
    print(f"outcome={res.result.outcome.value}", file=out)
    print(f"train_accuracy={train_acc:.6f}", file=out)
    print(f"support_vectors={len(res.model.sv_y)}", file=out)
    return 0


def cmd_predict(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    model = deserialize(cfg.model_path.read_bytes())
    X, _ = load_features(cfg.data_path, model.dim)
    labels = model.predict(X) if len(X) else np.empty(0, dtype=np.int64)
    text = "".join(f"{int(v):+d}\n" for v in labels)
    cfg.out_path.write_text(text, encoding="utf-8", newline="")
    print(f"predicted {len(labels)} samples -> {cfg.out_path}", file=out)
    return 0


def _mean_std(values) -> tuple[float, float]:
    v = np.asarray(values, dtype=np.float64)
    return float(v.mean()), float(v.std(ddof=1)) if len(v) > 1 else 0.0


def cmd_eval(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    data = load_dataset(cfg.data_path)
    _header(cfg, out)
    header = list(EVAL_HEADER)
    if cfg.baseline == "cv":
        from .baseline import cv_svc
        header += CV_HEADER
    rows, accs, iters, cv_accs, cv_fits = [], [], [], [], []
    for r in range(cfg.repeats):
        seed = cfg.seed + r
        rec, _, tr, te = run_split(data, seed, cfg.fraction, cfg.maxmin, repeat=r)
        row = [_fmt(getattr(rec, h)) for h in EVAL_HEADER]
        accs.append(rec.accuracy)
        iters.append(rec.outer_iterations)
        if cfg.baseline == "cv":
            tr_s, te_s, _ = standardize(tr, te)
            cv = cv_svc(tr_s, te_s, seed=seed)
            row += [_fmt(cv.gamma), _fmt(cv.c_reg), _fmt(cv.test_accuracy), cv.n_fits]
            cv_accs.append(cv.test_accuracy)
            cv_fits.append(cv.n_fits)
        rows.append(row)
        print(f"repeat {r} seed {seed}: accuracy={100 * rec.accuracy:.2f}% gamma={rec.gamma:.6g} "
              f"outer_iterations={rec.outer_iterations} outcome={rec.outcome}", file=out)
    text = _write_csv(cfg.out_path, header, rows)
    if cfg.out_path is None:
        out.write(text)
    m, s = _mean_std(accs)
    print(f"maxmin accuracy: {100 * m:.2f} +- {100 * s:.2f} over {cfg.repeats} splits", file=out)
    print(f"maxmin trained models (mean outer iterations): {np.mean(iters):.2f}", file=out)
    if cfg.baseline == "cv":
        m, s = _mean_std(cv_accs)
        print(f"cv-svc accuracy: {100 * m:.2f} +- {100 * s:.2f}", file=out)
        print(f"cv-svc trained models per split: {int(np.mean(cv_fits))}", file=out)
    return 0


def cmd_bench(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    data = load_dataset(cfg.data_path)
    data_s, _, _ = standardize(data)
    m = cfg.maxmin
    dtype = np.float32 if m.gram_dtype == "f32" else np.float64
    pack = build_gram(data_s, KernelParams(m.gamma0, m.c_reg), dtype=dtype)
    rows, objs = [], []
    for name, fn in (("pga", pga_solve), ("smo", smo_solve)):
        t0 = time.perf_counter()
        st = fn(data_s, pack, m.eps1, m.epoch_alpha, record=False)
        dt = time.perf_counter() - t0
        objs.append(st.obj)
        rows.append([name, st.iterations, f"{dt:.6f}", repr(st.obj), st.converged])
        print(f"{name}: iterations={st.iterations} time={dt:.4f}s objective={st.obj!r} "
              f"converged={st.converged}", file=out)
    delta = abs(objs[0] - objs[1])
    print(f"abs_delta_objective={delta:.3e}", file=out)
    if cfg.out_path is not None:
        _write_csv(cfg.out_path, ["solver", "iterations", "seconds", "objective", "converged"], rows)
    return 0


COMMANDS = {"train": cmd_train, "predict": cmd_predict, "eval": cmd_eval, "bench": cmd_bench}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hullsvc", description="Hull-distance SVC with gradient-based kernel width selection")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("train", "Select gamma and fit a model"),
                        ("predict", "Label samples with a saved model"),
                        ("eval", "Repeated seeded train/test splits"),
                        ("bench", "Compare PGA and SMO at a fixed gamma")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--data", type=Path, help="Dataset in sparse LIBSVM format")
        p.add_argument("--model", type=Path, help="Model file")
        p.add_argument("--out", type=Path, help="Output file")
        p.add_argument("--trace", type=Path, help="Gamma trace CSV (train)")
        p.add_argument("--seed", type=int, default=0, help="Base split seed")
        p.add_argument("--repeats", type=int, default=1, help="Number of seeded splits (eval)")
        p.add_argument("--fraction", type=float, default=0.8, help="Training fraction")
        p.add_argument("--gamma0", type=float, default=0.004, help="Initial gamma (fixed gamma for bench)")
        p.add_argument("--c", type=float, default=1.0, help="Regularization C")
        p.add_argument("--eps1", type=float, default=1e-6, help="Inner KKT tolerance")
        p.add_argument("--eps2", type=float, default=1e-3, help="Outer |f'(gamma)| tolerance")
        p.add_argument("--epoch-gamma", type=int, default=500, help="Max outer iterations")
        p.add_argument("--epoch-alpha", type=int, default=2000, help="Max inner iterations")
        p.add_argument("--solver", choices=("pga", "smo"), default="pga")
        p.add_argument("--baseline", choices=("none", "cv"), default="none")
        p.add_argument("--gram-precision", choices=("f64", "f32"), default="f64")
        p.add_argument("--eta-rule", choices=("secant", "dlr"), default="secant",
                       help="Outer learning rate: |dgamma|/|df'| or |dgamma|")
        p.add_argument("--ascent-c", type=float, default=0.1,
                       help="Sufficient-increase constant for accepting a gamma step (0 = any increase)")
        p.add_argument("--warm-start", action="store_true", help="Warm-start inner solves")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def parse_config(argv=None) -> tuple[RunConfig, bool]:
    a = build_parser().parse_args(argv)
    try:
        mm = MaxMinConfig(gamma0=a.gamma0, c_reg=a.c, eps1=a.eps1, eps2=a.eps2,
                          epoch_gamma=a.epoch_gamma, epoch_alpha=a.epoch_alpha,
                          inner_solver=a.solver, gram_dtype=a.gram_precision,
                          eta_rule=a.eta_rule, ascent_c=a.ascent_c, warm_start=a.warm_start)
    except ValueError as e:
        raise UsageError(str(e)) from None
    cfg = RunConfig(a.command, a.data, a.model, a.out, a.trace, a.seed, a.repeats,
                    a.fraction, a.solver, a.baseline, mm)
    return cfg, a.verbose


def main(argv=None) -> int:
    try:
        cfg, verbose = parse_config(argv)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[cfg.command](cfg)
    except (ModelError, DatasetError, OSError, ValueError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
