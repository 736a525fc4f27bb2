"""Command-line front end.

Exit codes: 0 success, 2 invalid input, 3 I/O failure, 4 Monte-Carlo study failure.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, TextIO

import numpy as np

from . import ar1, estimation, ml_dist, prabhakar
from .errors import MLEltError, StudyFailure

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_IO = 3
EXIT_STUDY = 4

MODELS = ("ml", "prabhakar", "ar1")
DEFAULT_TRIALS = {"ml": 500, "prabhakar": 100, "ar1": 500}


class UsageError(Exception):
    """Invalid flags or input data; maps to exit code 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


@dataclass(frozen=True)
class RunConfig:
    command: str
    model: str | None = None
    params: tuple[float, ...] = ()
    n: int = 1000
    trials: int | None = None
    seed: int = 42
    input_path: str | None = None
    output_path: str | None = None
    grid_override: tuple[float, ...] | None = None
    column: int | None = None
    workers: int = 1

    def __post_init__(self) -> None:
        if self.n < 1:
            raise UsageError("--n must be >= 1")
        if self.trials is not None and self.trials < 1:
            raise UsageError("--trials must be >= 1")


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _floats(text: str, flag: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError as exc:
        raise UsageError(f"{flag}: expected comma-separated numbers, got {text!r}") from exc
    if not vals:
        raise UsageError(f"{flag}: no values given")
    return vals


def _make_params(model: str, values: Sequence[float]):
    shapes = {"ml": (ml_dist.MLParams, "alpha,sigma"),
              "prabhakar": (prabhakar.PrabhakarParams, "alpha,sigma,gamma"),
              "ar1": (ar1.AR1Params, "alpha,rho")}
    cls, names = shapes[model]
    if len(values) != len(names.split(",")):
        raise UsageError(f"--params for {model} must be {names}")
    try:
        return cls(*values)
    except MLEltError as exc:
        raise UsageError(f"invalid {model} parameters: {exc}") from exc


def _grid(cfg: RunConfig):
    if cfg.grid_override is None:
        return None
    try:
        return estimation.LTGrid(np.asarray(cfg.grid_override))
    except MLEltError as exc:
        raise UsageError(f"--grid: {exc}") from exc


def read_values(path: str, column: int | None = None) -> np.ndarray:
    """Numbers from a text file: one per line, or column ``column`` of a CSV.

    Blank lines and lines starting with ``#`` are skipped; with ``column`` set a
    non-numeric first row is taken as a header.
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        field = line
        if column is not None:
            parts = line.split(",")
            if column >= len(parts):
                raise UsageError(f"{path}:{lineno}: no column {column}")
            field = parts[column].strip()
        try:
            out.append(float(field))
        except ValueError:
            if column is not None and not out:
                continue
            raise UsageError(f"{path}:{lineno}: not a number: {field!r}") from None
    return np.asarray(out, dtype=float)


def _positive_sample(cfg: RunConfig) -> np.ndarray:
    if cfg.input_path is None:
        raise UsageError("--input is required")
    x = read_values(cfg.input_path, cfg.column)
    if x.size == 0:
        raise UsageError("input contains no values")
    if np.any(~(x > 0)) or not np.all(np.isfinite(x)):
        raise UsageError("input values must be positive and finite")
    return x


class _Output:
    def __init__(self, path: str | None):
        self.path = path
        self.handle: TextIO | None = None

    def __enter__(self) -> TextIO:
        if self.path is None:
            return sys.stdout
        self.handle = open(self.path, "w", newline="")
        return self.handle

    def __exit__(self, *exc):
        if self.handle is not None:
            self.handle.close()


def _need_model(cfg: RunConfig, allowed=MODELS) -> str:
    if cfg.model is None:
        raise UsageError("--model is required")
    if cfg.model not in allowed:
        raise UsageError(f"--model must be one of {', '.join(allowed)} here")
    return cfg.model


def _need_params(cfg: RunConfig):
    if not cfg.params:
        raise UsageError("--params is required")
    return _make_params(cfg.model, cfg.params)


def cmd_sample(cfg: RunConfig) -> int:
    model = _need_model(cfg)
    p = _need_params(cfg)
    print(f"seed={cfg.seed}", file=sys.stderr)
    if model == "ar1":
        if cfg.n < 2:
            raise UsageError("ar1 sampling needs --n >= 2")
        traj = ar1.simulate(p, cfg.n, cfg.seed)
        with _Output(cfg.output_path) as out:
            out.write("t,y,eps\n")
            for t, (y, e) in enumerate(zip(traj.y, traj.eps), 1):
                out.write(f"{t},{fmt(y)},{fmt(e)}\n")
        return EXIT_OK
    draws = ml_dist.sample(p, cfg.n, cfg.seed) if model == "ml" else prabhakar.sample(p, cfg.n, cfg.seed)
    with _Output(cfg.output_path) as out:
        out.writelines(fmt(v) + "\n" for v in draws)
    return EXIT_OK


def _report(res: estimation.FitResult, out: TextIO) -> None:
    for name, val in zip(res.names, res.estimates):
        out.write(f"{name}={fmt(val)}\n")
    out.write(f"objective={fmt(res.objective)}\n")
    out.write(f"converged={str(bool(res.converged)).lower()}\n")
    out.write(f"evaluations={res.evaluations}\n")


def _read_series(cfg: RunConfig) -> np.ndarray:
    if cfg.input_path is None:
        raise UsageError("--input is required")
    # ar1-sim output has y in column 1; plain files hold one value per line
    col = cfg.column
    if col is None:
        first = next((ln for ln in Path(cfg.input_path).read_text().splitlines()
                      if ln.strip() and not ln.lstrip().startswith("#")), "")
        if first.replace(" ", "") == "t,y,eps":
            col = 1
    y = read_values(cfg.input_path, col)
    if y.size < 10:
        raise UsageError("AR(1) fitting needs at least 10 observations")
    return y


def cmd_fit(cfg: RunConfig) -> int:
    model = _need_model(cfg)
    grid = _grid(cfg)
    try:
        if model == "ar1":
            res = estimation.fit_ar1(_read_series(cfg), grid=grid)
        else:
            fit = estimation.fit_ml if model == "ml" else estimation.fit_prabhakar
            res = fit(_positive_sample(cfg), grid=grid)
    except MLEltError as exc:
        raise UsageError(str(exc)) from exc
    with _Output(cfg.output_path) as out:
        _report(res, out)
    return EXIT_OK


def _per_trial_path(path: str) -> str:
    p = Path(path)
    return str(p.with_name(p.stem + "_trials" + (p.suffix or ".csv")))


def cmd_mc_study(cfg: RunConfig) -> int:
    model = _need_model(cfg)
    _need_params(cfg)
    trials = cfg.trials or DEFAULT_TRIALS[model]
    print(f"seed={cfg.seed}", file=sys.stderr)
    truth = tuple(cfg.params)
    report = estimation.monte_carlo_study(model, truth, trials, cfg.n, cfg.seed, workers=cfg.workers)
    with _Output(cfg.output_path) as out:
        out.write("param,true,mean_est,rmse,mae\n")
        for name, t, m, r, a in report.rows():
            out.write(f"{name},{fmt(t)},{fmt(m)},{fmt(r)},{fmt(a)}\n")
    trial_path = _per_trial_path(cfg.output_path or "mc_study.csv")
    with open(trial_path, "w", newline="") as fh:
        fh.write("trial,seed," + ",".join(report.names) + ",converged\n")
        for i, row in enumerate(report.per_trial):
            vals = ",".join("nan" if math.isnan(v) else fmt(v) for v in row)
            fh.write(f"{i},{cfg.seed + i},{vals},{str(bool(report.converged[i])).lower()}\n")
    if report.failed:
        print(f"{report.failed} of {trials} trials failed", file=sys.stderr)
    return EXIT_OK


def survival_table(x: np.ndarray, fit: estimation.FitResult):
    """Rows ``(x, log empirical, log ML, log exponential)`` on the sorted unique points.

    Points where the empirical survival is zero (the sample maximum) are kept
    with ``-inf``.
    """
    xs = np.sort(x)
    pts = np.unique(xs)
    emp = (xs.size - np.searchsorted(xs, pts, side="right")) / xs.size
    with np.errstate(divide="ignore"):
        log_emp = np.log(emp)
        log_ml = np.log(ml_dist.survival(fit.params, pts))
    log_exp = -pts / float(np.mean(x))
    return pts, log_emp, log_ml, log_exp


def cmd_survival(cfg: RunConfig) -> int:
    x = _positive_sample(cfg)
    if np.unique(x).size < 2:
        raise UsageError("survival needs at least two distinct values")
    try:
        res = estimation.fit_ml(x, grid=_grid(cfg))
    except MLEltError as exc:
        raise UsageError(str(exc)) from exc
    pts, le, lm, lx = survival_table(x, res)
    with _Output(cfg.output_path) as out:
        out.write(f"# alpha={fmt(res.estimates[0])} sigma={fmt(res.estimates[1])} "
                  f"exp_rate={fmt(1.0 / float(np.mean(x)))}\n")
        out.write("x,log_emp_surv,log_ml_surv,log_exp_surv\n")
        for row in zip(pts, le, lm, lx):
            out.write(",".join(fmt(v) for v in row) + "\n")
    return EXIT_OK


def cmd_ar1_sim(cfg: RunConfig) -> int:
    return cmd_sample(RunConfig(**{**cfg.__dict__, "model": "ar1"}))


def cmd_ar1_fit(cfg: RunConfig) -> int:
    return cmd_fit(RunConfig(**{**cfg.__dict__, "model": "ar1"}))


COMMANDS = {
    "sample": cmd_sample,
    "fit": cmd_fit,
    "mc-study": cmd_mc_study,
    "ar1-sim": cmd_ar1_sim,
    "ar1-fit": cmd_ar1_fit,
    "survival": cmd_survival,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mlelt", description="Mittag-Leffler sampling and Laplace-transform fitting.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "sample": "draw a sample (one value per line, or t,y,eps for ar1)",
        "fit": "fit a model to a data file and print key=value lines",
        "mc-study": "Monte-Carlo simulate-and-fit study; writes summary and per-trial CSVs",
        "ar1-sim": "simulate an AR(1) trajectory as t,y,eps CSV",
        "ar1-fit": "fit (alpha, rho) to a series",
        "survival": "fit ML and exponential laws and write log-survival curves",
    }
    for name, text in helps.items():
        sp = sub.add_parser(name, help=text)
        sp.add_argument("--model", choices=MODELS)
        sp.add_argument("--params", type=lambda t: _floats(t, "--params"), default=())
        sp.add_argument("--n", type=int, default=1000)
        sp.add_argument("--trials", type=int)
        sp.add_argument("--seed", type=int, default=42)
        sp.add_argument("--input")
        sp.add_argument("--output")
        sp.add_argument("--grid", type=lambda t: _floats(t, "--grid"))
        sp.add_argument("--column", type=int)
        sp.add_argument("--workers", type=int, default=1)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        ns = build_parser().parse_args(argv)
        cfg = RunConfig(command=ns.command, model=ns.model, params=ns.params, n=ns.n,
                        trials=ns.trials, seed=ns.seed, input_path=ns.input,
                        output_path=ns.output, grid_override=ns.grid, column=ns.column,
                        workers=max(1, ns.workers))
        return COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except StudyFailure as exc:
        print(f"study failed: {exc}", file=sys.stderr)
        return EXIT_STUDY
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except MLEltError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
