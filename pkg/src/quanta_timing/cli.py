"""Command-line front end: bound curves, finite-M tables and self-validation.

Exit codes: 0 success, 1 a validation invariant failed, 2 bad configuration
or unwritable output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import analytic_bounds as ab
from .validation import run_all

SEED_ENV = "QUANTA_TIMING_SEED"
DEFAULT_SEED = 20111
DEFAULT_M_LIST = tuple(2 ** k for k in range(15))

BOUNDS_HEADER = ("chi", "cq_simple", "cq_series", "ct_simple", "ct_series")
FINITE_M_HEADER = ("M", "chi", "lambda_tau", "mi_ordered_lower", "cq_finite")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    chi_min: float = 0.25
    chi_max: float = 32.0
    chi_points: int = 64
    m_list: tuple = DEFAULT_M_LIST
    lam: float = 1.0
    rho: float = 1.0
    epsilon: float = 0.1
    samples: int = 100_000
    seed: int = DEFAULT_SEED
    out: str = "-"
    format: str = "csv"
    workers: int = 1
    timings: bool = False
    chi_grid: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        if not (0 < self.chi_min <= self.chi_max) or self.chi_points < 1:
            raise ConfigError("chi grid needs 0 < chi-min <= chi-max and chi-points >= 1")
        if not self.m_list or min(self.m_list) < 1:
            raise ConfigError("m-list must be non-empty with entries >= 1")
        if not (self.lam > 0 and self.rho > 0 and self.epsilon > 0):
            raise ConfigError("lambda, rho and epsilon must be positive")
        if self.command == "validate":
            if self.samples < 10_000:
                raise ConfigError("validate needs --samples >= 10000")
            if self.format != "json":
                raise ConfigError("validate only writes json")
        if self.chi_points == 1:
            self.chi_grid = np.array([self.chi_min])
        else:
            self.chi_grid = np.exp(np.linspace(math.log(self.chi_min), math.log(self.chi_max),
                                               self.chi_points))


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def bounds_rows(cfg: RunConfig):
    for chi in cfg.chi_grid:
        chi = float(chi)
        yield (chi, ab.cq_simple(chi), ab.cq_series(chi),
               ab.ct_bound(cfg.lam, chi, "simple"), ab.ct_bound(cfg.lam, chi, "series"))


def finite_m_rows(cfg: RunConfig):
    for M in cfg.m_list:
        for chi in cfg.chi_grid:
            chi = float(chi)
            lt = chi * M
            mi = ab.mi_ordered_lower(M, lt)
            yield (M, chi, lt, mi, mi / M)


def _render(header, rows, fmt: str) -> str:
    rows = list(rows)
    if fmt == "json":
        return json.dumps([dict(zip(header, r)) for r in rows], indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    return buf.getvalue()


def cmd_bounds(cfg: RunConfig) -> str:
    return _render(BOUNDS_HEADER, bounds_rows(cfg), cfg.format)


def cmd_finite_m(cfg: RunConfig) -> str:
    return _render(FINITE_M_HEADER, finite_m_rows(cfg), cfg.format)


def cmd_validate(cfg: RunConfig) -> tuple[str, bool]:
    report = run_all(cfg.seed, cfg.samples, rho=cfg.rho, eps=cfg.epsilon, lam=cfg.lam,
                     workers=cfg.workers, timings=cfg.timings)
    return json.dumps(report, indent=1, default=float) + "\n", report["passed"]


def _write(text: str, out: str):
    if out == "-":
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigError(f"cannot write {out}: {exc.strerror}") from exc


def _m_list(text: str) -> tuple:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad --m-list {text!r}") from exc


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{SEED_ENV} must be an integer, got {raw!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--chi-min", type=float, default=0.25)
    common.add_argument("--chi-max", type=float, default=32.0)
    common.add_argument("--chi-points", type=int, default=64)
    common.add_argument("--m-list", type=_m_list, default=DEFAULT_M_LIST,
                        help="comma-separated quanta counts (default 1,2,4,...,16384)")
    common.add_argument("--lambda", dest="lam", type=float, default=1.0,
                        help="first-passage rate (default 1)")
    common.add_argument("--rho", type=float, default=1.0, help="mean emission rate")
    common.add_argument("--epsilon", type=float, default=0.1, help="guard fraction")
    common.add_argument("--samples", type=int, default=100_000)
    common.add_argument("--seed", type=int, default=None,
                        help=f"root seed (default ${SEED_ENV} or {DEFAULT_SEED})")
    common.add_argument("--out", default="-", help="output path, '-' for stdout")
    common.add_argument("--format", choices=("csv", "json"), default=None,
                        help="csv (default) or json; validate always writes json")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--timings", action="store_true",
                        help="add wall-clock seconds to the validate report")

    parser = argparse.ArgumentParser(prog="quanta-timing", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("bounds", parents=[common], help="C_q and C_t lower bounds against chi")
    sub.add_parser("finite-m", parents=[common], help="finite-M ordered MI and per-quantum bound")
    sub.add_parser("validate", parents=[common], help="run the Monte Carlo self-checks")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        seed = args.seed if args.seed is not None else _default_seed()
        fmt = args.format or ("json" if args.command == "validate" else "csv")
        cfg = RunConfig(command=args.command, chi_min=args.chi_min, chi_max=args.chi_max,
                        chi_points=args.chi_points, m_list=args.m_list, lam=args.lam,
                        rho=args.rho, epsilon=args.epsilon, samples=args.samples, seed=seed,
                        out=args.out, format=fmt, workers=args.workers, timings=args.timings)
        if cfg.command == "bounds":
            _write(cmd_bounds(cfg), cfg.out)
        elif cfg.command == "finite-m":
            _write(cmd_finite_m(cfg), cfg.out)
        else:
            text, passed = cmd_validate(cfg)
            _write(text, cfg.out)
            if not passed:
                print("validation failed", file=sys.stderr)
                return 1
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
