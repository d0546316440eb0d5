"""Command-line front end.

Subcommands: ``solve`` (trajectory CSV), ``parareal`` (per-iteration CSV),
``bench`` (runtime/speedup/allocation CSV over a dof sweep), ``bounds``
(binomial sums and their estimates), ``truncation`` (hybrid-operator error
study).  A ``key = value`` config file can preset everything; explicit
flags override it.  Diagnostics go to stderr, CSV to the output path.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import os
import sys
from dataclasses import dataclass

from .bounds import BoundParams, double_sum_bound, double_sum_exact, single_sum_bound, single_sum_exact
from .errors import ParafracError
from .harness import TRUNCATION_FUNCTIONS, bench_sweep, truncation_study
from .l1 import TimeGrids
from .parareal import parareal_solve
from .problems import get_problem, registry_names
from .spectral import build_operator, l2_norm
from .stepping import run_coarse, run_fine_sequential

__all__ = ["RunConfig", "emit_config", "main", "parse_config_text"]

CONFIG_SECTION = "run"


@dataclass(frozen=True)
class RunConfig:
    """Effective settings of one CLI invocation (defaults, config file, flags)."""

    problem: str = "paper42"
    alpha: float | None = None
    t_final: float | None = None
    nt: int = 8
    m: int = 4
    degree: int = 16
    tol: float = 1e-10
    kmax: int = 20
    threads: int | None = None
    out: str | None = None
    sweep: tuple = ()
    reference: bool = False
    solver: str = "fine"
    reps: int = 3
    function: str = "mixed"
    bound_a: float = 1.0
    bound_b: float = 1.1
    bound_c: float = 1.001
    bound_n: int = 10

    def validate(self):
        if self.nt < 1 or self.m < 1 or self.degree < 2:
            raise ValueError("grid parameters nt, m must be >= 1 and n >= 2")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.kmax < 1:
            raise ValueError("kmax must be at least 1")
        if self.threads is not None and self.threads < 1:
            raise ValueError("threads must be at least 1")
        if self.reps < 1:
            raise ValueError("reps must be at least 1")
        if self.solver not in ("fine", "coarse"):
            raise ValueError("solver must be 'fine' or 'coarse'")
        if self.function not in TRUNCATION_FUNCTIONS:
            raise ValueError(f"unknown test function {self.function!r}")
        if any(d < 1 for d in self.sweep):
            raise ValueError("sweep entries must be positive integers")
        return self


_FIELD_TYPES = {f.name: f for f in dataclasses.fields(RunConfig)}


def _parse_value(name, text):
    text = text.strip()
    if name == "sweep":
        return tuple(int(tok) for tok in text.split(",") if tok.strip())
    if text == "":
        return None
    if name == "reference":
        return text.lower() in ("1", "true", "yes", "on")
    default = _FIELD_TYPES[name].default
    if name in ("alpha", "t_final", "tol", "bound_a", "bound_b", "bound_c"):
        return float(text)
    if isinstance(default, bool):
        return text.lower() in ("1", "true", "yes", "on")
    if isinstance(default, int) or name in ("threads",):
        return int(text)
    if isinstance(default, float):
        return float(text)
    return text


def parse_config_text(text):
    """Parse a ``[run]`` section of ``key = value`` lines into field overrides."""
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ValueError(f"malformed config: {exc}") from None
    if not parser.has_section(CONFIG_SECTION):
        raise ValueError(f"config must contain a [{CONFIG_SECTION}] section")
    overrides = {}
    for key, raw in parser.items(CONFIG_SECTION):
        key = "degree" if key == "n" else key  # config accepts the flag name too
        if key not in _FIELD_TYPES:
            raise ValueError(f"unknown config key {key!r}")
        overrides[key] = _parse_value(key, raw)
    return overrides


def emit_config(cfg):
    """Render the effective config as the text the parser accepts (round-trips)."""
    lines = [f"[{CONFIG_SECTION}]"]
    for f in dataclasses.fields(RunConfig):
        value = getattr(cfg, f.name)
        if value is None:
            rendered = ""
        elif f.name == "sweep":
            rendered = ",".join(str(v) for v in value)
        elif isinstance(value, bool):
            rendered = "true" if value else "false"
        elif isinstance(value, float):
            rendered = repr(value)
        else:
            rendered = str(value)
        lines.append(f"{f.name} = {rendered}")
    return "\n".join(lines) + "\n"


def _config_from_sources(args):
    overrides = {}
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as fh:
            overrides.update(parse_config_text(fh.read()))
    for name in _FIELD_TYPES:
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = tuple(value) if name == "sweep" else value
    return RunConfig(**overrides).validate()


def _float_cell(x):
    return f"{x:.16e}"


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            cells = []
            for item in row:
                if isinstance(item, float):
                    cells.append(_float_cell(item))
                else:
                    cells.append(str(item))
            fh.write(",".join(cells) + "\n")


def _effective_threads(cfg):
    return cfg.threads if cfg.threads is not None else (os.cpu_count() or 1)


def _setup(cfg):
    problem = get_problem(cfg.problem, alpha=cfg.alpha, t_final=cfg.t_final)
    op = build_operator(cfg.degree, problem.a, problem.b)
    grids = TimeGrids(problem.t_final, cfg.nt, cfg.m)
    return problem, op, grids


def cmd_solve(cfg):
    problem, op, grids = _setup(cfg)
    if cfg.solver == "coarse":
        states = run_coarse(problem, op, grids)
    else:
        states, _ = run_fine_sequential(problem, op, grids)
    rows = [
        (n, n * grids.dT, l2_norm(op, states[n]), float(states[n].min()), float(states[n].max()))
        for n in range(grids.nt + 1)
    ]
    out = cfg.out or "solve.csv"
    _write_csv(out, ("n", "t", "l2_norm", "min", "max"), rows)
    print(f"wrote {out} ({len(rows)} rows)", file=sys.stderr)
    return 0


def cmd_parareal(cfg):
    problem, op, grids = _setup(cfg)
    threads = _effective_threads(cfg)
    reference = None
    reference_time = None
    if cfg.reference:
        reference, reference_time = run_fine_sequential(problem, op, grids)
    _, report = parareal_solve(
        problem, op, grids, tol=cfg.tol, k_max=cfg.kmax, threads=threads, reference=reference
    )
    report.wall_time_reference = reference_time
    header = ["k", "max_diff"]
    if cfg.reference:
        header.append("err_vs_fine")
    header.append("wall_time_cumulative")
    rows = []
    for k in range(1, report.iterations + 1):
        row = [k, report.diffs[k - 1]]
        if cfg.reference:
            row.append(report.errors_vs_reference[k])
        row.append(report.iteration_times[k - 1])
        rows.append(tuple(row))
    out = cfg.out or "parareal.csv"
    _write_csv(out, header, rows)
    fired = "tolerance" if report.stop_reason == "tol" else "iteration limit"
    print(
        f"stopped by {fired} after {report.iterations} iterations "
        f"(last diff {report.diffs[-1]:.3e}); wrote {out}",
        file=sys.stderr,
    )
    return 0


def cmd_bench(cfg):
    if not cfg.sweep:
        raise ValueError("bench needs a nonempty --sweep list of dof values")
    threads = _effective_threads(cfg)
    records = bench_sweep(
        cfg.problem,
        cfg.sweep,
        alpha=cfg.alpha,
        degree=cfg.degree,
        m=cfg.m,
        tol=cfg.tol,
        k_max=cfg.kmax,
        threads=threads,
        reps=cfg.reps,
    )
    header = (
        "dof", "nt", "m", "degree", "threads",
        "wall_time_fine", "wall_time_parareal", "speedup", "iterations_used",
        "final_diff", "peak_alloc_bytes_fine_approx", "peak_alloc_bytes_parareal_approx",
    )
    rows = [
        (
            r.dof, r.nt, r.m, r.degree, r.threads,
            r.wall_fine, r.wall_parareal, r.speedup, r.iterations,
            r.final_diff, r.peak_alloc_fine, r.peak_alloc_parareal,
        )
        for r in records
    ]
    out = cfg.out or "bench.csv"
    _write_csv(out, header, rows)
    print(f"wrote {out} ({len(rows)} sweep points)", file=sys.stderr)
    return 0


def cmd_bounds(cfg):
    rows = []
    for k in range(cfg.bound_n + 1):
        params = BoundParams(a=cfg.bound_a, b=cfg.bound_b, c=cfg.bound_c, n=cfg.bound_n, k=k)
        rows.append(
            (
                k,
                double_sum_exact(params),
                double_sum_bound(params),
                single_sum_exact(params),
                single_sum_bound(params),
            )
        )
    out = cfg.out or "bounds.csv"
    _write_csv(out, ("k", "double_sum", "double_bound", "single_sum", "single_bound"), rows)
    print(f"wrote {out} (k = 0..{cfg.bound_n})", file=sys.stderr)
    return 0


def cmd_truncation(cfg):
    alpha = cfg.alpha if cfg.alpha is not None else 0.5
    nt_list = cfg.sweep or (8, 16, 32, 64)
    study = truncation_study(alpha, cfg.m, nt_list, function=cfg.function)
    out = cfg.out or "truncation.csv"
    _write_csv(out, ("nt", "dt", "region", "n", "r", "t", "abs_error"), study.rows)
    for region in ("n0", "n1", "n2plus"):
        print(f"fitted order {region}: {study.orders[region]:.4f}", file=sys.stderr)
    print(f"wrote {out} ({len(study.rows)} rows)", file=sys.stderr)
    return 0


_COMMANDS = {
    "solve": cmd_solve,
    "parareal": cmd_parareal,
    "bench": cmd_bench,
    "bounds": cmd_bounds,
    "truncation": cmd_truncation,
}


def _add_common(parser, *, grid=True):
    parser.add_argument("--config", help="key = value config file ([run] section)")
    parser.add_argument("--out", help="output CSV path")
    if grid:
        parser.add_argument("--problem", choices=registry_names(), help="builtin problem")
        parser.add_argument("--alpha", type=float, help="fractional order in (0, 1]")
        parser.add_argument("--nt", type=int, help="coarse intervals")
        parser.add_argument("--m", type=int, help="fine steps per coarse interval")
        parser.add_argument("--n", type=int, dest="degree", help="spectral degree")
        parser.add_argument("--tol", type=float, help="parareal stopping tolerance")
        parser.add_argument("--kmax", type=int, help="parareal iteration cap")
        parser.add_argument("--threads", type=int, help="parallel-stage threads")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="parafrac",
        description="Parallel-in-time solver for quasilinear time-fractional diffusion",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run one solver and dump the coarse-node trajectory")
    _add_common(p)
    p.add_argument("--solver", choices=("fine", "coarse"), help="which propagator to run")

    p = sub.add_parser("parareal", help="run the parareal iteration")
    _add_common(p)
    p.add_argument("--reference", action="store_true", default=None,
                   help="also run the sequential fine solver and report errors against it")

    p = sub.add_parser("bench", help="time fine vs parareal over a dof sweep")
    _add_common(p)
    p.add_argument("--sweep", type=_sweep_list, help="comma list of dof values")
    p.add_argument("--reps", type=int, help="timing repetitions (min is reported)")

    p = sub.add_parser("bounds", help="binomial sums and their closed-form estimates")
    _add_common(p, grid=False)
    p.add_argument("--a", type=float, dest="bound_a", help="per-step error coefficient")
    p.add_argument("--b", type=float, dest="bound_b", help="cross-iterate coefficient")
    p.add_argument("--c", type=float, dest="bound_c", help="within-iterate coefficient")
    p.add_argument("--n", type=int, dest="bound_n", help="table depth (k runs 0..n)")

    p = sub.add_parser("truncation", help="hybrid-operator truncation error study")
    _add_common(p)
    p.add_argument("--sweep", type=_sweep_list, help="comma list of nt refinement levels")
    p.add_argument("--function", choices=sorted(TRUNCATION_FUNCTIONS),
                   help="test function family")

    return parser


def _sweep_list(text):
    try:
        return tuple(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma list of integers: {text!r}")


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = _config_from_sources(args)
        print(
            f"parafrac {args.command}: problem={cfg.problem} threads={_effective_threads(cfg)}",
            file=sys.stderr,
        )
        return _COMMANDS[args.command](cfg)
    except (ValueError, OverflowError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ParafracError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
