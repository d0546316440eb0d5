"""Measurement drivers behind the CLI.

Benchmark sweeps time the sequential fine solver against the parareal
driver at matched degrees of freedom, and the truncation study measures
the pointwise error of the hybrid Caputo operator against analytic
derivatives on refinement sequences.
"""

from __future__ import annotations

import time
import tracemalloc
from dataclasses import dataclass

import numpy as np

from .l1 import TimeGrids, caputo_power, discrete_caputo_hybrid
from .parareal import parareal_solve
from .problems import get_problem
from .spectral import build_operator
from .stepping import run_fine_sequential

__all__ = [
    "BenchRecord",
    "TRUNCATION_FUNCTIONS",
    "TruncationStudy",
    "bench_point",
    "bench_sweep",
    "fit_loglog",
    "truncation_study",
]


def fit_loglog(x, y):
    """Least-squares slope of log(y) against log(x); NaN when underdetermined."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    good = (x > 0) & (y > 0)
    if good.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(x[good]), np.log(y[good]), 1)[0])


# -- benchmark ---------------------------------------------------------------


@dataclass(frozen=True)
class BenchRecord:
    """One benchmark point; allocation figures are tracemalloc peaks (approximate)."""

    dof: int
    nt: int
    m: int
    degree: int
    threads: int
    wall_fine: float
    wall_parareal: float
    speedup: float
    iterations: int
    final_diff: float
    peak_alloc_fine: int
    peak_alloc_parareal: int


def _best_time(fn, reps, warmup):
    for _ in range(warmup):
        result = fn()
    best = float("inf")
    for _ in range(max(1, reps)):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def _peak_alloc(fn):
    tracemalloc.start()
    try:
        fn()
        return tracemalloc.get_traced_memory()[1]
    finally:
        tracemalloc.stop()


def bench_point(problem_name, dof, *, alpha=None, degree=16, m=32, tol=1e-10,
                k_max=20, threads=1, reps=3, warmup=1, measure_memory=True):
    """Time both solvers at ``dof = nt * m`` fine steps and report the speedup.

    ``m`` is clipped to ``dof`` and ``nt = dof // m`` (the realised dof is
    recorded).  Timing is the minimum over ``reps`` repetitions after
    ``warmup`` discarded runs; the memory pass runs separately so tracing
    does not pollute the timings.
    """
    m_eff = max(1, min(m, dof))
    nt = max(1, dof // m_eff)
    problem = get_problem(problem_name, alpha=alpha)
    op = build_operator(degree, problem.a, problem.b)
    grids = TimeGrids(problem.t_final, nt, m_eff)

    def fine():
        return run_fine_sequential(problem, op, grids)

    def parallel():
        return parareal_solve(problem, op, grids, tol=tol, k_max=k_max, threads=threads)

    wall_fine, _ = _best_time(fine, reps, warmup)
    wall_para, (_, report) = _best_time(parallel, reps, warmup)
    peak_fine = _peak_alloc(fine) if measure_memory else 0
    peak_para = _peak_alloc(parallel) if measure_memory else 0
    return BenchRecord(
        dof=nt * m_eff,
        nt=nt,
        m=m_eff,
        degree=degree,
        threads=threads,
        wall_fine=wall_fine,
        wall_parareal=wall_para,
        speedup=wall_fine / wall_para,
        iterations=report.iterations,
        final_diff=report.diffs[-1],
        peak_alloc_fine=peak_fine,
        peak_alloc_parareal=peak_para,
    )


def bench_sweep(problem_name, dofs, **kwargs):
    """Benchmark every dof in the sweep list; returns the records in order."""
    if not dofs:
        raise ValueError("benchmark sweep must not be empty")
    return [bench_point(problem_name, dof, **kwargs) for dof in dofs]


# -- truncation study --------------------------------------------------------


def _const_pair(alpha):
    return (lambda t: 1.0), (lambda t: 0.0)


def _linear_pair(alpha):
    return (lambda t: t), (lambda t: caputo_power(1.0, alpha, t))


def _root_pair(alpha):
    return (lambda t: t**0.5), (lambda t: caputo_power(0.5, alpha, t))


def _mixed_pair(alpha):
    # the generic low-regularity profile: smooth part plus t^alpha layer
    def y(t):
        return t**alpha + t

    def dy(t):
        return caputo_power(alpha, alpha, t) + caputo_power(1.0, alpha, t)

    return y, dy


TRUNCATION_FUNCTIONS = {
    "const": _const_pair,
    "linear": _linear_pair,
    "root": _root_pair,
    "mixed": _mixed_pair,
}


@dataclass(frozen=True)
class TruncationStudy:
    """Pointwise errors over ``(n, r)`` plus fitted orders per region.

    ``rows`` are ``(nt, dt, region, n, r, t, error)`` tuples; ``orders``
    maps region names (``n0``, ``n1``, ``n2plus``) to fitted log-log
    slopes of the error against the fine step.
    """

    rows: list
    orders: dict


def truncation_study(alpha, m, nt_list, function="mixed", t_final=1.0):
    """Hybrid-operator errors against the analytic derivative on an nt sweep.

    The ``n >= 2`` order is fitted at a fixed physical probe (three
    quarters of the horizon, interval endpoint), the near-origin regions
    at their per-level maxima.
    """
    try:
        y, dy = TRUNCATION_FUNCTIONS[function](alpha)
    except KeyError:
        raise ValueError(
            f"unknown test function {function!r}; choices: {', '.join(sorted(TRUNCATION_FUNCTIONS))}"
        ) from None
    if not nt_list:
        raise ValueError("truncation sweep must not be empty")

    rows = []
    dts, max_n0, max_n1, probes = [], [], [], []
    for nt in nt_list:
        grids = TimeGrids(t_final, int(nt), int(m))
        probe_n = max(2, (3 * int(nt)) // 4)
        worst_n0 = worst_n1 = 0.0
        probe_err = None
        for n in range(grids.nt):
            coarse = [y(i * grids.dT) for i in range(n + 1)]
            for r in range(1, grids.m + 1):
                fine = [y(n * grids.dT + jj * grids.dt) for jj in range(r + 1)]
                t = grids.fine_node(n, r)
                err = abs(discrete_caputo_hybrid(coarse, fine, grids, alpha) - dy(t))
                region = "n0" if n == 0 else ("n1" if n == 1 else "n2plus")
                rows.append((nt, grids.dt, region, n, r, t, err))
                if n == 0 and r >= 2:
                    worst_n0 = max(worst_n0, err)
                elif n == 1:
                    worst_n1 = max(worst_n1, err)
                if n == probe_n and r == grids.m:
                    probe_err = err
        dts.append(grids.dt)
        max_n0.append(worst_n0)
        max_n1.append(worst_n1)
        probes.append(probe_err if probe_err is not None else float("nan"))

    orders = {
        "n0": fit_loglog(dts, max_n0),
        "n1": fit_loglog(dts, max_n1),
        "n2plus": fit_loglog(dts, probes),
    }
    return TruncationStudy(rows=rows, orders=orders)
