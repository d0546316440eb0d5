"""Semi-implicit L1 marching schemes.

Three propagators share the same spatial machinery:

* :func:`coarse_step` / :func:`run_coarse` march on the coarse grid with
  the full coarse history (the cheap sequential propagator).
* :func:`fine_propagate` marches one coarse interval on the fine subgrid,
  compressing everything before the interval through the coarse history
  with fractional-index weights (the parallelizable propagator).
* :func:`run_fine_sequential` marches the whole horizon on the uniform
  fine grid with the complete fine history (the expensive reference).

States are vectors of interior collocation values; trajectories are arrays
of shape ``(nodes, interior)``.  Coefficients are evaluated semi-implicitly
at the previous substep, so every step is one dense LU solve.
"""

from __future__ import annotations

import time
from functools import lru_cache

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .errors import CoefficientError, SolverFailure
from .l1 import gamma_2_minus, weights_for
from .spectral import assemble_diffusion

__all__ = [
    "chain_fine",
    "coarse_step",
    "fine_propagate",
    "fine_sweep_intervals",
    "initial_state",
    "run_coarse",
    "run_fine_sequential",
]

PIVOT_RTOL = 1e-14
START_MISMATCH_TOL = 1e-10


@lru_cache(maxsize=32)
def _eye(size):
    out = np.eye(size)
    out.setflags(write=False)
    return out


def initial_state(problem, op):
    """Initial condition sampled at the interior collocation nodes."""
    u0 = np.asarray(problem.initial(op.interior_nodes), dtype=float)
    return np.broadcast_to(u0, (op.interior_size,)).astype(float, copy=True)


def _source_values(problem, op, u, t):
    f = np.asarray(problem.source(op.interior_nodes, t, u), dtype=float)
    return np.broadcast_to(f, (op.interior_size,))


def _lu_solve_checked(system, rhs, step):
    """Dense LU with partial pivoting; rejects singular or tiny pivots."""
    try:
        lu, piv = lu_factor(system, check_finite=False)
    except Exception as exc:
        raise SolverFailure(step, f"LU factorisation failed: {exc}") from exc
    scale = float(np.abs(system).max())
    pivot_min = float(np.abs(np.diag(lu)).min())
    if not np.isfinite(pivot_min) or pivot_min <= PIVOT_RTOL * scale:
        raise SolverFailure(step, "singular or ill-conditioned time-step system")
    out = lu_solve((lu, piv), rhs, check_finite=False)
    if not np.isfinite(out).all():
        raise SolverFailure(step, "non-finite solution from linear solve")
    return out


def _history_weights(b, n):
    """Telescoped weights multiplying the states at nodes ``0..n``."""
    w = np.empty(n + 1)
    w[0] = b[n]
    if n > 0:
        w[1:] = (b[:n] - b[1 : n + 1])[::-1]
    return w


def coarse_step(history, op, grids, problem, step_index=None):
    """One semi-implicit L1 step on the coarse grid.

    ``history`` holds the states at coarse nodes ``0..n``; returns the
    state at node ``n + 1``.  The diffusion matrix and the source are
    frozen at ``(U_n, T_n)``, so the quasilinear problem costs one dense
    solve per step.
    """
    states = np.asarray(history, dtype=float)
    if states.ndim == 1:
        states = states[None, :]
    if states.ndim != 2 or states.shape[0] < 1 or states.shape[1] != op.interior_size:
        raise ValueError("history must be a nonempty stack of interior-node states")
    n = states.shape[0] - 1
    if step_index is None:
        step_index = n
    alpha = problem.alpha
    b = weights_for(alpha).on_grid(1, n + 2)
    w = _history_weights(b, n)
    t_n = n * grids.dT
    u_n = states[n]
    gam = grids.dT**alpha * gamma_2_minus(alpha)
    a_mat = assemble_diffusion(op, u_n, t_n, problem)
    rhs = w @ states + gam * _source_values(problem, op, u_n, t_n)
    system = _eye(op.interior_size) - gam * a_mat
    return _lu_solve_checked(system, rhs, step_index)


def run_coarse(problem, op, grids):
    """Sequential coarse trajectory over all coarse nodes."""
    traj = np.empty((grids.nt + 1, op.interior_size))
    traj[0] = initial_state(problem, op)
    for n in range(grids.nt):
        traj[n + 1] = coarse_step(traj[: n + 1], op, grids, problem, step_index=n)
    return traj


def _coarse_contribution(wt, hist, n, m, alpha):
    """History-side right-hand terms of the fine march, one row per substep.

    Row ``r-1`` carries the coarse-history bracket for target node
    ``(n, r)``: fractional-index weights applied to the coarse state
    increments, ``-m^-alpha sum_i b_{n-i+r/m} (U_i - U_{i-1})``.  The
    weight ``b_{(n-i)m+r over m}`` is a plain reshape of the cached weight
    grid, so the whole bracket is one matrix product.
    """
    ni = hist.shape[1]
    if n == 0:
        return np.zeros((m, ni))
    bq = wt.on_grid(m, n * m + 1)
    picks = bq[1 : n * m + 1].reshape(n, m)  # picks[j, r-1] = b_{(j m + r)/m}
    increments = hist[1:] - hist[:-1]
    return -(float(m) ** (-alpha)) * (picks.T @ increments[::-1])


def fine_propagate(start, coarse_history, op, grids, problem):
    """March the hybrid scheme across one coarse interval.

    ``start`` is the state at coarse node ``n`` and must equal the last
    entry of ``coarse_history`` (states at nodes ``0..n``).  Returns
    ``(endpoint, fine_path)`` where ``fine_path[r-1]`` is the state at fine
    node ``(n, r)`` and ``endpoint`` is the state at coarse node ``n + 1``.

    Only the coarse history plus the current interval's fine states enter
    each substep, which is what makes intervals independent of each other
    and safe to propagate concurrently.
    """
    hist = np.asarray(coarse_history, dtype=float)
    if hist.ndim == 1:
        hist = hist[None, :]
    start = np.asarray(start, dtype=float)
    if hist.shape[1] != op.interior_size or start.shape != (op.interior_size,):
        raise ValueError("states must be vectors of interior-node values")
    n = hist.shape[0] - 1
    scale = max(1.0, float(np.abs(start).max()))
    if float(np.abs(hist[n] - start).max()) > START_MISMATCH_TOL * scale:
        raise ValueError("start state disagrees with the last coarse history entry")

    m = grids.m
    alpha = problem.alpha
    wt = weights_for(alpha)
    rows = wt.fine_rows(m)
    contrib = _coarse_contribution(wt, hist, n, m, alpha)
    gam = grids.dt**alpha * gamma_2_minus(alpha)
    eye = _eye(op.interior_size)
    base_t = n * grids.dT

    path = np.empty((m + 1, op.interior_size))
    path[0] = start
    for r in range(1, m + 1):
        t_prev = base_t + (r - 1) * grids.dt
        u_prev = path[r - 1]
        a_mat = assemble_diffusion(op, u_prev, t_prev, problem)
        rhs = (
            np.einsum("j,js->s", rows[r - 1], path[:r])
            + gam * _source_values(problem, op, u_prev, t_prev)
            + contrib[r - 1]
        )
        path[r] = _lu_solve_checked(eye - gam * a_mat, rhs, (n, r))
    return path[m].copy(), path[1:].copy()


def fine_sweep_intervals(u_nodes, n_lo, n_hi, op, grids, problem):
    """Fine endpoints for the intervals ``n_lo..n_hi-1``, marched together.

    Per-interval arithmetic matches :func:`fine_propagate`; the intervals
    are independent, so stacking them only batches the per-substep dense
    solves.  Results do not depend on how intervals are grouped, which
    keeps the parallel driver deterministic for any thread count.
    """
    U = np.asarray(u_nodes)
    bs = n_hi - n_lo
    if bs < 1 or n_hi > U.shape[0] - 1:
        raise ValueError("interval range outside the supplied coarse states")
    m = grids.m
    ni = op.interior_size
    npts = op.degree + 1
    alpha = problem.alpha
    wt = weights_for(alpha)
    rows = wt.fine_rows(m)
    gam = grids.dt**alpha * gamma_2_minus(alpha)

    contrib = np.empty((bs, m, ni))
    for idx, n in enumerate(range(n_lo, n_hi)):
        contrib[idx] = _coarse_contribution(wt, U[: n + 1], n, m, alpha)

    paths = np.empty((bs, m + 1, ni))
    paths[:, 0] = U[n_lo:n_hi]
    eye = _eye(ni)
    tn = np.arange(n_lo, n_hi) * grids.dT
    full = np.zeros((bs, npts))
    for r in range(1, m + 1):
        t_prev = tn + (r - 1) * grids.dt
        u_prev = paths[:, r - 1]
        full[:, 1:-1] = u_prev
        dv = np.asarray(problem.diffusion(op.nodes[None, :], t_prev[:, None], full),
                        dtype=float)
        dv = np.broadcast_to(dv, (bs, npts))
        if not np.isfinite(dv).all():
            bad = int(np.flatnonzero(~np.isfinite(dv))[0] % npts)
            raise CoefficientError(bad, "diffusion coefficient is not finite")
        a_int = ((op.d1 * dv[:, None, :]) @ op.d1)[:, 1:-1, 1:-1]
        f_vec = np.broadcast_to(
            np.asarray(problem.source(op.interior_nodes[None, :], t_prev[:, None], u_prev),
                       dtype=float),
            (bs, ni),
        )
        rhs = np.einsum("j,bjs->bs", rows[r - 1], paths[:, :r]) + gam * f_vec + contrib[:, r - 1]
        system = eye - gam * a_int
        try:
            sol = np.linalg.solve(system, rhs[:, :, None])[:, :, 0]
        except np.linalg.LinAlgError as exc:
            raise SolverFailure((n_lo, r), f"fine-sweep solve failed: {exc}") from exc
        if not np.isfinite(sol).all():
            raise SolverFailure((n_lo, r), "non-finite solution in fine sweep")
        paths[:, r] = sol
    return paths[:, m].copy()


def chain_fine(problem, op, grids):
    """Coarse-node trajectory of the fine propagator chained interval by interval.

    This is the fixed point the parareal correction converges to; it is not
    the same as :func:`run_fine_sequential`, which keeps the full fine
    history rather than the coarse-compressed one.
    """
    traj = np.empty((grids.nt + 1, op.interior_size))
    traj[0] = initial_state(problem, op)
    for n in range(grids.nt):
        traj[n + 1] = fine_propagate(traj[n], traj[: n + 1], op, grids, problem)[0]
    return traj


def run_fine_sequential(problem, op, grids):
    """Reference solver: L1 marching on the uniform fine grid, full history.

    Returns ``(states, seconds)`` where ``states`` are the trajectory values
    subsampled at the coarse nodes.  The history term grows with every step,
    which is exactly the quadratic-in-steps cost the parallel scheme avoids.
    """
    t0 = time.perf_counter()
    total = grids.total_fine
    ni = op.interior_size
    alpha = problem.alpha
    b = weights_for(alpha).on_grid(1, total + 1)
    dflip = np.ascontiguousarray((b[:-1] - b[1:])[::-1])
    gam = grids.dt**alpha * gamma_2_minus(alpha)
    eye = _eye(ni)

    hist = np.empty((total + 1, ni))
    hist[0] = initial_state(problem, op)
    for jj in range(1, total + 1):
        t_prev = (jj - 1) * grids.dt
        u_prev = hist[jj - 1]
        a_mat = assemble_diffusion(op, u_prev, t_prev, problem)
        rhs_hist = b[jj - 1] * hist[0]
        if jj >= 2:
            rhs_hist = rhs_hist + dflip[total - jj + 1 :] @ hist[1:jj]
        rhs = rhs_hist + gam * _source_values(problem, op, u_prev, t_prev)
        hist[jj] = _lu_solve_checked(eye - gam * a_mat, rhs, jj - 1)
    states = hist[:: grids.m].copy()
    return states, time.perf_counter() - t0
