"""L1 weights for the Caputo derivative and the discrete operators built on them.

The L1 scheme approximates the Caputo derivative of order ``alpha`` by
differentiating the piecewise-linear interpolant of the samples.  On a
uniform grid this yields the weights ``b_j = (j+1)^(1-alpha) - j^(1-alpha)``.
The two-level variant used by the parallel-in-time solver keeps the history
on a coarse grid of step ``dT`` while the current interval is resolved with
a fine step ``dt = dT/m``; the cross terms then need the same weight
function at the fractional indices ``q/m``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "FractionalWeights",
    "TimeGrids",
    "caputo_power",
    "discrete_caputo_coarse",
    "discrete_caputo_hybrid",
    "gamma_2_minus",
    "l1_weight",
    "weights_for",
]

# relative tolerance for the coarse/fine continuity check of the hybrid operator
CONTINUITY_RTOL = 1e-9


def _check_alpha(alpha):
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"fractional order must lie in (0, 1], got {alpha}")


def gamma_2_minus(alpha):
    """Gamma(2 - alpha), evaluated on the log scale."""
    return math.exp(math.lgamma(2.0 - alpha))


def l1_weight(x, alpha):
    """L1 weight ``b_x = (x+1)^(1-alpha) - x^(1-alpha)`` for real index ``x >= 0``.

    ``alpha == 1`` short-circuits the power formula (which degenerates to
    ``0^0``): ``b_0 = 1`` and every other weight is exactly zero, so the
    backward-difference limit holds without round-off.
    """
    if x < 0:
        raise ValueError(f"weight index must be nonnegative, got {x}")
    _check_alpha(alpha)
    if alpha == 1.0:
        return 1.0 if x == 0.0 else 0.0
    e = 1.0 - alpha
    return (x + 1.0) ** e - x ** e


@dataclass(frozen=True)
class TimeGrids:
    """Nested uniform time grids.

    ``nt`` coarse intervals of width ``dT = t_final/nt``, each subdivided
    into ``m`` fine steps of width ``dt = dT/m``.  Fine node ``(n, r)``
    sits at ``n*dT + r*dt``; ``(n, m)`` coincides with coarse node ``n+1``.
    """

    t_final: float
    nt: int
    m: int

    def __post_init__(self):
        if not self.t_final > 0:
            raise ValueError(f"final time must be positive, got {self.t_final}")
        if self.nt < 1 or self.m < 1:
            raise ValueError("grid counts nt and m must be positive integers")

    @property
    def dT(self):
        return self.t_final / self.nt

    @property
    def dt(self):
        return self.dT / self.m

    @property
    def total_fine(self):
        return self.nt * self.m

    def coarse_node(self, n):
        return n * self.dT

    def fine_node(self, n, r):
        return n * self.dT + r * self.dt


class FractionalWeights:
    """Memoized L1 weights for one fixed order.

    Scalar lookups share a dict, grid lookups (``b_{q/denom}`` for
    ``q = 0..count-1``) share read-only arrays that grow on demand.  Dict
    and array inserts are atomic and idempotent, so concurrent readers are
    safe once a value exists; populate before a parallel phase to avoid
    duplicate work.  A different order requires a new instance.
    """

    __slots__ = ("alpha", "_scalar", "_grids", "_rows")

    def __init__(self, alpha):
        _check_alpha(alpha)
        self.alpha = float(alpha)
        self._scalar = {}
        self._grids = {}
        self._rows = {}

    def value(self, x):
        """Scalar weight ``b_x``."""
        try:
            return self._scalar[x]
        except KeyError:
            w = l1_weight(x, self.alpha)
            self._scalar[x] = w
            return w

    def on_grid(self, denom, count):
        """Array of ``b_{q/denom}`` for ``q = 0..count-1`` (read-only)."""
        if denom < 1 or count < 1:
            raise ValueError("denominator and count must be positive")
        arr = self._grids.get(denom)
        if arr is None or arr.shape[0] < count:
            size = max(count, 64, 0 if arr is None else 2 * arr.shape[0])
            x = np.arange(size, dtype=float) / denom
            if self.alpha == 1.0:
                new = np.zeros(size)
                new[0] = 1.0
            else:
                e = 1.0 - self.alpha
                new = (x + 1.0) ** e - x ** e
            new.setflags(write=False)
            self._grids[denom] = new
            arr = new
        return arr[:count]

    def fine_rows(self, m):
        """Per-substep weight rows for marching one interval.

        ``rows[r-1]`` has length ``r``: entry 0 multiplies the interval
        start, entry ``j`` multiplies the ``j``-th fine state.
        """
        rows = self._rows.get(m)
        if rows is None:
            b = self.on_grid(1, m + 1)
            built = []
            for r in range(1, m + 1):
                w = np.empty(r)
                w[0] = b[r - 1]
                if r > 1:
                    j = np.arange(1, r)
                    w[1:] = b[r - j - 1] - b[r - j]
                w.setflags(write=False)
                built.append(w)
            rows = tuple(built)
            self._rows[m] = rows
        return rows


@lru_cache(maxsize=16)
def weights_for(alpha):
    """Process-wide weight table for one order, shared across solver runs."""
    return FractionalWeights(alpha)


def discrete_caputo_coarse(history, dT, alpha):
    """Discrete Caputo derivative at the last node of a uniform grid.

    ``history`` holds the samples ``y(0), y(dT), ..., y((n+1) dT)``; the
    operator evaluates at the final time.  Summation uses exact (fsum)
    accumulation with the most recent, largest-weight terms last.
    """
    h = np.asarray(history, dtype=float)
    if h.ndim != 1 or h.shape[0] < 2:
        raise ValueError("history must hold at least two samples")
    if not dT > 0:
        raise ValueError("step must be positive")
    _check_alpha(alpha)
    n = h.shape[0] - 2
    b = weights_for(alpha).on_grid(1, n + 2)
    terms = [-b[n] * h[0]]
    terms.extend(-(b[n - i] - b[n - i + 1]) * h[i] for i in range(1, n + 1))
    terms.append(h[n + 1])
    return math.fsum(terms) / dT ** alpha / gamma_2_minus(alpha)


def discrete_caputo_hybrid(coarse_history, fine_values, grids, alpha):
    """Discrete Caputo derivative at fine node ``(n, r)`` with coarse history.

    ``coarse_history`` holds ``y`` at coarse nodes ``0..n``; ``fine_values``
    holds ``y`` at fine nodes ``(n, 0)..(n, r)`` of the current interval.
    The history before the interval is differenced with the coarse step and
    fractional-index weights; the current interval uses the plain fine-grid
    weights.  For ``n == 0`` the coarse part is empty and the operator
    reduces to :func:`discrete_caputo_coarse` on the fine grid.
    """
    ch = np.asarray(coarse_history, dtype=float)
    fv = np.asarray(fine_values, dtype=float)
    if ch.ndim != 1 or ch.shape[0] < 1:
        raise ValueError("coarse history must hold the nodes 0..n")
    if fv.ndim != 1 or fv.shape[0] < 2:
        raise ValueError("fine values must hold at least nodes (n,0) and (n,1)")
    n = ch.shape[0] - 1
    r = fv.shape[0] - 1
    m = grids.m
    if not 1 <= r <= m:
        raise ValueError(f"fine index r={r} outside 1..{m}")
    if abs(fv[0] - ch[n]) > CONTINUITY_RTOL * max(1.0, abs(ch[n])):
        raise ValueError("fine_values[0] must equal the last coarse history entry")
    _check_alpha(alpha)

    wt = weights_for(alpha)
    bi = wt.on_grid(1, r + 1)
    terms = [-bi[r - 1] * fv[0]]
    terms.extend(-(bi[r - j - 1] - bi[r - j]) * fv[j] for j in range(1, r))
    terms.append(fv[r])
    fine_part = math.fsum(terms) / grids.dt ** alpha

    coarse_part = 0.0
    if n >= 1:
        bq = wt.on_grid(m, n * m + 1)
        ct = [-bq[(n - 1) * m + r] * ch[0]]
        ct.extend(
            -(bq[(n - i - 1) * m + r] - bq[(n - i) * m + r]) * ch[i]
            for i in range(1, n)
        )
        ct.append(bq[r] * ch[n])
        coarse_part = math.fsum(ct) / grids.dT ** alpha

    return (coarse_part + fine_part) / gamma_2_minus(alpha)


def caputo_power(exponent, alpha, t):
    """Analytic Caputo derivative of ``t**exponent`` (oracle for tests).

    ``d^alpha t^p = Gamma(p+1)/Gamma(p+1-alpha) * t^(p-alpha)`` for
    ``p > 0``; constants are annihilated.
    """
    _check_alpha(alpha)
    if exponent < 0:
        raise ValueError("power must be nonnegative")
    if exponent == 0:
        return 0.0
    ratio = math.exp(math.lgamma(exponent + 1.0) - math.lgamma(exponent + 1.0 - alpha))
    return ratio * t ** (exponent - alpha)
