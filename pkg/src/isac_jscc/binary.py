"""Closed forms for the binary Y = S*X channel with Bernoulli(q) state.

Source bits are Bernoulli with P_U(0) = p; the encoder is the
symbolwise kernel P_{X|U}(0|0) = a, P_{X|U}(0|1) = b with input
marginal alpha = P_X(0) = p*a + (1-p)*b.  Everything here is exact
algebra plus a brute-force parametric grid oracle used to cross-check
the displayed formulas.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NoFeasiblePoint, OutOfRegion


def h_b(t: float) -> float:
    """Binary entropy in bits, with 0*log(0) := 0 and exact endpoints."""
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"binary entropy argument {t} outside [0, 1]")
    if t == 0.0 or t == 1.0:
        return 0.0
    return float(-(t * np.log2(t)) - ((1.0 - t) * np.log2(1.0 - t)))


@dataclass(frozen=True)
class BinaryParams:
    """Configuration (p, q) and optional encoder parameters (a, b)."""

    p: float
    q: float
    a: float | None = None
    b: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.p <= 0.5:
            raise DomainError(f"p must lie in [0, 1/2], got {self.p}")
        if not 0.0 <= self.q <= 0.5:
            raise DomainError(f"q must lie in [0, 1/2], got {self.q}")
        for name in ("a", "b"):
            v = getattr(self, name)
            if v is not None and not 0.0 <= v <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {v}")

    @property
    def alpha(self) -> float | None:
        if self.a is None or self.b is None:
            return None
        return self.p * self.a + (1.0 - self.p) * self.b


def encoder_operating_point(params: BinaryParams) -> tuple[float, float, float]:
    """(D_s, D_u, R) achieved by the symbolwise encoder (a, b)."""
    p, q, a, b = params.p, params.q, params.a, params.b
    if a is None or b is None:
        raise DomainError("encoder parameters a, b are required")
    alpha = params.alpha
    d_s = alpha * min(q, 1.0 - q)
    d_u = (1.0 - q) * min(p, 1.0 - p) + q * (1.0 - p) * b + q * p * (1.0 - a)
    r = q * h_b(alpha) - p * q * h_b(a) - (1.0 - p) * q * h_b(b)
    return d_s, d_u, r


def closed_form_C(params: BinaryParams, d_s: float) -> float:
    """Capacity-distortion tradeoff C(D_s) = q * H_b(D_s / q) in bits."""
    q = params.q
    if q == 0.0:
        if d_s < 0.0:
            raise DomainError(f"D_s must be >= 0, got {d_s}")
        return 0.0
    t = d_s / q
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"D_s/q = {t} outside [0, 1]")
    return q * h_b(t)


def rd_arguments(params: BinaryParams, d_u: float, d_s: float):
    """The two correction-term entropy arguments of the rate formula."""
    p, q = params.p, params.q
    a1 = (d_s - d_u + p) / (2.0 * p * q) if p * q > 0 else np.nan
    a2 = (d_u + d_s - p) / (2.0 * (1.0 - p) * q) if (1.0 - p) * q > 0 else np.nan
    return a1, a2


def in_rd_region(params: BinaryParams, d_u: float, d_s: float) -> bool:
    """Whether (D_u, D_s) lies in the validity region of the rate formula."""
    if params.q == 0.0 or params.p == 0.0:
        return False
    a1, a2 = rd_arguments(params, d_u, d_s)
    return 0.0 <= a1 <= 1.0 and 0.0 <= a2 <= 1.0 and 0.0 <= d_s / params.q <= 1.0


def closed_form_R(params: BinaryParams, d_u: float, d_s: float) -> float:
    """Two-distortion rate-distortion tradeoff R(D_u, D_s) in bits."""
    p, q = params.p, params.q
    if q == 0.0:
        return 0.0
    a1, a2 = rd_arguments(params, d_u, d_s)
    if not 0.0 <= a1 <= 1.0:
        raise OutOfRegion("(D_s - D_u + p)/(2pq)", a1)
    if not 0.0 <= a2 <= 1.0:
        raise OutOfRegion("(D_u + D_s - p)/(2(1-p)q)", a2)
    return (closed_form_C(params, d_s)
            - p * q * h_b(a1)
            - (1.0 - p) * q * h_b(a2))


def parametric_oracle(params: BinaryParams, d_u: float, d_s: float,
                      grid_n: int = 1000) -> float:
    """Brute-force minimum of the parametric rate over encoder grids.

    Sweeps (a, b) on a grid_n x grid_n grid; each point induces
    alpha = p*a + (1-p)*b, D_s = alpha * min(q, 1-q) and the
    communication distortion, and is feasible when both land within
    1/grid_n of the targets.  Returns the minimum rate among feasible
    points.
    """
    if grid_n < 100:
        raise DomainError(f"grid_n must be >= 100, got {grid_n}")
    p, q = params.p, params.q
    tol = 1.0 / grid_n
    g = np.linspace(0.0, 1.0, grid_n + 1)
    a = g[:, None]
    b = g[None, :]
    alpha = p * a + (1.0 - p) * b
    ds_grid = alpha * min(q, 1.0 - q)
    du_grid = (1.0 - q) * min(p, 1.0 - p) + q * (1.0 - p) * b + q * p * (1.0 - a)
    feasible = (np.abs(ds_grid - d_s) <= tol) & (np.abs(du_grid - d_u) <= tol)
    if not feasible.any():
        raise NoFeasiblePoint(f"no grid point reaches (D_u={d_u}, D_s={d_s})")

    def hb_arr(t):
        t = np.clip(t, 0.0, 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = -np.where(t > 0, t * np.log2(np.where(t > 0, t, 1.0)), 0.0)
            out -= np.where(t < 1, (1 - t) * np.log2(np.where(t < 1, 1 - t, 1.0)), 0.0)
        return out

    rate = (q * hb_arr(alpha) - p * q * hb_arr(a) - (1.0 - p) * q * hb_arr(b))
    return float(rate[feasible].min())


def find_intersection(params: BinaryParams, tol: float = 1e-9):
    """Point where the rate and capacity tradeoff curves meet.

    Along the boundary D_u = p - D_s the second correction term
    vanishes; the remaining gap C - R = p*q*H_b(D_s/(p*q)) closes when
    the first entropy argument reaches 1.  That crossing is located by
    bisection on the argument.
    """
    p, q = params.p, params.q
    if p == 0.0:
        return 0.0, 0.0, 0.0
    if q == 0.0:
        raise DomainError("q must be positive to define the tradeoff")

    def first_arg(d_s):
        return rd_arguments(params, p - d_s, d_s)[0] - 1.0

    lo, hi = 0.0, min(q, p)            # first_arg(lo) = p/(2pq)-1 ... sign varies
    # first_arg is increasing in d_s: (2*d_s)/(2pq) - 1
    if first_arg(hi) < 0:
        raise NoFeasiblePoint("boundary never closes the rate-capacity gap")
    for _ in range(200):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if first_arg(mid) < 0:
            lo = mid
        else:
            hi = mid
    d_s = hi
    d_u = p - d_s
    return d_s, d_u, closed_form_C(params, d_s)


def figure_curves(params: BinaryParams, grid_points: int = 200):
    """(d_s, C, R-or-None) rows for the two-curve comparison plot.

    The rate curve couples D_u to the x-axis via the boundary rule
    D_u = p - D_s (vanishing second correction term), which reproduces
    the published intersection; beyond the validity region the rate
    column is None.
    """
    p, q = params.p, params.q
    d_grid = np.linspace(0.0, q * 0.5, grid_points) if grid_points > 1 else [q * 0.25]
    rows = []
    for d_s in d_grid:
        c = closed_form_C(params, d_s)
        d_u = p - d_s
        if d_u >= 0 and in_rd_region(params, d_u, d_s):
            r = closed_form_R(params, d_u, d_s)
        else:
            r = None
        rows.append((float(d_s), c, r))
    return rows
