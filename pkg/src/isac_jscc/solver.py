"""Capacity-distortion-cost and rate-distortion solvers.

The communication objective I(X;Y|S) equals I(X; (S,Y)) because the
state is independent of the input, so the conditional-MI maximization
reduces to plain channel capacity of the compound channel
W(s,y|x) = P_S(s) P_{Y|SX}(y|s,x).  Sensing-distortion and cost budgets
are linear in P_X, handled by Lagrangian tilting of the Blahut-Arimoto
update with a bisection search per active multiplier (complementary
slackness: a constraint already satisfied at multiplier 0 stays at 0).

Logs are base 2 throughout; 0*log(0) := 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import Infeasible, NotConverged
from .estimators import sensing_estimator
from .model import ChannelSpec, Distribution, SourceSpec

LN2 = np.log(2.0)
BA_GAP_TOL = 1e-9          # bits; inner Blahut-Arimoto stopping gap
BA_MAX_ITER = 10_000
CONSTRAINT_TOL = 1e-6      # budget residual declared converged below this
FLOOR_SLACK = 1e-9         # strict infeasibility margin below the floor


@dataclass(frozen=True)
class ConstraintSet:
    """Budgets for the tradeoff problem; None means unconstrained."""

    sensing_budget: float | None = None
    cost_budget: float | None = None
    comm_budget: float | None = None

    def __post_init__(self):
        for name in ("sensing_budget", "cost_budget", "comm_budget"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ValueError(f"{name} must be >= 0, got {v}")


@dataclass
class SolverResult:
    value: float                      # bits per channel use
    distribution: np.ndarray          # maximizing P_X (or RD kernel)
    multipliers: tuple[float, float]  # (lambda_s, lambda_B), bits per unit
    iterations: int
    converged: bool
    achieved_distortion: float | None = None
    achieved_cost: float | None = None


@dataclass
class TradeoffPoint:
    d_s: float
    b: float | None
    c_bits: float
    result: SolverResult | None = None
    error: str | None = None


@dataclass
class TradeoffCurve:
    points: list[TradeoffPoint]
    monotone: bool = True
    concave: bool = True
    check_slack: float = 1e-6

    def to_csv(self, fileobj):
        fileobj.write("d_s,b,c_bits\n")
        for p in self.points:
            b = "" if p.b is None else f"{p.b:.12g}"
            fileobj.write(f"{p.d_s:.12g},{b},{p.c_bits:.12g}\n")


def mutual_information_bits(p_x: np.ndarray, w: np.ndarray) -> float:
    """I(X;Y) in bits for input p_x and row-stochastic channel w."""
    m = p_x @ w
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where((w > 0) & (m[None, :] > 0), w / m[None, :], 1.0)
        kl = np.sum(np.where(w > 0, w * np.log(ratio), 0.0), axis=1)
    return float(p_x @ kl) / LN2


def compound_channel(spec: ChannelSpec) -> np.ndarray:
    """W(s,y|x) = P_S(s) P_{Y|SX}(y|s,x), flattened to shape (X, S*Y)."""
    p_y = spec.p_y_given_sx()                       # (S, X, Y)
    w = spec.state_prior.probs[:, None, None] * p_y  # (S, X, Y)
    return np.ascontiguousarray(np.moveaxis(w, 1, 0).reshape(spec.n_inputs, -1))


def _ba_tilted(w, tilt_bits, p_init=None, gap_tol=BA_GAP_TOL, max_iter=BA_MAX_ITER):
    """Maximize I(X;Y) - tilt.P over the input simplex by tilted BA.

    Returns (p, objective_bits, upper_bound_bits, iterations).  The
    upper bound is the Csiszar bound max_x F(x) evaluated at the last
    iterate; objective is the primal value sum_x p(x) F(x).
    """
    n = w.shape[0]
    if p_init is None:
        p = np.full(n, 1.0 / n)
    else:
        # keep a trace of mass everywhere: the multiplicative update can
        # never regrow a coordinate that has underflowed to exactly zero
        p = (p_init + 1e-12) / (1.0 + n * 1e-12)
    tilt = tilt_bits * LN2
    logw = np.where(w > 0, np.log(np.where(w > 0, w, 1.0)), 0.0)
    f = np.zeros(n)
    it = 0
    for it in range(1, max_iter + 1):
        m = p @ w
        with np.errstate(divide="ignore"):
            logm = np.where(m > 0, np.log(np.where(m > 0, m, 1.0)), 0.0)
        f = np.sum(np.where(w > 0, w * (logw - logm[None, :]), 0.0), axis=1) - tilt
        lower = float(p @ f)
        upper = float(f.max())
        if upper - lower < gap_tol * LN2:
            break
        with np.errstate(divide="ignore"):
            t = np.where(p > 0, np.log(np.where(p > 0, p, 1.0)), -np.inf) + f
        t -= t.max()
        p = np.exp(t)
        p /= p.sum()
    else:
        if p_init is not None and max_iter > 1:
            # warm start did not converge; retry cold from uniform
            return _ba_tilted(w, tilt_bits, p_init=None,
                              gap_tol=gap_tol, max_iter=max_iter)
    return p, lower / LN2, upper / LN2, it


def _floor_value(costs, budgets_cost, B):
    """Minimum of sum p(x) costs(x) over the simplex with E[b] <= B.

    Exact by vertex inspection: point masses plus two-point mixtures on
    the cost boundary.
    """
    n = len(costs)
    best = np.inf
    feas = [x for x in range(n) if B is None or budgets_cost[x] <= B + 1e-15]
    for x in feas:
        best = min(best, costs[x])
    if B is not None:
        for x1 in range(n):
            for x2 in range(n):
                b1, b2 = budgets_cost[x1], budgets_cost[x2]
                if b1 < B < b2:
                    t = (b2 - B) / (b2 - b1)
                    best = min(best, t * costs[x1] + (1 - t) * costs[x2])
    if not np.isfinite(best):
        raise Infeasible(f"cost budget B={B} below min_x b(x)={budgets_cost.min()}")
    return float(best)


def sensing_floor(spec: ChannelSpec, B: float | None = None,
                  comm_costs: np.ndarray | None = None):
    """(D_s_min(B), D_u_min(B)); the latter only if d(x) costs are given.

    d(x) depends on the encoder kernel (see estimators), so the caller
    supplies it explicitly for the D_u floor.
    """
    c = sensing_estimator(spec).sensing_cost
    ds_min = _floor_value(c, spec.cost, B)
    du_min = None
    if comm_costs is not None:
        du_min = _floor_value(np.asarray(comm_costs, dtype=float), spec.cost, B)
    return ds_min, du_min


def _solve_tilted(w, c, b, lam_s, lam_b, p_init=None):
    p, lower, upper, it = _ba_tilted(w, lam_s * c + lam_b * b, p_init=p_init)
    i_bits = mutual_information_bits(p, w)
    return p, i_bits, float(p @ c), float(p @ b), upper, it


def _bisect_multiplier(w, cost_vec, budget, other_tilt, p_start=None,
                       max_doublings=60, max_bisect=200):
    """Find lambda >= 0 so the tilted maximizer meets E[cost_vec] <= budget.

    other_tilt is a fixed additional tilt vector (bits).  Returns
    (lambda, p_feasible, p_infeasible_or_None, iterations).
    """
    zeros = np.zeros_like(cost_vec)

    def solve(lam, p0):
        p, _, up, it = _ba_tilted(w, lam * cost_vec + other_tilt, p_init=p0)
        return p, float(p @ cost_vec), it

    total_it = 0
    p0, e0, it = solve(0.0, p_start)
    total_it += it
    if e0 <= budget + 1e-12:
        return 0.0, p0, None, total_it
    lo, hi = 0.0, 1.0
    p_lo, e_lo = p0, e0
    p_hi, e_hi = p0, e0
    for _ in range(max_doublings):
        p_hi, e_hi, it = solve(hi, p_hi)
        total_it += it
        if e_hi <= budget:
            break
        lo, p_lo, e_lo = hi, p_hi, e_hi
        hi *= 2.0
    else:
        raise NotConverged(f"multiplier bracketing failed (budget={budget})")
    for _ in range(max_bisect):
        if abs(e_hi - budget) <= 1e-13 or (hi - lo) <= 1e-13 * max(1.0, hi):
            break
        mid = 0.5 * (lo + hi)
        p_mid, e_mid, it = solve(mid, p_hi)
        total_it += it
        if e_mid <= budget:
            hi, p_hi, e_hi = mid, p_mid, e_mid
        else:
            lo, p_lo, e_lo = mid, p_mid, e_mid
    return hi, p_hi, p_lo if e_lo > budget else None, total_it


def _refine_on_segment(p_hi, p_lo, cost_vec, budget):
    """Mix the two bracket iterates to sit exactly on the budget.

    On an affine face of the tradeoff curve the bisection brackets two
    maximizers of the same Lagrangian; their mixture is optimal at the
    exact budget (mutual information is concave, constraints linear).
    """
    if p_lo is None:
        return p_hi
    e_hi = float(p_hi @ cost_vec)
    e_lo = float(p_lo @ cost_vec)
    if e_lo <= e_hi + 1e-15 or budget <= e_hi:
        return p_hi
    theta = (budget - e_hi) / (e_lo - e_hi)
    theta = min(max(theta, 0.0), 1.0)
    return (1 - theta) * p_hi + theta * p_lo


def capacity_unconstrained(spec: ChannelSpec, B: float | None = None) -> SolverResult:
    """C_NoEst(B): capacity of the SDMC under the cost budget only."""
    w = compound_channel(spec)
    b = spec.cost
    if B is not None and B < float(b.min()) - FLOOR_SLACK:
        raise Infeasible(f"B={B} below min_x b(x)={b.min()}")
    if B is None:
        p, lower, upper, it = _ba_tilted(w, np.zeros(spec.n_inputs))
        lam_b = 0.0
    else:
        lam_b, p, p_lo, it = _bisect_multiplier(w, b, B, np.zeros(spec.n_inputs))
        p = _refine_on_segment(p, p_lo, b, B)
        upper = None
    value = mutual_information_bits(p, w)
    c = sensing_estimator(spec).sensing_cost
    converged = it < BA_MAX_ITER * 50
    return SolverResult(value=value, distribution=p, multipliers=(0.0, lam_b),
                        iterations=it, converged=converged,
                        achieved_distortion=float(p @ c),
                        achieved_cost=float(p @ b))


def saturation_distortion(spec: ChannelSpec, B: float | None = None) -> float:
    """D_s_max(B): sensing distortion of the unconstrained capacity maximizer."""
    return capacity_unconstrained(spec, B).achieved_distortion


def capacity_distortion_cost(spec: ChannelSpec,
                             constraints: ConstraintSet) -> SolverResult:
    """C_inf(D_s, B) = max I(X;Y|S) s.t. E[c(X)] <= D_s, E[b(X)] <= B."""
    d_s = constraints.sensing_budget
    B = constraints.cost_budget
    w = compound_channel(spec)
    c = sensing_estimator(spec).sensing_cost
    b = spec.cost
    if d_s is None:
        return capacity_unconstrained(spec, B)
    ds_min, _ = sensing_floor(spec, B)
    if d_s < ds_min - FLOOR_SLACK:
        raise Infeasible(f"D_s={d_s} below D_s_min(B)={ds_min}")

    # exactly at the floor: the optimum lives on the min-cost face
    if B is None and d_s <= ds_min + 1e-12:
        support = np.flatnonzero(c <= ds_min + 1e-12)
        p_sub, _, _, it = _ba_tilted(w[support], np.zeros(len(support)))
        p = np.zeros(spec.n_inputs)
        p[support] = p_sub
        return SolverResult(value=mutual_information_bits(p, w), distribution=p,
                            multipliers=(np.inf, 0.0), iterations=it, converged=True,
                            achieved_distortion=float(p @ c),
                            achieved_cost=float(p @ b))

    total_it = 0

    def inner(lam_b, p0=None):
        """Meet the sensing budget at a fixed cost multiplier."""
        lam_s, p_hi, p_lo, it = _bisect_multiplier(
            w, c, d_s, lam_b * b, p_start=p0)
        p = _refine_on_segment(p_hi, p_lo, c, d_s)
        return lam_s, p, it

    if B is None or B == np.inf:
        lam_s, p, it = inner(0.0)
        lam_b = 0.0
        total_it += it
    else:
        if B < float(b.min()) - FLOOR_SLACK:
            raise Infeasible(f"B={B} below min_x b(x)={b.min()}")
        lam_s, p, it = inner(0.0)
        total_it += it
        lam_b = 0.0
        if float(p @ b) > B + 1e-12:
            # outer bisection on the cost multiplier
            lo, hi = 0.0, 1.0
            for _ in range(60):
                lam_s, p, it = inner(hi)
                total_it += it
                if float(p @ b) <= B:
                    break
                lo = hi
                hi *= 2
            else:
                raise NotConverged("cost multiplier bracketing failed")
            for _ in range(100):
                if abs(float(p @ b) - B) <= CONSTRAINT_TOL * 1e-3:
                    break
                mid = 0.5 * (lo + hi)
                lam_s_m, p_m, it = inner(mid)
                total_it += it
                if float(p_m @ b) <= B:
                    hi, p, lam_s = mid, p_m, lam_s_m
                else:
                    lo = mid
            lam_b = hi

    ach_d = float(p @ c)
    ach_b = float(p @ b)
    converged = (ach_d <= d_s + CONSTRAINT_TOL
                 and (B is None or ach_b <= B + CONSTRAINT_TOL))
    return SolverResult(value=mutual_information_bits(p, w), distribution=p,
                        multipliers=(lam_s, lam_b), iterations=total_it,
                        converged=converged, achieved_distortion=ach_d,
                        achieved_cost=ach_b)


def sweep_curve(spec: ChannelSpec, B: float | None, grid,
                check_slack: float = 1e-6) -> TradeoffCurve:
    """One capacity point per D_s value, with curve-shape checks.

    Values above the saturation distortion clamp to C_NoEst(B).
    Per-point solver errors are recorded and the sweep continues.
    """
    grid = sorted(float(g) for g in grid)
    if not grid:
        return TradeoffCurve(points=[])
    unconstrained = capacity_unconstrained(spec, B)
    d_s_max = unconstrained.achieved_distortion
    points = []
    for g in grid:
        if g >= d_s_max:
            points.append(TradeoffPoint(d_s=g, b=B, c_bits=unconstrained.value,
                                        result=unconstrained))
            continue
        try:
            r = capacity_distortion_cost(
                spec, ConstraintSet(sensing_budget=g, cost_budget=B))
            points.append(TradeoffPoint(d_s=g, b=B, c_bits=r.value, result=r))
        except (Infeasible, NotConverged) as e:
            points.append(TradeoffPoint(d_s=g, b=B, c_bits=np.nan, error=str(e)))
    vals = [p.c_bits for p in points if p.error is None]
    monotone = all(v2 >= v1 - check_slack for v1, v2 in zip(vals, vals[1:]))
    concave = True
    xs = [p.d_s for p in points if p.error is None]
    for i in range(1, len(vals) - 1):
        if (abs((xs[i] - xs[i - 1]) - (xs[i + 1] - xs[i])) < 1e-12
                and vals[i] < 0.5 * (vals[i - 1] + vals[i + 1]) - check_slack):
            concave = False
    return TradeoffCurve(points=points, monotone=monotone, concave=concave,
                         check_slack=check_slack)


# --- rate-distortion ------------------------------------------------------

def _rd_at_slope(p_u, d, slope_bits, q_init=None, max_iter=BA_MAX_ITER):
    """Blahut fixed point at a fixed (negative) distortion slope.

    Returns (kernel, q_out, rate_bits, distortion, iterations).
    """
    n_u, n_v = d.shape
    q = np.full(n_v, 1.0 / n_v) if q_init is None else q_init.copy()
    # per-row exponent shift: cancels in the conditional, avoids underflow
    shifted = slope_bits * LN2 * (d - d.min(axis=1, keepdims=True))
    a = np.exp(shifted)                   # (U, V); row max is exactly 1
    cond = None
    it = 0
    for it in range(1, max_iter + 1):
        t = q[None, :] * a
        z = t.sum(axis=1, keepdims=True)
        cond = t / z
        # Blahut multiplier: q_new = q * c; at the fixed point c <= 1
        # with equality on the support, and log(max c) bounds the gap.
        c = p_u @ (a / z)
        q = q * c
        q /= q.sum()
        if float(c.max()) - 1.0 < 1e-12:
            break
    dist = float(np.einsum("u,uv,uv->", p_u, cond, d))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where((cond > 0) & (q[None, :] > 0), cond / q[None, :], 1.0)
        rate = float(np.einsum("u,uv->", p_u, np.where(cond > 0, cond * np.log(ratio), 0.0))) / LN2
    return cond, q, max(rate, 0.0), dist, it


def rate_distortion(source: SourceSpec, d_u: float) -> SolverResult:
    """Classical single-constraint R(D) by BA with slope bisection."""
    if d_u < 0:
        raise Infeasible(f"distortion budget must be >= 0, got {d_u}")
    p_u = source.prior.probs
    d = source.source_distortion
    d_min = float(p_u @ d.min(axis=1))
    d_max_zero = float(min(p_u @ d[:, v] for v in range(d.shape[1])))
    if d_u >= d_max_zero - 1e-15:
        v0 = int(np.argmin([p_u @ d[:, v] for v in range(d.shape[1])]))
        kernel = np.zeros_like(d)
        kernel[:, v0] = 1.0
        return SolverResult(value=0.0, distribution=kernel, multipliers=(0.0, 0.0),
                            iterations=0, converged=True,
                            achieved_distortion=d_max_zero)
    if d_u < d_min - FLOOR_SLACK:
        raise Infeasible(f"D={d_u} below minimum achievable distortion {d_min}")
    if d_u <= d_min + 1e-12:
        # lossless limit: deterministic row-argmin kernel (lowest index)
        v_star = np.argmin(d, axis=1)
        kernel = np.zeros_like(d)
        kernel[np.arange(d.shape[0]), v_star] = 1.0
        q = p_u @ kernel
        qpos = q[q > 0]
        rate = float(-np.sum(qpos * np.log(qpos))) / LN2
        return SolverResult(value=rate, distribution=kernel,
                            multipliers=(np.inf, 0.0), iterations=0, converged=True,
                            achieved_distortion=d_min)

    total_it = 0
    lo, hi = -1.0, 0.0          # slope in bits per unit distortion
    cond, q, r_lo, dist_lo, it = _rd_at_slope(p_u, d, lo)
    total_it += it
    for _ in range(60):
        if dist_lo <= d_u:
            break
        hi = lo
        lo *= 2.0
        cond, q, r_lo, dist_lo, it = _rd_at_slope(p_u, d, lo, q_init=q)
        total_it += it
    else:
        raise NotConverged("slope bracketing failed")
    # invariant: dist(lo) <= d_u <= dist(hi)
    best = (cond, r_lo, dist_lo, lo)
    worse = None                # infeasible bracket: dist > d_u
    for _ in range(200):
        if abs(best[2] - d_u) <= 1e-12 or (hi - lo) <= 1e-14 * max(1.0, -lo):
            break
        mid = 0.5 * (lo + hi)
        cond, q, r_m, dist_m, it = _rd_at_slope(p_u, d, mid, q_init=q)
        total_it += it
        if dist_m <= d_u:
            lo = mid
            best = (cond, r_m, dist_m, mid)
        else:
            hi = mid
            worse = (cond, dist_m)
    cond, rate, dist, slope = best
    if worse is not None and dist < d_u - 1e-12 and worse[1] > d_u:
        # affine stretch of R(D): mix the bracket kernels to sit exactly
        # on the budget; distortion is linear and I convex in the kernel.
        theta = (d_u - dist) / (worse[1] - dist)
        cond = (1 - theta) * cond + theta * worse[0]
        q = p_u @ cond
        dist = float(np.einsum("u,uv,uv->", p_u, cond, d))
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where((cond > 0) & (q[None, :] > 0), cond / q[None, :], 1.0)
            rate = float(np.einsum(
                "u,uv->", p_u, np.where(cond > 0, cond * np.log(ratio), 0.0))) / LN2
        rate = max(rate, 0.0)
    converged = dist <= d_u + CONSTRAINT_TOL
    return SolverResult(value=rate, distribution=cond,
                        multipliers=(-slope, 0.0), iterations=total_it,
                        converged=converged, achieved_distortion=dist)
