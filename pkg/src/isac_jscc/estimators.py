"""Optimal symbolwise estimators and per-input expected costs.

The sensing estimator s_hat*(x, z) minimizes expected state distortion
given the transmitter's view (input, feedback); the communication
estimator u_hat*(s, y) minimizes expected source distortion given the
receiver's view (state, output).  Both are Bayes estimators over the
single-letter joint law, so their costs c(x) and d(x) do not depend on
any block structure.

Argmin ties are broken by lowest index for reproducibility.  Pairs with
zero evidence probability fall back to the prior-optimal guess and are
flagged unreachable; they carry zero weight in every expectation.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .model import ChannelSpec, ConditionalDistribution, Distribution, SourceSpec

POSTERIOR_TOL = 1e-10


@dataclass(frozen=True)
class PosteriorTable:
    """P_{S|XZ}(s|x, z), shape (X, Z, S); unreachable marks zero-evidence pairs."""

    values: np.ndarray
    unreachable: np.ndarray  # bool, shape (X, Z)

    def __post_init__(self):
        self.values.setflags(write=False)
        self.unreachable.setflags(write=False)


@dataclass(frozen=True)
class EstimatorTable:
    """Deterministic estimator maps with their per-input expected costs.

    sensing_map[x, z] and sensing_cost c(x) come from the sensing side;
    comm_map[s, y], comm_cost d(x) and expected_comm_distortion D_u from
    the communication side.  Either side may be absent (None).
    """

    sensing_map: np.ndarray | None = None
    sensing_cost: np.ndarray | None = None
    sensing_unreachable: np.ndarray | None = None
    comm_map: np.ndarray | None = None
    comm_cost: np.ndarray | None = None
    comm_unreachable: np.ndarray | None = None
    expected_comm_distortion: float | None = None


def posterior(spec: ChannelSpec) -> PosteriorTable:
    """Bayes posterior of the state given (input, feedback)."""
    p_z = spec.p_z_given_sx()                      # (S, X, Z)
    prior = spec.state_prior.probs                 # (S,)
    joint = prior[:, None, None] * p_z             # P_S(s) P_{Z|SX}(z|s,x)
    evidence = joint.sum(axis=0)                   # (X, Z)
    unreachable = evidence <= 0.0
    post = np.empty((spec.n_inputs, spec.n_feedback, spec.n_states))
    safe = np.where(unreachable, 1.0, evidence)
    post[:] = np.moveaxis(joint, 0, -1) / safe[:, :, None]
    post[unreachable] = prior                      # vacuous update: keep the prior
    return PosteriorTable(values=post, unreachable=unreachable)


def sensing_estimator(spec: ChannelSpec) -> EstimatorTable:
    """Distortion-minimizing state estimator and its cost c(x)."""
    post = posterior(spec)
    # expected distortion of guessing s' at each (x, z)
    risk = post.values @ spec.state_distortion     # (X, Z, S')
    s_map = np.argmin(risk, axis=2).astype(np.int64)
    # c(x) = E[d(S, s_hat*(x, Z)) | X = x] under P_S P_{Z|SX}
    p_z = spec.p_z_given_sx()                      # (S, X, Z)
    prior = spec.state_prior.probs
    d_chosen = spec.state_distortion[:, s_map]     # (S, X, Z)
    c = np.einsum("s,sxz,sxz->x", prior, p_z, d_chosen)
    return EstimatorTable(sensing_map=s_map, sensing_cost=c,
                          sensing_unreachable=post.unreachable)


def comm_estimator(spec: ChannelSpec, source: SourceSpec,
                   p_x_given_u: ConditionalDistribution) -> EstimatorTable:
    """Optimal source reconstruction u_hat*(s, y), cost d(x), and total D_u.

    d(x) is a functional of the encoder kernel P_{X|U}: the receiver
    posterior P_{U|YS} is induced by P_U P_{X|U} P_S P_{YZ|SX}.
    """
    p_u = source.prior.probs                        # (U,)
    k = p_x_given_u.kernel                          # (U, X)
    p_y = spec.p_y_given_sx()                       # (S, X, Y)
    prior_s = spec.state_prior.probs                # (S,)
    # joint over (u, x, s, y)
    joint = (p_u[:, None, None, None] * k[:, :, None, None]
             * prior_s[None, None, :, None] * p_y[None, :, :].transpose(0, 2, 1, 3))
    # note: p_y transposed to (1, X, S, Y) alignment
    joint_usy = joint.sum(axis=1)                   # (U, S, Y)
    evidence = joint_usy.sum(axis=0)                # (S, Y)
    unreachable = evidence <= 0.0
    safe = np.where(unreachable, 1.0, evidence)
    p_u_given_sy = np.moveaxis(joint_usy, 0, -1) / safe[:, :, None]   # (S, Y, U)
    p_u_given_sy[unreachable] = p_u
    risk = p_u_given_sy @ source.source_distortion  # (S, Y, U')
    u_map = np.argmin(risk, axis=2).astype(np.int64)

    # d(x) = E[d(U, u_hat*(S, Y)) | X = x]
    d_of_pair = source.source_distortion[:, u_map]  # (U, S, Y)
    joint_x = joint                                  # (U, X, S, Y)
    p_x = p_u @ k                                    # (X,)
    num = np.einsum("uxsy,usy->x", joint_x, d_of_pair)
    d_cost = np.where(p_x > 0.0, num / np.where(p_x > 0.0, p_x, 1.0), 0.0)
    # unreached inputs: condition on X=x with U ~ P_U (weight-zero convention)
    if np.any(p_x <= 0.0):
        cond = (p_u[:, None, None, None] * prior_s[None, None, :, None]
                * p_y[None, :, :].transpose(0, 2, 1, 3))
        fallback = np.einsum("uxsy,usy->x", cond, d_of_pair)
        d_cost = np.where(p_x > 0.0, d_cost, fallback)
    total = float(p_x @ d_cost)
    return EstimatorTable(comm_map=u_map, comm_cost=d_cost,
                          comm_unreachable=unreachable,
                          expected_comm_distortion=total)


def expected_sensing_distortion(spec: ChannelSpec, p_x: Distribution,
                                table: EstimatorTable | None = None) -> float:
    """D_s = sum_x P_X(x) c(x)."""
    if table is None or table.sensing_cost is None:
        table = sensing_estimator(spec)
    return float(p_x.probs @ table.sensing_cost)


def export_estimator_csv(table: EstimatorTable, path):
    """One row per (x, z) and/or (s, y) pair, for manual inspection."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        if table.sensing_map is not None:
            w.writerow(["side", "x", "z", "s_hat", "unreachable"])
            X, Z = table.sensing_map.shape
            for x in range(X):
                for z in range(Z):
                    w.writerow(["sensing", x, z, int(table.sensing_map[x, z]),
                                int(table.sensing_unreachable[x, z])])
            w.writerow(["side", "x", "c(x)", "", ""])
            for x in range(X):
                w.writerow(["sensing_cost", x, f"{table.sensing_cost[x]:.12g}", "", ""])
        if table.comm_map is not None:
            w.writerow(["side", "s", "y", "u_hat", "unreachable"])
            S, Y = table.comm_map.shape
            for s in range(S):
                for y in range(Y):
                    w.writerow(["comm", s, y, int(table.comm_map[s, y]),
                                int(table.comm_unreachable[s, y])])
            w.writerow(["side", "x", "d(x)", "", ""])
            for x in range(len(table.comm_cost)):
                w.writerow(["comm_cost", x, f"{table.comm_cost[x]:.12g}", "", ""])
