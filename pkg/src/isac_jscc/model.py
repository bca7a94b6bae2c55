"""Finite-alphabet probability data model.

Alphabets are index-based (0..size-1); labels are cosmetic.  The channel
law is stored as the joint P_{YZ|SX}; the marginals P_{Y|SX} and
P_{Z|SX} are derived on demand so the two can never drift apart.
All stochasticity checks use absolute tolerance 1e-12.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, DomainError, ValidationError

PROB_TOL = 1e-12


def _readonly(a):
    a = np.asarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Alphabet:
    """A finite set identified with {0, ..., size-1}."""

    size: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.size < 1:
            raise DomainError(f"alphabet size must be >= 1, got {self.size}")
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))
            if len(self.labels) != self.size:
                raise DimensionMismatch(
                    f"{len(self.labels)} labels for alphabet of size {self.size}")
            if len(set(self.labels)) != len(self.labels):
                raise ValidationError(["duplicate labels"])


@dataclass(frozen=True)
class Distribution:
    """A probability vector over an index alphabet."""

    probs: np.ndarray

    def __post_init__(self):
        p = _readonly(self.probs)
        if p.ndim != 1:
            raise DimensionMismatch(f"distribution must be 1-D, got shape {p.shape}")
        if np.any(p < -PROB_TOL) or np.any(p > 1 + PROB_TOL):
            raise ValidationError([f"NegativeProbability(index={int(np.argmin(p))})"])
        if abs(p.sum() - 1.0) > PROB_TOL:
            raise ValidationError([f"NonStochasticRow(deficit={p.sum() - 1.0:+.3e})"])
        object.__setattr__(self, "probs", p)

    @property
    def size(self):
        return self.probs.shape[0]


@dataclass(frozen=True)
class ConditionalDistribution:
    """Row-stochastic kernel: rows condition, columns are the target."""

    kernel: np.ndarray

    def __post_init__(self):
        k = _readonly(self.kernel)
        if k.ndim != 2:
            raise DimensionMismatch(f"kernel must be 2-D, got shape {k.shape}")
        bad = []
        if np.any(k < -PROB_TOL):
            i, j = np.unravel_index(int(np.argmin(k)), k.shape)
            bad.append(f"NegativeProbability(index=({i},{j}))")
        sums = k.sum(axis=1)
        for i in np.flatnonzero(np.abs(sums - 1.0) > PROB_TOL):
            bad.append(f"NonStochasticRow(row={int(i)}, deficit={sums[i] - 1.0:+.3e})")
        if bad:
            raise ValidationError(bad)
        object.__setattr__(self, "kernel", k)

    @property
    def shape(self):
        return self.kernel.shape


@dataclass(frozen=True)
class ChannelSpec:
    """A state-dependent memoryless channel with feedback and costs.

    law[s, x, y, z] = P_{YZ|SX}(y, z | s, x).  state_distortion[s, s']
    is the sensing distortion d(s, s'); cost[x] the input cost b(x).
    """

    state_alphabet: Alphabet
    input_alphabet: Alphabet
    output_alphabet: Alphabet
    feedback_alphabet: Alphabet
    state_prior: Distribution
    law: np.ndarray
    cost: np.ndarray
    state_distortion: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "law", _readonly(self.law))
        object.__setattr__(self, "cost", _readonly(self.cost))
        object.__setattr__(self, "state_distortion", _readonly(self.state_distortion))

    @property
    def n_states(self):
        return self.state_alphabet.size

    @property
    def n_inputs(self):
        return self.input_alphabet.size

    @property
    def n_outputs(self):
        return self.output_alphabet.size

    @property
    def n_feedback(self):
        return self.feedback_alphabet.size

    def p_y_given_sx(self):
        """Marginal P_{Y|SX}, shape (S, X, Y)."""
        return self.law.sum(axis=3)

    def p_z_given_sx(self):
        """Marginal P_{Z|SX}, shape (S, X, Z)."""
        return self.law.sum(axis=2)

    def d_max(self):
        return float(self.state_distortion.max())


@dataclass(frozen=True)
class SourceSpec:
    """A memoryless source with a reconstruction distortion matrix."""

    source_alphabet: Alphabet
    reconstruction_alphabet: Alphabet
    prior: Distribution
    source_distortion: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "source_distortion", _readonly(self.source_distortion))
        d = self.source_distortion
        if d.shape != (self.source_alphabet.size, self.reconstruction_alphabet.size):
            raise DimensionMismatch(
                f"distortion shape {d.shape} vs alphabets "
                f"({self.source_alphabet.size}, {self.reconstruction_alphabet.size})")
        if self.prior.size != self.source_alphabet.size:
            raise DimensionMismatch("prior size does not match source alphabet")
        if not np.all(np.isfinite(d)) or np.any(d < 0):
            raise ValidationError(["source distortion entries must be finite and >= 0"])

    def d_max(self):
        return float(self.source_distortion.max())


def channel_violations(spec: ChannelSpec) -> list[str]:
    """Collect every violated channel invariant (empty list if valid)."""
    v = []
    S, X, Y, Z = spec.n_states, spec.n_inputs, spec.n_outputs, spec.n_feedback
    if spec.state_prior.size != S:
        v.append(f"DimensionMismatch(field=state_prior, size={spec.state_prior.size}, expected={S})")
    if spec.law.shape != (S, X, Y, Z):
        v.append(f"DimensionMismatch(field=law, shape={spec.law.shape}, expected={(S, X, Y, Z)})")
        return v  # index checks below assume the declared shape
    if spec.cost.shape != (X,):
        v.append(f"DimensionMismatch(field=cost, shape={spec.cost.shape}, expected=({X},))")
    if spec.state_distortion.shape[0] != S:
        v.append(f"DimensionMismatch(field=state_distortion, shape={spec.state_distortion.shape})")
    neg = np.argwhere(spec.law < -PROB_TOL)
    for idx in neg[:10]:
        v.append(f"NegativeProbability(index={tuple(int(i) for i in idx)})")
    sums = spec.law.sum(axis=(2, 3))
    for s, x in np.argwhere(np.abs(sums - 1.0) > PROB_TOL):
        v.append(f"NonStochasticRow(s={int(s)}, x={int(x)}, deficit={sums[s, x] - 1.0:+.3e})")
    if not np.all(np.isfinite(spec.state_distortion)) or np.any(spec.state_distortion < 0):
        v.append("InvalidDistortion(field=state_distortion, must be finite and >= 0)")
    if spec.cost.shape == (X,) and (not np.all(np.isfinite(spec.cost)) or np.any(spec.cost < 0)):
        v.append("InvalidCost(field=cost, must be finite and >= 0)")
    return v


def validate_channel(spec: ChannelSpec) -> ChannelSpec:
    """Return spec unchanged if valid, else raise with every violation."""
    v = channel_violations(spec)
    if v:
        raise ValidationError(v)
    return spec


def build_binary_isac_channel(q: float) -> ChannelSpec:
    """Binary channel Y = S*X with perfect feedback Z = Y, S ~ Bernoulli(q).

    Hamming state distortion, zero input cost.
    """
    if not 0.0 <= q <= 1.0:
        raise DomainError(f"q must lie in [0, 1], got {q}")
    law = np.zeros((2, 2, 2, 2))
    for s in range(2):
        for x in range(2):
            y = s * x
            law[s, x, y, y] = 1.0
    return ChannelSpec(
        state_alphabet=Alphabet(2),
        input_alphabet=Alphabet(2),
        output_alphabet=Alphabet(2),
        feedback_alphabet=Alphabet(2),
        state_prior=Distribution(np.array([1.0 - q, q])),
        law=law,
        cost=np.zeros(2),
        state_distortion=np.array([[0.0, 1.0], [1.0, 0.0]]),
    )


def build_binary_source(p: float) -> SourceSpec:
    """Bernoulli source with P_U(0) = p and Hamming distortion."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p}")
    return SourceSpec(
        source_alphabet=Alphabet(2),
        reconstruction_alphabet=Alphabet(2),
        prior=Distribution(np.array([p, 1.0 - p])),
        source_distortion=np.array([[0.0, 1.0], [1.0, 0.0]]),
    )


def marginal_input(p_u: Distribution, p_x_given_u: ConditionalDistribution) -> Distribution:
    """P_X(x) = sum_u P_U(u) P_{X|U}(x|u)."""
    if p_x_given_u.shape[0] != p_u.size:
        raise DimensionMismatch(
            f"kernel has {p_x_given_u.shape[0]} rows, prior has {p_u.size} entries")
    p = p_u.probs @ p_x_given_u.kernel
    # guard against accumulated rounding before revalidation
    return Distribution(p / p.sum())


# --- JSON ingestion -------------------------------------------------------

def channel_to_dict(spec: ChannelSpec, source: SourceSpec | None = None) -> dict:
    d = {
        "state_prior": spec.state_prior.probs.tolist(),
        "law": spec.law.tolist(),
        "cost": spec.cost.tolist(),
        "state_distortion": spec.state_distortion.tolist(),
    }
    if source is not None:
        d["source"] = {
            "prior": source.prior.probs.tolist(),
            "distortion": source.source_distortion.tolist(),
        }
    return d


def channel_from_dict(d: dict) -> tuple[ChannelSpec, SourceSpec | None]:
    law = np.asarray(d["law"], dtype=np.float64)
    if law.ndim != 4:
        raise DimensionMismatch(f"law must be a 4-level nested array, got ndim={law.ndim}")
    S, X, Y, Z = law.shape
    spec = ChannelSpec(
        state_alphabet=Alphabet(S),
        input_alphabet=Alphabet(X),
        output_alphabet=Alphabet(Y),
        feedback_alphabet=Alphabet(Z),
        state_prior=Distribution(np.asarray(d["state_prior"], dtype=np.float64)),
        law=law,
        cost=np.asarray(d.get("cost", np.zeros(X)), dtype=np.float64),
        state_distortion=np.asarray(d["state_distortion"], dtype=np.float64),
    )
    source = None
    if "source" in d:
        prior = np.asarray(d["source"]["prior"], dtype=np.float64)
        dist = np.asarray(d["source"]["distortion"], dtype=np.float64)
        source = SourceSpec(
            source_alphabet=Alphabet(dist.shape[0]),
            reconstruction_alphabet=Alphabet(dist.shape[1]),
            prior=Distribution(prior),
            source_distortion=dist,
        )
    return spec, source


def load_channel(path) -> tuple[ChannelSpec, SourceSpec | None]:
    with open(path) as f:
        return channel_from_dict(json.load(f))


def save_channel(path, spec: ChannelSpec, source: SourceSpec | None = None):
    with open(path, "w") as f:
        json.dump(channel_to_dict(spec, source), f, indent=2)
        f.write("\n")
