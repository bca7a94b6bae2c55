"""Monte Carlo simulation of the random-coding achievability scheme.

Two modes:

* random-coding — i.i.d. codebook, memoryless transmission through the
  state-dependent channel, robust joint-typicality decoding, symbolwise
  state estimation at the transmitter.
* symbolwise — the uncoded joint source-channel map U_i -> X_i via
  P_{X|U}, receiver applies u_hat*(s_i, y_i), transmitter applies
  s_hat*(x_i, z_i).

All randomness flows through counter-based Philox streams keyed by
(seed, role, index), so trials are order-independent and the report is
bit-exact reproducible from (seed, config).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import TooLarge
from .estimators import comm_estimator, sensing_estimator
from .model import ChannelSpec, ConditionalDistribution, Distribution, SourceSpec

MAX_CODEBOOK_EXPONENT = 24

ROLE_CODEBOOK = 0
ROLE_STATE = 1
ROLE_CHANNEL = 2
ROLE_MESSAGE = 3
ROLE_SOURCE = 4


def _stream(seed: int, role: int, index: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(role, index))
    return np.random.Generator(np.random.Philox(ss))


def _sample_indices(rng, probs, size):
    """Inverse-CDF sampling; probs is a 1-D probability vector."""
    edges = np.cumsum(probs)
    u = rng.random(size)
    return np.minimum(np.searchsorted(edges, u, side="right"), len(probs) - 1)


@dataclass(frozen=True)
class Codebook:
    rate: float
    n: int
    codewords: np.ndarray  # (M, n) input indices
    seed: int

    @property
    def size(self):
        return self.codewords.shape[0]


def generate_codebook(spec: ChannelSpec, p_x: Distribution, rate: float,
                      n: int, seed: int) -> Codebook:
    """2^ceil(n*rate) length-n codewords, each symbol i.i.d. from p_x."""
    exponent = math.ceil(n * rate)
    if exponent > MAX_CODEBOOK_EXPONENT:
        raise TooLarge(
            f"ceil(n*R) = {exponent} exceeds the guard {MAX_CODEBOOK_EXPONENT}")
    m = 2 ** max(exponent, 0)
    words = np.empty((m, n), dtype=np.int64)
    for w in range(m):
        rng = _stream(seed, ROLE_CODEBOOK, w)
        words[w] = _sample_indices(rng, p_x.probs, n)
    words.setflags(write=False)
    return Codebook(rate=rate, n=n, codewords=words, seed=seed)


def transmit(spec: ChannelSpec, x_seq: np.ndarray, seed: int, trial: int = 0):
    """Sample (s, y, z) sequences memorylessly for the given input."""
    n = len(x_seq)
    rng_s = _stream(seed, ROLE_STATE, trial)
    rng_c = _stream(seed, ROLE_CHANNEL, trial)
    s_seq = _sample_indices(rng_s, spec.state_prior.probs, n)
    # per-symbol joint (y, z) index via inverse CDF over the (s, x) row
    flat = spec.law.reshape(spec.n_states, spec.n_inputs, -1)
    cum = np.cumsum(flat, axis=2)
    u = rng_c.random(n)
    rows = cum[s_seq, x_seq]                       # (n, Y*Z)
    yz = (u[:, None] > rows).sum(axis=1)
    yz = np.minimum(yz, rows.shape[1] - 1)
    y_seq = yz // spec.n_feedback
    z_seq = yz % spec.n_feedback
    return s_seq, y_seq, z_seq


def _typical_mask(counts, n, target, epsilon):
    """Robust typicality per row of counts against the flat target pmf."""
    pos = target > 0
    emp = counts / n
    ok_pos = np.all(np.abs(emp[:, pos] - target[pos]) <= epsilon * target[pos], axis=1)
    ok_zero = np.all(counts[:, ~pos] == 0, axis=1)
    return ok_pos & ok_zero


def typicality_decode(spec: ChannelSpec, codebook: Codebook, y_seq, s_seq,
                      epsilon: float, p_x: Distribution):
    """Unique robustly-typical codeword index, or (None, reason).

    The reference joint is P_{SXY} = P_S p_x P_{Y|SX}; the empirical
    joint type of (s, x(w), y) must sit within (1 +/- epsilon) of every
    positive-probability cell and put zero mass on null cells.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    n = codebook.n
    S, X, Y = spec.n_states, spec.n_inputs, spec.n_outputs
    target = (spec.state_prior.probs[:, None, None] * p_x.probs[None, :, None]
              * spec.p_y_given_sx()).ravel()
    cells = S * X * Y
    base = (s_seq * X + 0) * Y + y_seq              # x added per codeword below
    idx = base[None, :] + codebook.codewords * Y    # (M, n) flattened (s,x,y)
    m = codebook.size
    offsets = np.arange(m)[:, None] * cells
    counts = np.bincount((idx + offsets).ravel(), minlength=m * cells)
    counts = counts.reshape(m, cells)
    ok = _typical_mask(counts, n, target, epsilon)
    hits = np.flatnonzero(ok)
    if len(hits) == 1:
        return int(hits[0]), None
    return None, ("none" if len(hits) == 0 else f"ambiguous({len(hits)})")


@dataclass
class SimulationReport:
    mode: str
    seed: int
    n: int
    k: int
    gamma: float
    rate: float | None
    epsilon: float | None
    trials: int
    p_e: float | None
    delta_s: float | None
    delta_u: float | None
    delta_s_halfwidth: float | None = None
    delta_u_halfwidth: float | None = None
    p_e_halfwidth: float | None = None
    delta_s_given_correct: float | None = None
    delta_s_given_error: float | None = None
    d_max: float | None = None
    config: dict = field(default_factory=dict)
    trace: list | None = None  # optional per-trial (t, w, w_hat, err, ds) rows

    def to_dict(self, include_trace=False):
        d = {k: v for k, v in self.__dict__.items()}
        if not include_trace:
            d.pop("trace")
        return d

    def to_json(self, indent=2):
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)


@dataclass(frozen=True)
class CodingConfig:
    rate: float
    n: int
    trials: int
    seed: int
    epsilon: float = 0.1
    p_x: tuple[float, ...] | None = None  # codebook input distribution


def run_channel_coding_trial(spec: ChannelSpec, config: CodingConfig,
                             sensing_map: np.ndarray | None = None) -> SimulationReport:
    """Random-coding experiment: uniform message, transmit, decode, estimate.

    sensing_map overrides the optimal estimator (used by dominance tests).
    """
    est = sensing_estimator(spec)
    s_map = est.sensing_map if sensing_map is None else np.asarray(sensing_map)
    if config.p_x is None:
        p_x = Distribution(np.full(spec.n_inputs, 1.0 / spec.n_inputs))
    else:
        p_x = Distribution(np.asarray(config.p_x, dtype=float))
    codebook = generate_codebook(spec, p_x, config.rate, config.n, config.seed)

    errors = 0
    ds_sum = 0.0
    ds_sq = 0.0
    ds_err_sum = 0.0
    ds_ok_sum = 0.0
    per_trial = []
    for t in range(config.trials):
        rng_w = _stream(config.seed, ROLE_MESSAGE, t)
        w = int(rng_w.integers(codebook.size))
        x_seq = codebook.codewords[w]
        s_seq, y_seq, z_seq = transmit(spec, x_seq, config.seed, trial=t)
        w_hat, _reason = typicality_decode(spec, codebook, y_seq, s_seq,
                                           config.epsilon, p_x)
        err = int(w_hat != w)
        errors += err
        s_hat = s_map[x_seq, z_seq]
        ds = float(spec.state_distortion[s_seq, s_hat].mean())
        ds_sum += ds
        ds_sq += ds * ds
        if err:
            ds_err_sum += ds
        else:
            ds_ok_sum += ds
        per_trial.append((t, w, w_hat, err, ds))

    trials = config.trials
    if trials == 0:
        return SimulationReport(mode="random-coding", seed=config.seed,
                                n=config.n, k=config.n, gamma=1.0,
                                rate=config.rate, epsilon=config.epsilon,
                                trials=0, p_e=None, delta_s=None, delta_u=None,
                                d_max=spec.d_max(),
                                config=_coding_config_dict(config))
    p_e = errors / trials
    delta_s = ds_sum / trials
    var = max(ds_sq / trials - delta_s ** 2, 0.0)
    report = SimulationReport(
        mode="random-coding", seed=config.seed, n=config.n, k=config.n,
        gamma=1.0, rate=config.rate, epsilon=config.epsilon, trials=trials,
        p_e=p_e, delta_s=delta_s, delta_u=None,
        delta_s_halfwidth=3.0 * math.sqrt(var / trials),
        p_e_halfwidth=3.0 * math.sqrt(p_e * (1 - p_e) / trials),
        delta_s_given_correct=(ds_ok_sum / (trials - errors)) if errors < trials else None,
        delta_s_given_error=(ds_err_sum / errors) if errors else None,
        d_max=spec.d_max(), config=_coding_config_dict(config))
    report.trace = per_trial
    return report


def _coding_config_dict(config: CodingConfig) -> dict:
    return {"rate": config.rate, "n": config.n, "trials": config.trials,
            "seed": config.seed, "epsilon": config.epsilon,
            "p_x": list(config.p_x) if config.p_x is not None else None}


@dataclass(frozen=True)
class JsccConfig:
    n: int
    seed: int


def run_symbolwise_jscc(spec: ChannelSpec, source: SourceSpec,
                        p_x_given_u: ConditionalDistribution,
                        config: JsccConfig) -> SimulationReport:
    """Uncoded symbolwise scheme at rate gamma = 1 (k = n)."""
    n = config.n
    est_s = sensing_estimator(spec)
    est_c = comm_estimator(spec, source, p_x_given_u)
    rng_u = _stream(config.seed, ROLE_SOURCE, 0)
    u_seq = _sample_indices(rng_u, source.prior.probs, n)
    rng_enc = _stream(config.seed, ROLE_SOURCE, 1)
    # X | U via per-symbol inverse CDF on the kernel row
    cum = np.cumsum(p_x_given_u.kernel, axis=1)
    r = rng_enc.random(n)
    x_seq = np.minimum((r[:, None] > cum[u_seq]).sum(axis=1),
                       spec.n_inputs - 1)
    s_seq, y_seq, z_seq = transmit(spec, x_seq, config.seed, trial=0)
    s_hat = est_s.sensing_map[x_seq, z_seq]
    u_hat = est_c.comm_map[s_seq, y_seq]
    ds_draws = spec.state_distortion[s_seq, s_hat]
    du_draws = source.source_distortion[u_seq, u_hat]
    delta_s = float(ds_draws.mean())
    delta_u = float(du_draws.mean())
    return SimulationReport(
        mode="symbolwise", seed=config.seed, n=n, k=n, gamma=1.0,
        rate=None, epsilon=None, trials=1,
        p_e=None, delta_s=delta_s, delta_u=delta_u,
        delta_s_halfwidth=3.0 * float(ds_draws.std()) / math.sqrt(n),
        delta_u_halfwidth=3.0 * float(du_draws.std()) / math.sqrt(n),
        d_max=spec.d_max(),
        config={"n": n, "seed": config.seed})


def empirical_joint_type(spec: ChannelSpec, x_seq, s_seq, z_seq, s_hat):
    """Empirical pmf over (s, x, z, s_hat) as a 4-D array."""
    S, X, Z = spec.n_states, spec.n_inputs, spec.n_feedback
    idx = ((s_seq * X + x_seq) * Z + z_seq) * S + s_hat
    counts = np.bincount(idx, minlength=S * X * Z * S)
    return counts.reshape(S, X, Z, S) / len(x_seq)
