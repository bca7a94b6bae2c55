"""Acceptance gate: one test per criterion, each printing pass/fail.

Run with  pytest tests/test_acceptance.py -v -s  to see the per-criterion
lines.  Tolerances are pinned here and must not be loosened.
"""

import itertools
import time

import numpy as np
import pytest

from isac_jscc import (BinaryParams, CodingConfig, ConditionalDistribution,
                       ConstraintSet, Distribution, JsccConfig,
                       build_binary_isac_channel, build_binary_source,
                       capacity_distortion_cost, closed_form_C, closed_form_R,
                       encoder_operating_point, find_intersection, h_b,
                       in_rd_region, parametric_oracle, rate_distortion,
                       run_channel_coding_trial, run_symbolwise_jscc,
                       save_channel, sensing_estimator, sweep_curve)
from isac_jscc.cli import main
from isac_jscc.errors import OutOfRegion
from isac_jscc.solver import capacity_unconstrained, saturation_distortion, sensing_floor
from conftest import random_channel, random_source


def _report(num, label, ok):
    print(f"{'PASS' if ok else 'FAIL'} criterion {num}: {label}")
    assert ok, f"criterion {num} failed: {label}"


def test_criterion_1_intersection(capsys):
    t0 = time.perf_counter()
    d_s, d_u, value = find_intersection(BinaryParams(0.4, 0.4))
    elapsed = time.perf_counter() - t0
    ok = (abs(d_s - 0.16) <= 1e-3 and abs(d_u - 0.24) <= 1e-3
          and abs(value - 0.3884) <= 1e-3 and elapsed < 1.0)
    with capsys.disabled():
        _report(1, f"intersection (0.16, 0.24, 0.3884) within 1e-3, "
                   f"{elapsed:.2f}s < 1s", ok)


def test_criterion_2_closed_form_vs_solver(capsys):
    t0 = time.perf_counter()
    spec = build_binary_isac_channel(0.4)
    params = BinaryParams(0.4, 0.4)
    worst = 0.0
    for d_s in np.linspace(0.004, 0.2, 50):
        got = capacity_distortion_cost(
            spec, ConstraintSet(sensing_budget=float(d_s))).value
        worst = max(worst, abs(got - closed_form_C(params, float(d_s))))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-4 and elapsed < 10.0
    with capsys.disabled():
        _report(2, f"binary solver vs q*H_b(D_s/q) at 50 points, worst "
                   f"{worst:.2e} <= 1e-4, {elapsed:.1f}s < 10s", ok)


def test_criterion_3_curve_shape(capsys):
    rng = np.random.default_rng(2024)
    bad = []
    for case in range(20):
        spec = random_channel(rng, max_size=4)
        ds_min, _ = sensing_floor(spec)
        ds_max = saturation_distortion(spec)
        c_sat = capacity_unconstrained(spec).value
        hi = ds_max * 1.2 if ds_max > 0 else 1.0
        grid = np.linspace(ds_min, hi, 9)
        curve = sweep_curve(spec, None, grid)
        vals = [p.c_bits for p in curve.points]
        if not curve.monotone or not curve.concave:
            bad.append((case, "shape"))
        for p in curve.points:
            if p.d_s >= ds_max - 1e-12 and abs(p.c_bits - c_sat) > 1e-6:
                bad.append((case, "saturation"))
    ok = not bad
    with capsys.disabled():
        _report(3, f"20 random channels: monotone/concave/saturating "
                   f"(slack 1e-6); failures: {bad}", ok)


def test_criterion_4_rate_distortion_shape(capsys):
    rng = np.random.default_rng(77)
    bad = []
    for case in range(20):
        src = random_source(rng)
        p = src.prior.probs
        d = src.source_distortion
        d_min = float(p @ d.min(axis=1))
        d_max = float(min(p @ d[:, v] for v in range(d.shape[1])))
        grid = d_min + (d_max - d_min) * np.linspace(0.0, 1.0, 9)
        vals = [rate_distortion(src, float(x)).value for x in grid]
        if any(b > a + 1e-6 for a, b in zip(vals, vals[1:])):
            bad.append((case, "monotone"))
        if any(vals[i] > 0.5 * (vals[i - 1] + vals[i + 1]) + 1e-6
               for i in range(1, len(vals) - 1)):
            bad.append((case, "convexity"))
    src = build_binary_source(0.5)
    worst = max(abs(rate_distortion(src, float(dd)).value - (1 - h_b(float(dd))))
                for dd in np.linspace(0.01, 0.49, 25))
    ok = not bad and worst <= 1e-5
    with capsys.disabled():
        _report(4, f"20 random R(D) sweeps monotone/convex (slack 1e-6), "
                   f"Bernoulli(1/2)-Hamming worst {worst:.2e} <= 1e-5; "
                   f"failures: {bad}", ok)


def test_criterion_5_estimator_enumeration(capsys):
    rng = np.random.default_rng(5150)
    worst = -np.inf
    for _ in range(50):
        spec = random_channel(rng, max_size=3)
        est = sensing_estimator(spec)
        S, X, Z = spec.n_states, spec.n_inputs, spec.n_feedback
        p_x = rng.dirichlet(np.ones(X))
        joint = (spec.state_prior.probs[:, None, None] * p_x[None, :, None]
                 * spec.p_z_given_sx())                      # (S, X, Z)
        ours = float(np.einsum("sxz,sxz->", joint,
                               spec.state_distortion[:, est.sensing_map]))
        # expected distortion of the map (x,z) -> t, for every target t
        cellcost = np.einsum("sxz,st->xzt", joint, spec.state_distortion)
        best = np.inf
        for assign in itertools.product(range(S), repeat=X * Z):
            m = np.asarray(assign).reshape(X, Z)
            best = min(best, float(cellcost[np.arange(X)[:, None],
                                            np.arange(Z)[None, :], m].sum()))
        worst = max(worst, ours - best)
    ok = worst <= 1e-12
    with capsys.disabled():
        _report(5, f"50-case exhaustive estimator enumeration, worst "
                   f"(ours - best) = {worst:.2e} <= 1e-12", ok)


def test_criterion_6_converse_ordering(capsys):
    violations = 0
    for p in (0.1, 0.25, 0.4):
        for q in (0.1, 0.25, 0.4):
            params = BinaryParams(p, q)
            for d_s in np.linspace(0.0, q / 2, 50):
                for d_u in np.linspace(0.0, 0.5, 50):
                    if not in_rd_region(params, float(d_u), float(d_s)):
                        continue
                    r = closed_form_R(params, float(d_u), float(d_s))
                    if r > closed_form_C(params, float(d_s)) + 1e-9:
                        violations += 1
    ok = violations == 0
    with capsys.disabled():
        _report(6, f"R(D_u, D_s) <= C(D_s) + 1e-9 on 50x50 grids for "
                   f"(p,q) in {{0.1,0.25,0.4}}^2; violations: {violations}", ok)


def test_criterion_7_monte_carlo(capsys):
    t0 = time.perf_counter()
    spec = build_binary_isac_channel(0.4)
    src = build_binary_source(0.4)
    kernel = ConditionalDistribution(np.array([[1.0, 0.0], [0.0, 1.0]]))
    hits = 0
    for seed in range(20):
        r = run_symbolwise_jscc(spec, src, kernel,
                                JsccConfig(n=100000, seed=seed))
        if (abs(r.delta_u - 0.24) <= r.delta_u_halfwidth
                and abs(r.delta_s - 0.16) <= r.delta_s_halfwidth):
            hits += 1
    groups = 0
    for g in range(10):
        pes = []
        for n in (10, 20, 30):
            cfg = CodingConfig(rate=0.25, n=n, trials=1000, seed=100 + g,
                               epsilon=0.45, p_x=(0.4, 0.6))
            pes.append(run_channel_coding_trial(spec, cfg).p_e)
        if pes[0] > pes[1] > pes[2]:
            groups += 1
    elapsed = time.perf_counter() - t0
    ok = hits >= 19 and groups >= 8 and elapsed < 120.0
    with capsys.disabled():
        _report(7, f"symbolwise 3-sigma hits {hits}/20 (need >= 19), "
                   f"P_e decreasing groups {groups}/10 (need >= 8), "
                   f"{elapsed:.0f}s < 120s", ok)


def test_criterion_8_oracle_equivalence(capsys):
    # operating points induced by interior encoder kernels: the oracle's
    # 1/grid feasibility slack scales with |H_b'|, which stays bounded
    # away from the {0, 1} endpoints
    worst = 0.0
    for pq in (0.1, 0.25, 0.4):
        for a in (0.25, 0.4, 0.6, 0.75):
            for b in (0.2, 0.45, 0.7):
                params = BinaryParams(pq, pq, a, b)
                d_s, d_u, _ = encoder_operating_point(params)
                if not in_rd_region(params, d_u, d_s):
                    continue
                cf = closed_form_R(params, d_u, d_s)
                oracle = parametric_oracle(params, d_u, d_s, grid_n=1000)
                worst = max(worst, abs(cf - oracle))
    ok = worst <= 5e-3
    with capsys.disabled():
        _report(8, f"closed form vs parametric oracle (grid 1000), worst "
                   f"gap {worst:.2e} <= 5e-3", ok)


def test_criterion_9_determinism(capsys, tmp_path):
    chan = tmp_path / "chan.json"
    save_channel(str(chan), build_binary_isac_channel(0.4),
                 build_binary_source(0.4))
    pairs = []
    for argv, name in [
        (["simulate", "--mode", "symbolwise", "--n", "2000", "--seed", "3"],
         "sim"),
        (["simulate", "--mode", "random-coding", "--rate", "0.25", "--n",
          "20", "--trials", "50", "--seed", "3", "--epsilon", "0.45"], "rc"),
        (["sweep", "--channel", str(chan), "--grid", "8"], "sweep"),
    ]:
        outs = []
        for rep in range(2):
            path = tmp_path / f"{name}{rep}.out"
            assert main(argv + ["--output", str(path)]) == 0
            outs.append(path.read_bytes())
        pairs.append(outs[0] == outs[1])
    ok = all(pairs)
    with capsys.disabled():
        _report(9, f"byte-identical reruns (simulate x2, sweep): {pairs}", ok)
