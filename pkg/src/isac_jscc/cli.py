"""Command-line front end.

Subcommands: validate, capacity, sweep, rd, binary, simulate.
Exit codes: 0 success, 1 parse/validation failure, 2 infeasible,
3 non-convergence, 4 codebook too large.

Machine-readable outputs carry >= 10 significant digits; the human
summary rounds to 4.  Rerunning any command with identical flags and
seed reproduces byte-identical files (the optional timestamp field in
JSON reports is excluded from that contract).
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import binary as bn
from . import model, simulate, solver
from .errors import (DomainError, Infeasible, NotConverged, TooLarge,
                     ValidationError)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INFEASIBLE = 2
EXIT_NOT_CONVERGED = 3
EXIT_TOO_LARGE = 4


def _out(args):
    if getattr(args, "output", None):
        return open(args.output, "w")
    return sys.stdout


def _load(args):
    try:
        spec, source = model.load_channel(args.channel)
        model.validate_channel(spec)
        return spec, source
    except (OSError, KeyError, ValueError) as e:
        raise ValidationError([f"{args.channel}: {e}"]) from e


def cmd_validate(args):
    try:
        spec, source = model.load_channel(args.channel)
    except (OSError, KeyError, ValueError) as e:
        print(f"parse error: {args.channel}: {e}", file=sys.stderr)
        return EXIT_INVALID
    violations = model.channel_violations(spec)
    if violations:
        for v in violations:
            print(v, file=sys.stderr)
        return EXIT_INVALID
    print(f"valid: {spec.n_states} states, {spec.n_inputs} inputs, "
          f"{spec.n_outputs} outputs, {spec.n_feedback} feedback symbols"
          + (", with source" if source else ""))
    return EXIT_OK


def cmd_capacity(args):
    spec, _ = _load(args)
    constraints = solver.ConstraintSet(sensing_budget=args.ds,
                                       cost_budget=args.cost)
    result = solver.capacity_distortion_cost(spec, constraints)
    if not result.converged:
        print("solver did not converge", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    report = {
        "capacity_bits": result.value,
        "achieved_d_s": result.achieved_distortion,
        "achieved_cost": result.achieved_cost,
        "p_x": [float(v) for v in result.distribution],
        "multipliers": {"lambda_s": result.multipliers[0],
                        "lambda_B": result.multipliers[1]},
        "iterations": result.iterations,
        "config": {"channel": args.channel, "ds": args.ds, "cost": args.cost},
    }
    with _out(args) as f:
        json.dump(report, f, indent=2, sort_keys=True)
        f.write("\n")
    print(f"C = {result.value:.4f} bits/use "
          f"(D_s = {result.achieved_distortion:.4f})", file=sys.stderr)
    return EXIT_OK


def cmd_sweep(args):
    spec, _ = _load(args)
    ds_min, _ = solver.sensing_floor(spec, args.cost)
    ds_max = solver.saturation_distortion(spec, args.cost)
    lo = args.ds_min if args.ds_min is not None else ds_min
    hi = args.ds_max if args.ds_max is not None else ds_max
    grid = np.linspace(lo, hi, args.grid)
    curve = solver.sweep_curve(spec, args.cost, grid)
    with _out(args) as f:
        curve.to_csv(f)
    if not (curve.monotone and curve.concave):
        print("warning: curve failed shape checks", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_rd(args):
    spec, source = _load(args)
    if source is None:
        print("channel file carries no source section", file=sys.stderr)
        return EXIT_INVALID
    if args.grid and args.grid > 1:
        d_min = float(source.prior.probs @ source.source_distortion.min(axis=1))
        d_max = float(min(source.prior.probs @ source.source_distortion[:, v]
                          for v in range(source.source_distortion.shape[1])))
        span = d_max - d_min
        grid = d_min + span * np.linspace(0.0, 1.0, args.grid)
        with _out(args) as f:
            f.write("d_u,d_s,r_bits\n")
            for d in grid:
                r = solver.rate_distortion(source, float(d))
                f.write(f"{d:.12g},inf,{r.value:.12g}\n")
        return EXIT_OK
    result = solver.rate_distortion(source, args.du)
    if not result.converged:
        return EXIT_NOT_CONVERGED
    with _out(args) as f:
        json.dump({"rate_bits": result.value,
                   "achieved_d_u": result.achieved_distortion,
                   "iterations": result.iterations,
                   "config": {"channel": args.channel, "du": args.du}},
                  f, indent=2, sort_keys=True)
        f.write("\n")
    return EXIT_OK


def cmd_binary(args):
    params = bn.BinaryParams(p=args.p, q=args.q)
    rows = bn.figure_curves(params, grid_points=args.grid)
    d_s, d_u, value = bn.find_intersection(params)
    with _out(args) as f:
        f.write("d,c_curve,r_curve\n")
        for d, c, r in rows:
            rtxt = "" if r is None else f"{r:.12g}"
            f.write(f"{d:.12g},{c:.12g},{rtxt}\n")
        f.write(f"intersection: d_s={d_s:.10g}, d_u={d_u:.10g}, value={value:.10g}\n")
    print(f"intersection: d_s={d_s:.4f}, d_u={d_u:.4f}, value={value:.4f}",
          file=sys.stderr)
    return EXIT_OK


def cmd_simulate(args):
    if args.channel:
        spec, source = _load(args)
    else:
        spec = model.build_binary_isac_channel(args.q)
        source = model.build_binary_source(args.p)
    if args.mode == "symbolwise":
        if source is None:
            print("symbolwise mode needs a source", file=sys.stderr)
            return EXIT_INVALID
        kernel = model.ConditionalDistribution(np.array(
            [[args.a, 1 - args.a], [args.b, 1 - args.b]])
            if not args.channel else _uniform_kernel(source, spec))
        report = simulate.run_symbolwise_jscc(
            spec, source, kernel, simulate.JsccConfig(n=args.n, seed=args.seed))
    else:
        p_x = None
        if not args.channel:
            kernel = np.array([[args.a, 1 - args.a], [args.b, 1 - args.b]])
            p_x = tuple(source.prior.probs @ kernel)
        config = simulate.CodingConfig(rate=args.rate, n=args.n,
                                       trials=args.trials, seed=args.seed,
                                       epsilon=args.epsilon, p_x=p_x)
        report = simulate.run_channel_coding_trial(spec, config)
    if args.timestamp:
        report.config["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%SZ",
                                                   time.gmtime())
    with _out(args) as f:
        d = report.to_dict(include_trace=args.trace)
        json.dump(d, f, indent=2, sort_keys=True)
        f.write("\n")
    if report.trials and report.delta_s is not None:
        msg = f"delta_s = {report.delta_s:.4f}"
        if report.delta_u is not None:
            msg += f", delta_u = {report.delta_u:.4f}"
        if report.p_e is not None:
            msg += f", P_e = {report.p_e:.4f}"
        print(msg, file=sys.stderr)
    return EXIT_OK


def _uniform_kernel(source, spec):
    u, x = source.prior.size, spec.n_inputs
    return np.full((u, x), 1.0 / x)


def build_parser():
    p = argparse.ArgumentParser(prog="isac-jscc",
                                description="capacity/rate-distortion toolkit "
                                            "for state-dependent channels")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check a channel JSON file")
    v.add_argument("--channel", required=True)
    v.set_defaults(fn=cmd_validate)

    c = sub.add_parser("capacity", help="C_inf(D_s, B) for one budget point")
    c.add_argument("--channel", required=True)
    c.add_argument("--ds", type=float, default=None)
    c.add_argument("--cost", type=float, default=None)
    c.add_argument("--output")
    c.set_defaults(fn=cmd_capacity)

    s = sub.add_parser("sweep", help="capacity-distortion curve CSV")
    s.add_argument("--channel", required=True)
    s.add_argument("--cost", type=float, default=None)
    s.add_argument("--grid", type=int, default=25)
    s.add_argument("--ds-min", type=float, default=None)
    s.add_argument("--ds-max", type=float, default=None)
    s.add_argument("--output")
    s.set_defaults(fn=cmd_sweep)

    r = sub.add_parser("rd", help="rate-distortion of the source section")
    r.add_argument("--channel", required=True)
    r.add_argument("--du", type=float, default=None)
    r.add_argument("--grid", type=int, default=0)
    r.add_argument("--output")
    r.set_defaults(fn=cmd_rd)

    b = sub.add_parser("binary", help="closed-form binary curves + intersection")
    b.add_argument("--p", type=float, required=True)
    b.add_argument("--q", type=float, required=True)
    b.add_argument("--grid", type=int, default=200)
    b.add_argument("--output")
    b.set_defaults(fn=cmd_binary)

    m = sub.add_parser("simulate", help="Monte Carlo achievability experiment")
    m.add_argument("--mode", choices=["symbolwise", "random-coding"],
                   required=True)
    m.add_argument("--channel", default=None)
    m.add_argument("--p", type=float, default=0.4)
    m.add_argument("--q", type=float, default=0.4)
    m.add_argument("--a", type=float, default=1.0)
    m.add_argument("--b", type=float, default=0.0)
    m.add_argument("--rate", type=float, default=0.25)
    m.add_argument("--n", type=int, default=1000)
    m.add_argument("--trials", type=int, default=1000)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--epsilon", type=float, default=0.1)
    m.add_argument("--trace", action="store_true",
                   help="include the per-trial CSV-style trace in the JSON")
    m.add_argument("--timestamp", action="store_true",
                   help="stamp the report (excluded from determinism checks)")
    m.add_argument("--output")
    m.set_defaults(fn=cmd_simulate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ValidationError as e:
        for v in e.violations:
            print(v, file=sys.stderr)
        return EXIT_INVALID
    except DomainError as e:
        print(f"domain error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except Infeasible as e:
        print(f"infeasible: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except NotConverged as e:
        print(f"not converged: {e}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except TooLarge as e:
        print(f"too large: {e}; lower --rate or --n so ceil(n*R) <= "
              f"{simulate.MAX_CODEBOOK_EXPONENT}", file=sys.stderr)
        return EXIT_TOO_LARGE


if __name__ == "__main__":
    sys.exit(main())
