"""Command-line front end.

Exit codes: 0 success, 1 usage or I/O error, 2 learner failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import re
import sys
from importlib.metadata import PackageNotFoundError, version

import numpy as np

from . import compiler, gates, learner, metrics, models, sampling, simulator
from . import serialization as io
from .numtheory import ProblemParams

EXIT_OK, EXIT_ERROR, EXIT_FAILURE = 0, 1, 2

_ANGLE = re.compile(r"^\s*(?:([0-9.]+(?:[eE][-+]?\d+)?)\s*\*?\s*)?pi\s*(?:/\s*([0-9.]+(?:[eE][-+]?\d+)?))?\s*$")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def parse_angle(text: str) -> float:
    """'0.3', 'pi', '3pi/8', '3*pi/8' or 'pi/64' to radians; no eval."""
    m = _ANGLE.match(text)
    if m:
        num = float(m.group(1)) if m.group(1) else 1.0
        den = float(m.group(2)) if m.group(2) else 1.0
        if den == 0:
            raise UsageError(f"bad angle {text!r}: zero denominator")
        return num * math.pi / den
    try:
        val = float(text)
    except ValueError:
        raise UsageError(f"cannot parse angle {text!r}") from None
    if not math.isfinite(val):
        raise UsageError(f"angle must be finite, got {text!r}")
    return val


def parse_sweep(text: str) -> np.ndarray:
    """'lo:hi:count' to ``count`` log-spaced angles."""
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError("sweep must look like lo:hi:count")
    lo, hi = parse_angle(parts[0]), parse_angle(parts[1])
    try:
        count = int(parts[2])
    except ValueError:
        raise UsageError(f"bad sweep count {parts[2]!r}") from None
    if not 0 < lo < hi or count < 2:
        raise UsageError("sweep needs 0 < lo < hi and at least 2 points")
    return np.geomspace(lo, hi, count)


def _version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "0+unknown"


def _emit(obj, args):
    text = io.dumps(obj, indent=None if getattr(args, "compact", False) else 2)
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _params(args, s=None) -> ProblemParams:
    return ProblemParams(args.n, args.p, args.s if s is None else s, args.m)


def _add_problem(sp, *, need_s=True):
    sp.add_argument("--n", type=int, required=True, help="tree vertices (odd, >= 3)")
    sp.add_argument("--p", type=int, required=True, help="odd prime modulus")
    if need_s:
        sp.add_argument("--s", type=int, default=0, help="hyperplane shift")
    sp.add_argument("--m", type=int, default=None, help="gate block size")


def cmd_sample(args) -> int:
    params = _params(args)
    X = sampling.draw_samples(args.model, params, args.shots, args.seed, chunk=args.chunk, n_jobs=args.jobs)
    meta = sampling.sampling_metadata(args.model, params, args.shots, args.seed, args.chunk)
    if args.out:
        with open(args.out, "w") as fh:
            io.write_samples_jsonl(X, params.n, fh)
    else:
        io.write_samples_jsonl(X, params.n, sys.stdout)
    print(json.dumps(meta), file=sys.stderr)
    return EXIT_OK


def cmd_learn(args) -> int:
    cfg = learner.LearnerConfig(args.p, args.n, args.delta, None, None, args.M, args.m)
    if args.samples:
        with open(args.samples) as fh:
            X = io.read_samples_jsonl(fh, args.n)
        result = learner.learn(X, cfg)
    else:
        if args.s is None:
            raise UsageError("oracle mode needs --s (or pass --samples)")
        result = learner.learn(cfg.problem(args.s), cfg, model=args.model, seed=args.seed)
    _emit(result.to_json(), args)
    return EXIT_OK if result.ok else EXIT_FAILURE


def _tv_exact(args) -> dict:
    n_bits = 2 * args.n - 1
    if n_bits > models.ENUMERATION_CAP:
        raise UsageError(f"n={args.n} needs {n_bits}-bit enumeration; cap is {models.ENUMERATION_CAP} bits")
    params = _params(args)
    pmfs = {
        "ideal": lambda: models.ideal_pmf(params),
        "analytic-p": lambda: models.analytic_pmf(params),
        "unitary-q": lambda: simulator.q_pmf_dense(params),
    }
    tv = metrics.tv_exact(pmfs[args.left](), pmfs[args.right]())
    return {**params.as_dict(), "left": args.left, "right": args.right, "tv": tv}


def _tv_dp(args) -> dict:
    params = _params(args)
    value, bound = metrics.tv_p_ideal_dp(params), metrics.tv_bound(params.n, params.p)
    return {**params.as_dict(), "tv": value, "bound": bound, "within_bound": bool(value <= bound)}


def _oracle(name, params):
    return {"ideal": models.ideal_pmf, "analytic-p": models.analytic_pmf, "unitary-q": simulator.q_pmf}[name](params)


def _tv_empirical(args) -> dict:
    params = _params(args)
    if args.samples:
        with open(args.samples) as fh:
            X = io.read_samples_jsonl(fh, params.n)
        source = args.samples
    else:
        X = sampling.draw_samples(args.sample_model, params, args.shots, args.seed)
        source = args.sample_model
    tv = metrics.tv_empirical(_oracle(args.oracle, params), X, mode=args.mode)
    return {**params.as_dict(), "oracle": args.oracle, "samples": source, "shots": len(X),
            "mode": args.mode, "tv": tv}


def _tv_local(args) -> dict:
    params = _params(args)
    with open(args.function) as fh:
        f = metrics.LocalFunction.from_json(json.load(fh))
    if len(f.outputs) != params.n_bits:
        raise UsageError(f"function emits {len(f.outputs)} bits; (d, x, y) needs {params.n_bits}")
    tv_f = metrics.tv_exact(metrics.local_function_pmf(f, params), models.ideal_pmf(params))
    return {**params.as_dict(), "locality": f.locality, "tv_local_ideal": tv_f,
            "tv_p_ideal": metrics.tv_p_ideal_dp(params)}


def cmd_tv(args) -> int:
    handler = {"exact": _tv_exact, "dp": _tv_dp, "empirical": _tv_empirical, "local": _tv_local}[args.kind]
    _emit(handler(args), args)
    return EXIT_OK


def cmd_gates(args) -> int:
    if args.m < 2 or args.m > gates.MAX_BLOCK:
        raise UsageError(f"--m must lie in [2, {gates.MAX_BLOCK}]")
    thetas = parse_sweep(args.theta_sweep)
    rows, slope = gates.closeness_sweep(args.m, thetas)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["theta", "frobenius", "spectral", "unitarity", "fitted_slope"])
        for r in rows:
            w.writerow([f"{r[k]:.15g}" for k in ("theta", "frobenius", "spectral", "unitarity")] + [f"{slope:.15g}"])
    finally:
        if args.out:
            out.close()
    return EXIT_OK


def cmd_compile(args) -> int:
    if args.n is not None:
        if args.p is None:
            raise UsageError("full-generator compile needs --n and --p")
        params = ProblemParams(args.n, args.p, args.s, args.m)
        desc = simulator.circuit_descriptor(params)
        native = compiler.compile_descriptor(desc)
        residual = metrics.tv_exact(compiler.native_pmf(native, params), simulator.descriptor_pmf(desc, params))
        report = {"target": params.as_dict(), "residual_tv": residual}
    else:
        if args.m is None or args.theta is None:
            raise UsageError("block compile needs --m and --theta (or --n/--p for a full generator)")
        U = gates.build_U(gates.BlockGateParams(args.m, parse_angle(args.theta)))
        native = compiler.compile_unitary(U)
        report = {"target": {"m": args.m, "theta": parse_angle(args.theta)},
                  "residual_max_entry": compiler.max_entry_error(U, native)}
    report["counts"] = native.counts()
    report["circuit"] = native.to_json()
    _emit(report, args)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="shallowpac", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {_version()}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("sample", help="draw (d, x, y) samples as JSONL")
    _add_problem(sp)
    sp.add_argument("--model", choices=sorted(sampling.MODELS), default="unitary-q")
    sp.add_argument("--shots", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--chunk", type=int, default=sampling.DEFAULT_CHUNK)
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("learn", help="recover s from samples")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--s", type=int, default=None, help="target shift (oracle mode)")
    sp.add_argument("--m", type=int, default=None)
    sp.add_argument("--samples", help="JSONL sample file; omit to draw from an oracle")
    sp.add_argument("--model", choices=sorted(sampling.MODELS), default="analytic-p")
    sp.add_argument("--delta", type=float, default=0.1)
    sp.add_argument("--M", type=int, default=None)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    sp.add_argument("--compact", action="store_true")
    sp.set_defaults(func=cmd_learn)

    sp = sub.add_parser("tv", help="total-variation reports")
    kinds = sp.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    k = kinds.add_parser("exact", help="full enumeration")
    _add_problem(k)
    k.add_argument("--left", choices=["ideal", "analytic-p", "unitary-q"], default="analytic-p")
    k.add_argument("--right", choices=["ideal", "analytic-p", "unitary-q"], default="ideal")
    k = kinds.add_parser("dp", help="residue DP for TV(P, ideal) with the upper bound")
    _add_problem(k)
    k = kinds.add_parser("empirical", help="plug-in TV from samples")
    _add_problem(k)
    k.add_argument("--oracle", choices=["ideal", "analytic-p", "unitary-q"], default="analytic-p")
    k.add_argument("--samples")
    k.add_argument("--sample-model", choices=sorted(sampling.MODELS), default="ideal")
    k.add_argument("--shots", type=int, default=10000)
    k.add_argument("--seed", type=int, default=0)
    k.add_argument("--mode", choices=["joint", "conditional"], default="joint")
    k = kinds.add_parser("local", help="TV of a user-supplied local function against the ideal law")
    _add_problem(k)
    k.add_argument("--function", required=True, help="LocalFunction JSON file")
    for k in kinds.choices.values():
        k.add_argument("--out")
    sp.set_defaults(func=cmd_tv)

    sp = sub.add_parser("gates", help="gate diagnostics")
    gsub = sp.add_subparsers(dest="action", required=True, parser_class=_Parser)
    g = gsub.add_parser("check", help="||A - U|| sweep with fitted log-log slope")
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--theta-sweep", default="pi/64:pi/8:8")
    g.add_argument("--out")
    sp.set_defaults(func=cmd_gates)

    sp = sub.add_parser("compile", help="lower a block gate or a full generator to u1q/cnot")
    sp.add_argument("--m", type=int, default=None)
    sp.add_argument("--theta", default=None)
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--p", type=int, default=None)
    sp.add_argument("--s", type=int, default=0)
    sp.add_argument("--out")
    sp.add_argument("--compact", action="store_true")
    sp.set_defaults(func=cmd_compile)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ValueError, OSError) as exc:
        print(f"shallowpac: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
