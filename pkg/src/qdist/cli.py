"""Command line entry point: ``qdist <subcommand> ...``.

Exit status is 0 on success, 1 when a verified fact or residual is out of
tolerance, and 2 on bad usage (including invalid distribution parameters).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import discriminators as disc
from .adversary import WITNESS_TOL, build_witness, lower_bound_certificate, verify_witness
from .distributions import generate, load_pair, make_rng, metrics, sample
from .harness import ConfigError, load_config, render_svg, run_experiment
from .harness.render import records_to_csv
from .oracles import GarbageSpec, encode_state, frequency_string, iid_string, lift_string_oracle, prepare_oracle

EXIT_OK, EXIT_VERIFY, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=False))


def _add_pair_args(sp: argparse.ArgumentParser) -> None:
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--family", choices=["collision", "tiered", "bernoulli"], help="generated family")
    g.add_argument("--pair", type=Path, help="JSON file with 'p' and 'q' lists")
    sp.add_argument("--param", type=float, action="append", default=[], help="family parameter (repeatable)")


def _pair(args):
    try:
        if args.pair is not None:
            return load_pair(args.pair)
        params = [int(v) if args.family in ("collision", "tiered") else v for v in args.param]
        return generate(args.family, *params)
    except (ValueError, TypeError, OSError) as exc:
        raise UsageError(str(exc)) from exc


def cmd_dist(args) -> int:
    p, q = _pair(args)
    m = metrics(p, q)
    _emit({"p": p.tolist(), "q": q.tolist(), "bhattacharyya": m.bhattacharyya, "hellinger": m.hellinger, "angle": m.angle})
    return EXIT_OK


def cmd_simulate(args) -> int:
    p, q = _pair(args)
    truth = p if args.label == "P" else q
    rng = make_rng(args.seed, 202)
    try:
        if args.algo == "classical":
            out = disc.classical_discriminate(
                p, q, lambda n: sample(truth, make_rng(args.seed, 303), n), target_error=args.target_error, rng=rng
            )
            _emit({"algo": "classical", "label": args.label, **out})
            return EXIT_OK
        if args.model == "iii":
            if args.algo != "amplify":
                raise UsageError("model iii supports --algo amplify")
            res = disc.discriminate_model3(disc.DiscriminationInstance(p, q, prepare_oracle("iii", truth, label=args.label)), rng)
        else:
            if args.algo not in ("witness", "standard"):
                raise UsageError(f"model {args.model} supports --algo witness or standard")
            if args.model == "iv":
                spec = GarbageSpec(args.garbage, args.garbage_dim, args.seed)
                oracle = prepare_oracle("iv", truth, garbage=spec, label=args.label)
            elif args.model == "i":
                oracle = lift_string_oracle(frequency_string(truth, args.string_length), truth.size, args.label, "i")
            else:
                oracle = lift_string_oracle(iid_string(truth, args.string_length, args.seed), truth.size, args.label, "ii")
            inst = disc.DiscriminationInstance(p, q, oracle)
            if args.algo == "standard":
                res = disc.standard_method(inst, rng=rng)
            else:
                res = disc.discriminate_model4(inst, disc.AlgoParams(epsilon=args.epsilon), rng)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    aux = {k: (float(v) if isinstance(v, (float, np.floating)) else v) for k, v in res.auxiliary.items()}
    _emit({"model": args.model, "algo": args.algo, "label": args.label, "decision": res.decision,
           "queries_used": res.queries_used, "auxiliary": aux})
    return EXIT_OK


def cmd_witness(args) -> int:
    p, q = _pair(args)
    try:
        spec = GarbageSpec(args.garbage, args.garbage_dim, args.seed)
        gp, gq = spec.vectors(p.size, "P"), spec.vectors(q.size, "Q")
        w = build_witness(p, q, gp, gq)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    residual = verify_witness(w, encode_state(p, gp), encode_state(q, gq))
    m = metrics(p, q)
    bound_gap = w.objective * m.hellinger - math.sqrt(2)
    report = {
        **w.to_dict(),
        "hellinger": m.hellinger,
        "facts": [
            {"fact": "bilinear form = 1", "measured": residual, "limit": WITNESS_TOL, "holds": bool(residual <= WITNESS_TOL)},
            {"fact": "T d_H <= sqrt 2", "measured": w.objective * m.hellinger, "limit": math.sqrt(2),
             "holds": bool(bound_gap <= WITNESS_TOL)},
        ],
    }
    _emit(report)
    return EXIT_OK if all(f["holds"] for f in report["facts"]) else EXIT_VERIFY


def cmd_lowerbound(args) -> int:
    p, q = _pair(args)
    try:
        cert = lower_bound_certificate(p, q, n=args.n, s_p=args.sp, s_q=args.sq)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _emit(cert.to_dict())
    return EXIT_OK if cert.ok else EXIT_VERIFY


def cmd_sep(args) -> int:
    if not 1 <= args.t <= 8:
        raise UsageError("--t must lie in 1..8")
    rows = [disc.separation_bounds(t) for t in range(1, args.t + 1)]
    print(f"{'t':>2} {'n':>4} {'alpha':>10} {'unconstrained':>14} {'constrained':>12} {'prefix':>6} {'ratio':>7}")
    for r in rows:
        print(f"{r['t']:>2} {r['n']:>4} {r['alpha']:>10.6g} {r['unconstrained']:>14.6f} "
              f"{r['constrained']:>12.6f} {r['best_prefix']:>6} {r['ratio']:>7.4f}")
    return EXIT_OK


def cmd_experiment(args) -> int:
    try:
        cfg = load_config(args.config)
    except (ConfigError, OSError) as exc:
        raise UsageError(str(exc)) from exc
    csv_path = args.out or cfg.csv_path
    records = run_experiment(cfg, csv_path, workers=args.workers)
    if csv_path is None:
        sys.stdout.write(records_to_csv(records))
    elif cfg.svg_path:
        Path(cfg.svg_path).write_text(render_svg(Path(csv_path).read_text()))
    failed = sum(1 for r in records if r["error"])
    print(f"{len(records)} records, {failed} failed", file=sys.stderr)
    return EXIT_OK


def cmd_plot(args) -> int:
    try:
        svg = render_svg(Path(args.csv).read_text())
    except (ValueError, OSError) as exc:
        raise UsageError(str(exc)) from exc
    if args.output is None:
        sys.stdout.write(svg)
    else:
        Path(args.output).write_text(svg)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qdist", description="Quantum and classical discrimination of two distributions.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("dist", help="print metrics for a pair")
    _add_pair_args(sp)
    sp.set_defaults(func=cmd_dist)

    sp = sub.add_parser("simulate", help="run one discrimination")
    _add_pair_args(sp)
    sp.add_argument("--model", choices=["i", "ii", "iii", "iv"], default="iv")
    sp.add_argument("--algo", choices=["amplify", "witness", "standard", "classical"], default="witness")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--epsilon", type=float, default=0.5)
    sp.add_argument("--label", choices=["P", "Q"], default="P", help="which distribution the oracle encodes")
    sp.add_argument("--garbage", choices=["trivial", "haar_random", "orthogonal_adversarial"], default="trivial")
    sp.add_argument("--garbage-dim", type=int, default=1)
    sp.add_argument("--string-length", type=int, default=20)
    sp.add_argument("--target-error", type=float, default=1 / 3)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("witness", help="build and verify the adversary witness")
    _add_pair_args(sp)
    sp.add_argument("--garbage", choices=["trivial", "haar_random", "orthogonal_adversarial"], default="trivial")
    sp.add_argument("--garbage-dim", type=int, default=1)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_witness)

    sp = sub.add_parser("lowerbound", help="build and verify the rotation certificate")
    _add_pair_args(sp)
    sp.add_argument("--n", type=int, default=None, help="also check the n-fold tensor power")
    sp.add_argument("--sp", type=float, default=None, help="acceptance probability on P")
    sp.add_argument("--sq", type=float, default=None, help="acceptance probability on Q")
    sp.set_defaults(func=cmd_lowerbound)

    sp = sub.add_parser("sep", help="tiered separation table for t = 1..T")
    sp.add_argument("--t", type=int, default=6)
    sp.set_defaults(func=cmd_sep)

    sp = sub.add_parser("experiment", help="run a TOML sweep configuration")
    sp.add_argument("config", type=Path)
    sp.add_argument("--out", type=Path, default=None, help="CSV path (overrides the config)")
    sp.add_argument("--workers", type=int, default=None)
    sp.set_defaults(func=cmd_experiment)

    sp = sub.add_parser("plot", help="render a records CSV as SVG")
    sp.add_argument("csv", type=Path)
    sp.add_argument("-o", "--output", type=Path, default=None)
    sp.set_defaults(func=cmd_plot)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"qdist {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
