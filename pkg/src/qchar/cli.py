"""Command-line interface: ``qchar <command> [options]``.

Commands: char, qdim, link, coherent, generator, simulate, verify.  Every
command accepts ``--config FILE`` (JSON); explicit flags override the file,
which overrides the defaults.

Exit codes: 0 ok, 1 usage error, 2 invariant violation, 3 admissibility failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from .branching import LinkInvariantError, link_row
from .characters import (
    InvalidSignature,
    basis_poly,
    character,
    format_signature,
    parse_signature,
    qdimension,
    signatures_upto,
    validate_signature,
)
from .coherent import Inadmissible, NegativeWeight, NonConvergent, OmegaParams, coherent_measure
from .laurent import BaseParam, format_rational
from .markov import (
    CutoffTooSmall,
    GeneratorMatrix,
    generator,
    simulate_many,
    write_trajectories,
)

EXIT_OK, EXIT_USAGE, EXIT_INVARIANT, EXIT_ADMISSIBILITY = 0, 1, 2, 3

DEFAULTS = {
    "r": "1/2",
    "type": "C",
    "rank": None,
    "tol": 1e-10,
    "cutoff": 12,
    "format": "json",
    "seed": 0,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("session")
    g.add_argument("--r", help="base parameter r with q = r^4, as p/q (default 1/2)")
    g.add_argument("--type", type=str.upper, choices=list("ABCD"), help="root system type (default C)")
    g.add_argument("--rank", type=int, help="rank N")
    g.add_argument("--tol", type=float, help="tolerance (default 1e-10)")
    g.add_argument("--cutoff", type=int, help="truncation |lambda| <= cutoff (default 12)")
    g.add_argument("--format", choices=["json", "csv"], help="output format (default json)")
    g.add_argument("--seed", type=int, help="random seed (default 0)")
    g.add_argument("--config", help="JSON file with any of the session options")
    g.add_argument("--out", help="write output to this file instead of stdout")
    return p


def _omega_args(p):
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--alpha", default="", help="comma-separated alpha parameters")
    p.add_argument("--beta", default="", help="comma-separated beta parameters")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="qchar", description="Characters, links and Markov dynamics for quantum B/C/D groups.")
    parser.add_argument("--version", action="version", version=f"qchar {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("char", parents=[common], help="character polynomial and q-dimension")
    p.add_argument("--lambda", dest="lam", default=None, help="signature, e.g. 2,1,0")

    p = sub.add_parser("qdim", parents=[common], help="quantum dimension")
    p.add_argument("--lambda", dest="lam", default=None)

    p = sub.add_parser("link", parents=[common], help="stochastic link rows")
    p.add_argument("--lambda", dest="lam", default=None)
    p.add_argument("--all-upto", type=int, default=None, help="all rows with |lambda| <= S")
    p.add_argument("--float", action="store_true", help="add float columns to CSV output")

    p = sub.add_parser("coherent", parents=[common], help="coherent measure weights")
    _omega_args(p)

    p = sub.add_parser("generator", parents=[common], help="truncated Markov generator")
    _omega_args(p)
    p.add_argument("--max-defect", type=float, default=None, help="fail if a row defect exceeds this")

    p = sub.add_parser("simulate", parents=[common], help="jump-chain trajectories")
    p.add_argument("--gen", required=True, help="generator JSON written by the generator command")
    p.add_argument("--init", required=True, help="initial signature")
    p.add_argument("--T", dest="horizon", type=float, required=True, help="time horizon")
    p.add_argument("--runs", type=int, default=1)

    p = sub.add_parser("verify", parents=[common], help="run the self-verification suites")
    p.add_argument("--suite", default="all", choices=["all", "characters", "links", "coherent", "markov"])
    p.add_argument("--inject-fault", default=None, help=argparse.SUPPRESS)
    return parser


def resolve(args) -> argparse.Namespace:
    """Merge flags over the optional config file over the defaults."""
    conf = {}
    if args.config:
        try:
            with open(args.config) as fh:
                conf = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(conf, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = set(conf) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    for key, default in DEFAULTS.items():
        if getattr(args, key, None) is None:
            setattr(args, key, conf.get(key, default))
    if isinstance(args.type, str):
        args.type = args.type.upper()
    try:
        args.param = BaseParam.parse(str(args.r))
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(str(exc)) from exc
    if args.tol <= 0:
        raise UsageError("--tol must be positive")
    if args.cutoff < 0:
        raise UsageError("--cutoff must be nonnegative")
    return args


# --- output ------------------------------------------------------------------------

def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _emit(args, text: str):
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _signature(args, type_: str):
    if args.lam is None:
        if args.rank is None:
            raise UsageError("give --lambda or --rank")
        lam = (0,) * args.rank
    else:
        try:
            lam = parse_signature(args.lam)
        except ValueError as exc:
            raise UsageError(f"bad signature {args.lam!r}") from exc
    if args.rank is not None and len(lam) != args.rank:
        raise UsageError(f"signature {args.lam} does not have rank {args.rank}")
    try:
        return validate_signature(type_, lam)
    except InvalidSignature as exc:
        raise UsageError(str(exc)) from exc


def _omega(args) -> OmegaParams:
    try:
        return OmegaParams(args.alpha, args.beta, args.gamma)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _require(type_: str, allowed: str):
    if type_ not in allowed:
        raise UsageError(f"type {type_} is not supported here (use one of {', '.join(allowed)})")


# --- commands ----------------------------------------------------------------------

def cmd_char(args) -> int:
    lam = _signature(args, args.type)
    out = character(args.type, lam).to_json(args.param)
    out["r"] = format_rational(args.param.r)
    _emit(args, _dump(out))
    return EXIT_OK


def cmd_qdim(args) -> int:
    lam = _signature(args, args.type)
    v = qdimension(args.type, lam, args.param)
    out = {"type": args.type, "N": len(lam), "lambda": list(lam), "r": format_rational(args.param.r),
           "qdim": format_rational(v), "float": float(v)}
    _emit(args, _dump(out))
    return EXIT_OK


def cmd_link(args) -> int:
    t = args.type
    _require(t, "BCD")
    if args.all_upto is not None:
        if args.rank is None:
            raise UsageError("--all-upto needs --rank")
        sources = signatures_upto(args.rank, args.all_upto)
    else:
        sources = [_signature(args, t)]
    if t == "D" and any(lam and lam[-1] < 0 for lam in sources):
        raise UsageError("type D link rows use lambda_N >= 0")
    rows = []
    for lam in sources:
        row = link_row(t, lam, args.param, check=False)
        if any(w < 0 for w in row.weights.values()) or row.total() != 1:
            raise LinkInvariantError(f"row {format_signature(lam)} is not stochastic (sum {row.total()})")
        rows.append(row)
    if args.format == "csv":
        targets = sorted({mu for row in rows for mu in row.weights}, key=lambda m: (sum(m), m))
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = ["lambda"]
        for mu in targets:
            header.append(format_signature(mu) or "()")
            if args.float:
                header.append((format_signature(mu) or "()") + ":float")
        w.writerow(header)
        for row in rows:
            line = [format_signature(row.source)]
            for mu in targets:
                v = row.weights.get(mu, Fraction(0))
                line.append(format_rational(v))
                if args.float:
                    line.append(repr(float(v)))
            w.writerow(line)
        _emit(args, buf.getvalue())
    else:
        payload = [{"lambda": list(row.source), "row": row.to_json()["row"]} for row in rows]
        _emit(args, _dump({"type": t, "r": format_rational(args.param.r), "rows": payload}))
    return EXIT_OK


def cmd_coherent(args) -> int:
    t = args.type
    _require(t, "BC")
    if args.rank is None:
        raise UsageError("--rank is required")
    om = _omega(args)
    m = coherent_measure(om, t, args.rank, args.param, tol=args.tol, max_size=args.cutoff)
    weights = [{"lambda": list(lam), "p": float(m.weights[lam])} for lam in m.support()]
    mass = float(sum(m.weights.values()))
    checks = {
        "min_weight": min(w["p"] for w in weights),
        "mass": mass,
        "mass_plus_tail": mass + m.tail,
        "tail_within_tol": m.tail <= args.tol,
    }
    _emit(args, _dump({"type": t, "N": args.rank, "r": format_rational(args.param.r),
                       "omega": om.to_json(), "weights": weights, "tail": float(m.tail), "error": float(m.error),
                       "checks": checks}))
    return EXIT_OK


def cmd_generator(args) -> int:
    t = args.type
    _require(t, "BC")
    if args.rank is None:
        raise UsageError("--rank is required")
    gen = generator(t, args.rank, _omega(args), args.param, args.cutoff, max_defect=args.max_defect)
    v = gen.validity()
    out = gen.to_json()
    out["checks"] = v
    _emit(args, _dump(out))
    return EXIT_OK if v["passed"] else EXIT_INVARIANT


def cmd_simulate(args) -> int:
    try:
        with open(args.gen) as fh:
            gen = GeneratorMatrix.from_json(json.load(fh))
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise UsageError(f"cannot read generator {args.gen}: {exc}") from exc
    init = parse_signature(args.init)
    if tuple(init) not in gen.states:
        raise UsageError(f"initial state {args.init} is not in the truncated state space")
    if args.horizon < 0 or args.runs < 1:
        raise UsageError("--T must be nonnegative and --runs positive")
    trajs = simulate_many(gen, init, args.horizon, args.runs, args.seed)
    meta = {"seed": args.seed, "runs": args.runs, "horizon": args.horizon, "initial": format_signature(init),
            "generator": args.gen}
    if args.out:
        write_trajectories(args.out, trajs, meta)
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["run", "time", "lambda"])
        for tr in trajs:
            for tm, s in tr.records:
                w.writerow([tr.run, repr(tm), s if isinstance(s, str) else format_signature(s)])
        sys.stdout.write(buf.getvalue())
    flagged = sum(1 for tr in trajs if tr.flag)
    if flagged:
        print(f"{flagged} trajectories reached the truncation boundary", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args) -> int:
    from . import verify

    cfg = verify.VerifyConfig(r=format_rational(args.param.r).removesuffix("/1"), tol=args.tol,
                              cutoff=args.cutoff, seed=args.seed)
    report = verify.run(args.suite, cfg, fault=args.inject_fault)
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "status", "metric", "bound", "detail"])
        for c in report.checks:
            d = c.to_json()
            w.writerow([d["name"], d["status"], d["metric"], d["bound"], d["detail"]])
        _emit(args, buf.getvalue())
    else:
        _emit(args, _dump(report.to_json()))
    for c in report.failures():
        print(f"FAILED {c.name} metric={c.metric} bound={c.bound} {c.detail}".rstrip(), file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_INVARIANT


COMMANDS = {
    "char": cmd_char,
    "qdim": cmd_qdim,
    "link": cmd_link,
    "coherent": cmd_coherent,
    "generator": cmd_generator,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        resolve(args)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"qchar {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Inadmissible as exc:
        sys.stdout.write(_dump({"error": "inadmissible", "report": exc.report.to_json()}))
        return EXIT_ADMISSIBILITY
    except (LinkInvariantError, NegativeWeight, CutoffTooSmall) as exc:
        print(f"qchar {args.command}: invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except NonConvergent as exc:
        sys.stdout.write(_dump({"error": "nonconvergent", "message": str(exc)}))
        return EXIT_ADMISSIBILITY


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
