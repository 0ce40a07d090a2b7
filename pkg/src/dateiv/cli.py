"""Command-line interface: ``dateiv verify|estimate|simulate|do-query|generate|catalog``.

Exit codes: 0 success, 1 usage / I/O / parse error, 2 an assumption fails or a
quantity is undefined, 3 the DATE and IV estimand differ by more than ``--tol``.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import cbn, iv, population as P, scenarios, sim
from .errors import (
    DateIvError,
    EmptyArm,
    NoCompliers,
    ScenarioError,
    UnknownScenario,
    UnknownValue,
    UnknownVariable,
    ZeroDenominator,
    ZeroProbabilityCondition,
    ZeroProbabilityEvidence,
    ZeroSampleDenominator,
)

EXIT_OK, EXIT_USAGE, EXIT_UNDEFINED, EXIT_GAP = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _fmt(x) -> str:
    return "undefined" if x is None else f"{x:.6f}"


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {v}")
    return v


def _seed(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if v < 0:
        raise argparse.ArgumentTypeError("seed must be non-negative")
    return v


def _probability_open(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number") from None
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError("must lie strictly between 0 and 1")
    return v


def _positive_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number") from None
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _pairs(text: str) -> dict[str, str]:
    out = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        if "=" not in item:
            raise UsageError(f"expected VAR=VAL, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _default_seed():
    env = os.environ.get("DATEIV_SEED")
    if env is None:
        return 0
    try:
        return _seed(env)
    except argparse.ArgumentTypeError as exc:
        raise UsageError(f"DATEIV_SEED: {exc}") from None


def _add_source(p, p_assign=True):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--scenario", metavar="PATH", help="scenario JSON file")
    g.add_argument("--builtin", metavar="NAME", help="builtin scenario (see `catalog`)")
    if p_assign:
        p.add_argument("--p-assign", type=_probability_open, default=None,
                       help="P(Assign=1); overrides the scenario file (default 0.5)")


def _resolve(args):
    if args.scenario is not None:
        pop, cfg = scenarios.load(args.scenario)
    else:
        pop, cfg = scenarios.builtin(args.builtin), iv.IvNetConfig()
    if getattr(args, "p_assign", None) is not None:
        cfg = iv.IvNetConfig(args.p_assign)
    return pop, cfg


def cmd_verify(args, out):
    pop, cfg = _resolve(args)
    rep = iv.theorem1_check(pop, cfg, args.tol)
    out.write((rep.to_json() if args.format == "json" else rep.to_table()) + "\n")
    if rep.passed:
        return EXIT_OK
    if not rep.assumptions_hold or rep.absolute_gap is None:
        return EXIT_UNDEFINED
    return EXIT_GAP


def cmd_estimate(args, out):
    pop, cfg = _resolve(args)
    result = {"census": P.census(pop), "p_assign": cfg.p_assign}
    result["DATE"] = P.date(pop)
    result["LATE"] = P.late(pop) if P.is_deterministic(pop) and P.classic_compliers(pop) else None
    try:
        result["IV_estimand"] = iv.iv_estimand(iv.build_iv_net(pop, cfg))
    except ZeroDenominator:
        result["IV_estimand"] = None
    if args.format == "json":
        out.write(json.dumps(result, indent=2, sort_keys=True) + "\n")
    else:
        out.write(f"{'DATE':<14}{_fmt(result['DATE'])}\n")
        if result["LATE"] is not None:
            out.write(f"{'LATE':<14}{_fmt(result['LATE'])}\n")
        out.write(f"{'IV estimand':<14}{_fmt(result['IV_estimand'])}\n")
        c = result["census"]
        out.write(f"census        complier={c['complier']} indifferent={c['indifferent']} defier={c['defier']}\n")
    return EXIT_OK


def cmd_simulate(args, out):
    pop, cfg = _resolve(args)
    seed = args.seed if args.seed is not None else _default_seed()
    samples, res = sim.run_trial(pop, cfg, seed, args.n, n_bootstrap=args.bootstrap)
    if args.out:
        samples.to_csv(args.out)
    if args.format == "json":
        out.write(res.to_json() + "\n")
    elif args.format == "csv":
        out.write(res.to_csv())
    else:
        out.write(f"{'n':<16}{res.n}\n")
        out.write(f"{'seed':<16}{seed}\n")
        out.write(f"{'wald_estimate':<16}{_fmt(res.wald_estimate)}\n")
        out.write(f"{'empirical_se':<16}{_fmt(res.empirical_se)}\n")
        out.write(f"{'exact_DATE':<16}{_fmt(res.exact_date)}\n")
        out.write(f"{'abs_error':<16}{_fmt(res.abs_error)}\n")
    return EXIT_OK


def cmd_do_query(args, out):
    pop, cfg = _resolve(args)
    net = iv.build_iv_net(pop, cfg)
    do = _pairs(args.do)
    if len(do) != 1:
        raise UsageError("--do takes exactly one VAR=VAL")
    (x, xval), = do.items()
    evidence = _pairs(args.evidence or "")
    target = _pairs(args.target)
    if not target:
        raise UsageError("--target needs at least one VAR=VAL")
    for name, val in [(x, xval), *evidence.items(), *target.items()]:
        net.variable(name).index(val)
    p = cbn.do_query_evidence(net, x, xval, evidence, target)
    if args.format == "json":
        out.write(json.dumps({"do": do, "evidence": evidence, "target": target, "probability": p},
                             indent=2, sort_keys=True) + "\n")
    else:
        out.write(f"{p:.6f}\n")
    return EXIT_OK


def cmd_generate(args, out):
    seed = args.seed if args.seed is not None else _default_seed()
    pop = scenarios.generate_random(args.n, seed, no_defiers=args.no_defiers,
                                    force_complier=args.force_complier, deterministic=args.deterministic)
    cfg = iv.IvNetConfig(args.p_assign if args.p_assign is not None else 0.5)
    if args.out:
        scenarios.save(pop, cfg, args.out)
    else:
        out.write(scenarios.dumps(pop, cfg))
    return EXIT_OK


def cmd_catalog(args, out):
    cat = scenarios.catalog()
    if args.format == "json":
        out.write(json.dumps(cat, indent=2, sort_keys=True) + "\n")
    else:
        for name, desc in cat.items():
            out.write(f"{name:<14}{desc}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dateiv", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="check DATE = IV estimand and its assumptions")
    _add_source(p)
    p.add_argument("--tol", type=_positive_float, default=1e-9)
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("estimate", help="print DATE, LATE, IV estimand and compliance census")
    _add_source(p)
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("simulate", help="simulate a trial and compute the sample Wald estimate")
    _add_source(p)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--seed", type=_seed, default=None, help="default: $DATEIV_SEED or 0")
    p.add_argument("--bootstrap", type=int, default=sim.DEFAULT_BOOTSTRAP, help="bootstrap resamples")
    p.add_argument("--out", metavar="PATH", help="write samples as CSV")
    p.add_argument("--format", choices=("table", "csv", "json"), default="table")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("do-query", help="counterfactual probability on the IV net")
    _add_source(p)
    p.add_argument("--do", required=True, metavar="VAR=VAL")
    p.add_argument("--evidence", default="", metavar="VAR=VAL[,VAR=VAL...]")
    p.add_argument("--target", required=True, metavar="VAR=VAL[,VAR=VAL...]")
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.set_defaults(func=cmd_do_query)

    p = sub.add_parser("generate", help="write a random scenario file")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--seed", type=_seed, default=None, help="default: $DATEIV_SEED or 0")
    p.add_argument("--no-defiers", action="store_true")
    p.add_argument("--force-complier", action="store_true")
    p.add_argument("--deterministic", action="store_true")
    p.add_argument("--p-assign", type=_probability_open, default=None)
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("catalog", help="list builtin scenarios")
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.set_defaults(func=cmd_catalog)
    return parser


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args, out)
    except (OSError, ScenarioError, UnknownScenario, UnknownVariable, UnknownValue, UsageError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE
    except (NoCompliers, ZeroDenominator, ZeroProbabilityEvidence, ZeroProbabilityCondition,
            EmptyArm, ZeroSampleDenominator) as exc:
        err.write(f"undefined: {exc}\n")
        return EXIT_UNDEFINED
    except DateIvError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
