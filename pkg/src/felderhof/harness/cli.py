"""Command-line front end: ``felderhof run | golden | list-identities``."""

from __future__ import annotations

import argparse
import json
import sys

from . import golden
from .checks import REGISTRY, identities_for, run_suite
from .sampler import ConfigError, SuiteConfig

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="felderhof", description="Numerical checks for the elliptic Felderhof model")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run identity suites")
    run.add_argument("--suite", default="all", help="suite or identity name, comma separated, or 'all'")
    run.add_argument("--m", type=int, help="number of sites (overrides the default size grid)")
    run.add_argument("--n", type=int, help="number of particles")
    run.add_argument("--nome", type=float, help="elliptic nome; default sweeps 0.05, 0.1, 0.2 where relevant")
    run.add_argument("--samples", type=int, help="samples per size")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--tol", type=float, help="override every tolerance")
    run.add_argument("--report", help="write the JSON report here ('-' for stdout)")
    run.add_argument("--quiet", action="store_true", help="suppress the per-identity lines")

    gold = sub.add_parser("golden", help="generate or check golden fixtures")
    gold.add_argument("action", choices=["generate", "check"])
    gold.add_argument("--path", required=True, help="fixture directory (or .json file)")
    gold.add_argument("--seed", type=int, default=0)

    sub.add_parser("list-identities", help="print every identity with its anchor")
    return parser


def _fmt(x) -> str:
    return "n/a" if x is None else f"{x:.2e}"


def cmd_run(args) -> int:
    cfg = SuiteConfig(
        suites=tuple(s.strip() for s in args.suite.split(",") if s.strip()),
        m=args.m,
        n=args.n,
        nome=args.nome,
        samples=args.samples,
        seed=args.seed,
        tol=args.tol,
    )
    identities_for(cfg.suites)  # fail fast on unknown names
    report = run_suite(cfg)
    if not args.quiet:
        for r in report["results"]:
            status = "PASS" if r["pass"] else "FAIL"
            shown = r.get("min_rel_residual") if r["expect"] == "differ" else r["max_rel_residual"]
            line = f"{status}  {r['identity']:<36} residual {_fmt(shown)}  tol {r['tolerance']:.0e}  samples {r['samples']}"
            if "triage" in r:
                line += f"  [doubled truncation: {_fmt(r['triage']['residual'])}, {r['triage']['verdict']}]"
            if "error" in r:
                line += f"  [{r['error']}]"
            print(line)
    text = json.dumps(report, indent=2, sort_keys=False)
    if args.report == "-":
        print(text)
    elif args.report:
        with open(args.report, "w") as fh:
            fh.write(text + "\n")
    s = report["summary"]
    print(f"{s['checks'] - len(s['failed'])}/{s['checks']} checks passed", file=sys.stderr)
    return EXIT_PASS if s["pass"] else EXIT_FAIL


def cmd_golden(args) -> int:
    if args.action == "generate":
        target = golden.generate(args.path, seed=args.seed)
        print(f"wrote {target}")
        return EXIT_PASS
    try:
        bad = golden.check(args.path)
    except FileNotFoundError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    if bad:
        for name in bad:
            print(f"MISMATCH {name}")
        return EXIT_FAIL
    print("all fixtures match")
    return EXIT_PASS


def cmd_list() -> int:
    for ident in REGISTRY.values():
        print(f"{ident.suite:<13} {ident.name:<38} {ident.anchor}")
    return EXIT_PASS


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "golden":
            return cmd_golden(args)
        return cmd_list()
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
