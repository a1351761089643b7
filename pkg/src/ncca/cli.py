"""Command-line front end.

Exit codes: 0 yes/success, 1 no, 2 usage error or resource limit.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from .ca import NC_RULES, Configuration, ResourceLimitError, RuleVector, evolve
from .decide import MIN_CELLS, Accepted, Reason, decide_ncca
from .oracle import DEFAULT_CAP, brute_force_is_ncca, build_stg, census
from .rtree import build_tree
from .synth import ReplayError, synthesize

EXIT_YES, EXIT_NO, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _rules(text: str) -> RuleVector:
    try:
        return RuleVector.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _config(text: str) -> Configuration:
    try:
        return Configuration.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def describe(reason: Reason) -> str:
    if isinstance(reason, Accepted):
        return "accepted"
    fields = ", ".join(f"{k}={v}" for k, v in reason.__dict__.items() if v is not None)
    return f"{type(reason).__name__}({fields})"


def _emit(obj) -> None:
    print(json.dumps(obj, indent=None, sort_keys=True))


# -- subcommands --------------------------------------------------------------


def cmd_decide(args) -> int:
    if len(args.rules) < MIN_CELLS:
        raise UsageError(
            f"decide needs n >= {MIN_CELLS}; try `ncca oracle --rules {args.rules}`"
        )
    verdict = decide_ncca(args.rules, trace=args.trace)
    if args.format == "json":
        _emit(verdict.to_json())
    else:
        print("yes" if verdict.accepted else "no")
        print(f"reason: {describe(verdict.reason)}")
        if args.trace:
            _emit(verdict.to_json()["trace"])
    return EXIT_YES if verdict.accepted else EXIT_NO


def cmd_synthesize(args) -> int:
    if args.n < MIN_CELLS:
        raise UsageError(f"synthesize needs n >= {MIN_CELLS}")
    if args.count < 1:
        raise UsageError("--count must be positive")
    choices = None
    if args.choices is not None:
        if args.count != 1:
            raise UsageError("--choices replays exactly one vector")
        with open(args.choices) as fh:
            data = json.load(fh)
        choices = data["choices"] if isinstance(data, dict) else data
    for j in range(args.count):
        seed = args.seed + j
        rv, trace = synthesize(args.n, seed, choices=choices)
        if args.trace:
            _emit(trace.to_json())
        else:
            print(rv)
    return EXIT_YES


def cmd_oracle(args) -> int:
    ok = brute_force_is_ncca(args.rules, cap=args.cap)
    if args.format == "json":
        _emit({"rules": list(args.rules), "ncca": ok})
    else:
        print("yes" if ok else "no")
    return EXIT_YES if ok else EXIT_NO


def cmd_simulate(args) -> int:
    if len(args.init) != len(args.rules):
        raise UsageError(
            f"--init has {len(args.init)} cells but --rules has {len(args.rules)}"
        )
    for config in evolve(args.rules, args.init, args.steps):
        print(config)
    return EXIT_YES


def cmd_tree(args) -> int:
    tree = build_tree(args.rules, prune=args.prune)
    if args.format == "json":
        _emit(tree.to_json())
    else:
        sys.stdout.write(tree.to_dot())
    return EXIT_YES


def cmd_stg(args) -> int:
    stg = build_stg(args.rules, cap=args.cap)
    if args.format == "json":
        _emit(stg.to_json())
    else:
        sys.stdout.write(stg.to_dot())
    return EXIT_YES


def cmd_enumerate(args) -> int:
    try:
        alphabet = [int(a) for a in args.alphabet.split(",")]
    except ValueError:
        raise UsageError(f"malformed alphabet {args.alphabet!r}") from None
    result = census(args.n, alphabet, jobs=args.jobs)
    if args.format == "json":
        _emit(result.to_json())
    else:
        print(result.count)
    return EXIT_YES


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="ncca",
        description="Decide, synthesize and inspect number-conserving non-uniform ECAs.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def rules_arg(sp):
        sp.add_argument("--rules", type=_rules, required=True, help="e.g. 192,136,184,252,204,238")

    sp = sub.add_parser("decide", help="linear-time decision")
    rules_arg(sp)
    sp.add_argument("--trace", action="store_true", help="emit per-level super nodes as JSON")
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.set_defaults(func=cmd_decide)

    sp = sub.add_parser("synthesize", help="build number-conserving rule vectors")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--count", type=int, default=1, help="vectors for seeds seed..seed+count-1")
    sp.add_argument("--choices", help="JSON file of alpha choices to replay")
    sp.add_argument("--trace", action="store_true", help="print the JSON trace instead")
    sp.set_defaults(func=cmd_synthesize)

    sp = sub.add_parser("oracle", help="brute force over all 2^n states")
    rules_arg(sp)
    sp.add_argument("--cap", type=int, default=DEFAULT_CAP)
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("simulate", help="print T+1 successive configurations")
    rules_arg(sp)
    sp.add_argument("--init", type=_config, required=True)
    sp.add_argument("--steps", type=int, default=1)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("tree", help="weighted reachability tree")
    rules_arg(sp)
    sp.add_argument("--prune", action="store_true", help="skip sub-node subtrees")
    sp.add_argument("--format", choices=("dot", "json"), default="dot")
    sp.set_defaults(func=cmd_tree)

    sp = sub.add_parser("stg", help="state transition graph")
    rules_arg(sp)
    sp.add_argument("--cap", type=int, default=DEFAULT_CAP)
    sp.add_argument("--format", choices=("dot", "json"), default="dot")
    sp.set_defaults(func=cmd_stg)

    sp = sub.add_parser("enumerate", help="count conserving vectors over an alphabet")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--jobs", type=int, default=0, help="worker processes; 0 = all CPUs")
    sp.add_argument("--alphabet", default=",".join(map(str, NC_RULES)))
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.set_defaults(func=cmd_enumerate)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_YES
    try:
        return args.func(args)
    except (UsageError, ResourceLimitError, ReplayError, ValueError, OSError) as exc:
        print(f"ncca {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
