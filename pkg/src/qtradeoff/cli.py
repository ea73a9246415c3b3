"""Command line entry point: ``qtradeoff {validate,query,generate,table1,issa}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .bounds import issa_iterations
from .errors import InvalidNetworkError, TradeoffError
from .harness import Table1Config, run_query, run_table1, write_table_csv
from .io import dump_json, load_network, network_to_dict, qpn_to_dict
from .netgen import GenConfig, generate
from .reduction import Resolver, Strategy, StrategyKind

EXIT_DECISIVE, EXIT_ERROR, EXIT_AMBIGUOUS = 0, 1, 2


def _err(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return EXIT_ERROR


def _report_invalid(exc: InvalidNetworkError) -> int:
    for v in exc.violations:
        print(f"{v.kind} {v.node}: {v.detail}", file=sys.stderr)
    return EXIT_ERROR


def cmd_validate(args) -> int:
    load_network(args.file)
    print("OK")
    return EXIT_DECISIVE


def cmd_query(args) -> int:
    strategy = Strategy(StrategyKind(args.strategy), args.seed)
    sign, stats = run_query(args.file, args.decision, args.target, strategy, Resolver(args.resolver))
    if args.json:
        print(json.dumps({"sign": sign.symbol, **stats.as_dict()}, indent=2))
    else:
        print(f"sign: {sign.symbol}")
        for key, value in stats.as_dict().items():
            if key == "reduced":
                value = ",".join(value) or "-"
            print(f"{key}: {value}")
    return EXIT_DECISIVE if sign.is_decisive else EXIT_AMBIGUOUS


def cmd_generate(args) -> int:
    qpn, net = generate(GenConfig(args.n, args.l, args.mc, args.seed))
    text = dump_json(network_to_dict(net), args.out)
    if args.out is None:
        sys.stdout.write(text)
    if args.qpn_out:
        dump_json(qpn_to_dict(qpn), args.qpn_out)
    return EXIT_DECISIVE


def cmd_table1(args) -> int:
    doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
    if args.seed is not None:
        doc["seed"] = args.seed
    rows = run_table1(Table1Config.from_dict(doc))
    text = write_table_csv(rows)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    if args.records:
        with open(args.records, "w", encoding="utf-8") as fh:
            for row in rows:
                for rec in row.records:
                    fh.write(json.dumps(rec.as_dict(), sort_keys=True) + "\n")
    return EXIT_DECISIVE


def cmd_issa(args) -> int:
    net = load_network(args.file)
    level = None
    for i, level in enumerate(issa_iterations(net, args.decision, args.target)):
        step = "-" if level.refined is None else f"{level.refined[0]}[{level.refined[1]}]"
        verdict = "unresolved" if level.verdict is None else level.verdict.symbol
        print(f"level {i}: split={step} verdict={verdict}")
        if args.bounds:
            print(json.dumps(level.bounds.as_dict(), sort_keys=True))
    sign = level.verdict
    print(f"sign: {sign.symbol}")
    return EXIT_DECISIVE if sign.is_decisive else EXIT_AMBIGUOUS


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qtradeoff", description="Qualitative tradeoff resolution tools.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="check a network file")
    s.add_argument("file")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("query", help="resolve the sign of decision on target")
    s.add_argument("file")
    s.add_argument("--decision", required=True)
    s.add_argument("--target", required=True)
    s.add_argument("--strategy", choices=[k.value for k in StrategyKind], default="x-first")
    s.add_argument("--resolver", choices=[r.value for r in Resolver], default="marginalize")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_query)

    s = sub.add_parser("generate", help="random sign-consistent network")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--l", type=int, required=True)
    s.add_argument("--mc", type=int, default=2)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.add_argument("--qpn-out")
    s.set_defaults(func=cmd_generate)

    s = sub.add_parser("table1", help="sweep random networks and report savings ratios")
    s.add_argument("--config", required=True)
    s.add_argument("--out")
    s.add_argument("--records", help="optional JSONL of per-instance records")
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_table1)

    s = sub.add_parser("issa", help="bound the decision->target CDFs by state abstraction")
    s.add_argument("file")
    s.add_argument("--decision", required=True)
    s.add_argument("--target", required=True)
    s.add_argument("--bounds", action="store_true", help="print bounds at every level")
    s.set_defaults(func=cmd_issa)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InvalidNetworkError as exc:
        return _report_invalid(exc)
    except (TradeoffError, OSError, ValueError, KeyError) as exc:
        return _err(str(exc))


if __name__ == "__main__":
    sys.exit(main())
