"""Command-line harness: run single protocols, batch benchmarks, and the
built-in verification suites.

Exit codes: 0 success, 1 invariant or protocol failure, 2 usage error,
3 simulation timeout.
"""

from __future__ import annotations

import argparse
import csv
import random
import sys
from pathlib import Path
from typing import Any

from . import bounds, selfcheck
from .engine import (
    Graph,
    ProtocolError,
    SimulationTimeout,
    diameter,
    read_graph,
    write_trace,
)
from .graphs import GraphSpec, generate, parse_graph_spec
from .multicast import multi_broadcast
from .traversal import dfs, gossip
from .waves import (
    ProtocolRun,
    broadcast,
    collect_messages,
    elect_leader,
    estimate_diameter,
    get_message_length,
)

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_USAGE = 2
EXIT_TIMEOUT = 3

BENCH_COLUMNS = [
    "family",
    "n",
    "D",
    "L",
    "M",
    "k",
    "measuredRounds",
    "upperBoundExpr",
    "lowerBoundExpr",
    "ratio",
]


def _load_graph(text: str) -> tuple[Graph, str]:
    """Accept either a family spec string or a path to an edge-list file."""
    if ":" in text and not Path(text).exists():
        spec = parse_graph_spec(text)
        return generate(spec), spec.family
    path = Path(text)
    if not path.exists():
        raise ValueError(f"graph spec/file not found: {text}")
    with path.open() as fh:
        return read_graph(fh), "file"


def _parse_messages(text: str | None, nodes: list[int], rng: random.Random,
                    width: int) -> dict[int, str]:
    if text is None or text == "random":
        return {u: "".join(rng.choice("01") for _ in range(width)) for u in nodes}
    msgs: dict[int, str] = {}
    for item in text.split(","):
        key, _, val = item.partition("=")
        if not val:
            raise ValueError(f"message entry {item!r} is not id=bits")
        msgs[int(key)] = val
    return msgs


def _parse_sources(text: str | None, graph: Graph, rng: random.Random, k: int) -> list[int]:
    if text is None or text == "random":
        k = min(k, graph.n)
        return sorted(rng.sample(list(graph.nodes), k))
    return sorted(int(tok) for tok in text.split(","))


def _dispatch(protocol: str, graph: Graph, args: argparse.Namespace,
              rng: random.Random) -> tuple[ProtocolRun, dict[str, Any]]:
    """Run one protocol; returns (run, facts-for-the-bench-row)."""
    width = args.msg_bits
    d = diameter(graph)
    facts: dict[str, Any] = {"p": width, "k": 1}
    if protocol == "broadcast":
        source = args.source if args.source is not None else graph.max_id
        msgs = _parse_messages(args.message and f"{source}={args.message}", [source], rng, width)
        facts["p"] = len(msgs[source])
        run = broadcast(graph, source, msgs[source], max_rounds=args.max_rounds)
    elif protocol == "elect":
        run = elect_leader(graph, args.dhat, args.lhat, max_rounds=args.max_rounds)
    elif protocol == "diameter":
        run = estimate_diameter(graph, args.leader, max_rounds=args.max_rounds)
    elif protocol == "dfs":
        run = dfs(graph, args.leader, args.lhat, max_rounds=args.max_rounds)
    elif protocol == "gossip":
        msgs = _parse_messages(args.messages, list(graph.nodes), rng, width)
        facts["p"] = max(len(m) for m in msgs.values())
        facts["k"] = graph.n
        run = gossip(graph, msgs, args.dhat, args.lhat, max_rounds=args.max_rounds)
    elif protocol in ("collect", "msglen"):
        sources = _parse_sources(args.sources, graph, rng, args.k)
        if not sources:
            raise ValueError("collect/msglen need at least one source")
        msgs = _parse_messages(args.messages, sources, rng, width)
        leader = args.leader if args.leader is not None else graph.max_id
        facts["p"] = max(len(m) for m in msgs.values())
        facts["k"] = len(sources)
        if protocol == "collect":
            run = collect_messages(graph, leader, set(sources), msgs,
                                   max_rounds=args.max_rounds)
        else:
            run = get_message_length(graph, leader, set(sources), msgs,
                                     max_rounds=args.max_rounds)
    elif protocol in ("mb-prov", "mb-noprov"):
        sources = _parse_sources(args.sources, graph, rng, args.k)
        if not sources:
            raise ValueError("multi-broadcast needs a nonempty source set")
        msgs = _parse_messages(args.messages, sources, rng, width)
        facts["p"] = max(len(m) for m in msgs.values())
        facts["k"] = len(sources)
        run = multi_broadcast(graph, set(sources), msgs, args.dhat, args.lhat,
                              provenance=protocol == "mb-prov",
                              max_rounds=args.max_rounds)
    else:
        raise ValueError(f"unknown protocol {protocol!r}")
    facts["D"] = d
    facts["L"] = graph.label_range
    facts["M"] = 2 ** facts["p"]
    return run, facts


def _print_report(run: ProtocolRun) -> None:
    report = run.report
    print(f"totalRounds: {report.total_rounds}")
    for node in sorted(report.outputs):
        print(f"  node {node}: {report.outputs[node]}")
    for chk in report.bound_checks:
        flag = "pass" if chk.passed else "FAIL"
        print(f"  [{flag}] {chk.name}: measured={chk.measured} bound={chk.bound}")


def _cmd_run(args: argparse.Namespace) -> int:
    graph, _family = _load_graph(args.graph)
    rng = random.Random(args.seed)
    run, _facts = _dispatch(args.protocol, graph, args, rng)
    _print_report(run)
    if args.trace:
        with open(args.trace, "w") as fh:
            write_trace(run.trace, fh)
        print(f"trace written to {args.trace}")
    return EXIT_OK if run.report.all_passed else EXIT_INVARIANT


def _cmd_bench(args: argparse.Namespace) -> int:
    rows: list[dict[str, Any]] = []
    status = EXIT_OK
    try:
        for spec_text in args.graph or []:
            for trial in range(args.trials):
                spec = parse_graph_spec(spec_text)
                spec = GraphSpec(spec.family, spec.n, spec.seed + trial,
                                 spec.edge_probability, spec.label_range)
                graph = generate(spec)
                rng = random.Random(spec.seed * 7919 + trial)
                run, facts = _dispatch(args.protocol, graph, args, rng)
                upper = bounds.upper_rounds(
                    args.protocol, graph.n, facts["D"], facts["p"],
                    run.report.extras.get("lhat", 1 << graph.max_id.bit_length()),
                    args.dhat, facts["k"],
                )
                lower = bounds.floor_rounds(
                    args.protocol, facts["D"], facts["L"], facts["M"], facts["k"]
                )
                measured = run.report.total_rounds
                rows.append(
                    {
                        "family": spec.family,
                        "n": graph.n,
                        "D": facts["D"],
                        "L": facts["L"],
                        "M": facts["M"],
                        "k": facts["k"],
                        "measuredRounds": measured,
                        "upperBoundExpr": f"{upper:.1f}",
                        "lowerBoundExpr": lower,
                        "ratio": f"{measured / upper:.4f}" if upper else "",
                    }
                )
                if not run.report.all_passed or measured < lower:
                    status = EXIT_INVARIANT
    finally:
        out = open(args.csv, "w", newline="") if args.csv else sys.stdout
        try:
            writer = csv.DictWriter(out, fieldnames=BENCH_COLUMNS)
            writer.writeheader()
            writer.writerows(rows)
        finally:
            if args.csv:
                out.close()
    return status


def _cmd_verify(args: argparse.Namespace) -> int:
    results = selfcheck.run_suite(args.suite)
    width = max(len(r.name) for r in results)
    failed = 0
    for r in results:
        flag = "pass" if r.passed else "FAIL"
        print(f"[{flag}] {r.suite:>9} :: {r.name:<{width}} {r.detail}")
        failed += 0 if r.passed else 1
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_INVARIANT


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beepsim",
        description="Beep-model protocol simulator and verification harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one protocol on one graph")
    run_p.add_argument("--protocol", required=True, choices=bounds.PROTOCOLS)
    run_p.add_argument("--graph", required=True,
                       help="family spec (e.g. er:n=25,p=0.2,seed=7) or edge-list file")
    run_p.add_argument("--message", help="payload bits for broadcast")
    run_p.add_argument("--messages",
                       help="per-node payloads id=bits,id=bits or 'random'")
    run_p.add_argument("--sources", help="source ids a,b,c or 'random'")
    run_p.add_argument("--source", type=int, help="broadcast source id")
    run_p.add_argument("--leader", type=int, help="leader id override")
    run_p.add_argument("--dhat", type=int, help="diameter upper bound fed to nodes")
    run_p.add_argument("--lhat", type=int, help="label-range bound fed to nodes")
    run_p.add_argument("--k", type=int, default=2, help="random source count")
    run_p.add_argument("--msg-bits", type=int, default=4,
                       help="random message width in bits")
    run_p.add_argument("--seed", type=int, default=0)
    run_p.add_argument("--max-rounds", type=int)
    run_p.add_argument("--trace", help="write the JSONL trace here")
    run_p.set_defaults(func=_cmd_run)

    bench_p = sub.add_parser("bench", help="sweep graph specs, emit a CSV")
    bench_p.add_argument("--protocol", required=True, choices=bounds.PROTOCOLS)
    bench_p.add_argument("--graph", action="append",
                         help="family spec; repeat for a sweep")
    bench_p.add_argument("--trials", type=int, default=1)
    bench_p.add_argument("--csv", help="CSV output path (default stdout)")
    bench_p.add_argument("--sources", help="source ids a,b,c or 'random'")
    bench_p.add_argument("--source", type=int)
    bench_p.add_argument("--leader", type=int)
    bench_p.add_argument("--message")
    bench_p.add_argument("--messages")
    bench_p.add_argument("--dhat", type=int)
    bench_p.add_argument("--lhat", type=int)
    bench_p.add_argument("--k", type=int, default=2)
    bench_p.add_argument("--msg-bits", type=int, default=4)
    bench_p.add_argument("--seed", type=int, default=0)
    bench_p.add_argument("--max-rounds", type=int)
    bench_p.set_defaults(func=_cmd_bench)

    verify_p = sub.add_parser("verify", help="run built-in invariant suites")
    verify_p.add_argument("--suite", default="all", choices=selfcheck.SUITES)
    verify_p.set_defaults(func=_cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except SimulationTimeout as exc:
        print(f"timeout: {exc}", file=sys.stderr)
        return EXIT_TIMEOUT
    except ProtocolError as exc:
        print(f"protocol error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
