"""Command-line front end.

Subcommands::

    papillon build    --family clockwise --kappa 2 -m 2
    papillon route    --family absolute -k 1 -m 2 --strategy greedy --from 0 --to 9
    papillon analyze  --family clockwise --kappa 2 -m 3 --strategy cf-random --strict-loop
    papillon compare  --family clockwise --kappa 2 -m 3 --strategy greedy --strategy hypercubic
    papillon export   --family xor --lam 2 -m 2 --format edgelist

Exit status: 0 success, 2 usage or parameter error, 3 a bound or invariant
check failed, 4 I/O error.  Relative ``--output`` paths are resolved against
``$PAPILLON_OUTPUT_DIR`` when it is set.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

from . import __version__
from .analysis import (
    DEFAULT_BUDGET,
    analyze,
    bound_checks,
    compare_strategies,
    route_phases,
)
from .errors import InvariantViolation, PapillonError, RoutingError
from .routing import DEFAULT_SEED, Strategy, StrategyConfig, route
from .topology import DEFAULT_MAX_NODES, Family, Topology, TopologyParams, build

REPORT_SCHEMA = "papillon.report/1"
OUTPUT_DIR_ENV = "PAPILLON_OUTPUT_DIR"

EXIT_OK, EXIT_USAGE, EXIT_INVARIANT, EXIT_IO = 0, 2, 3, 4


class UsageError(PapillonError):
    pass


# ---------------------------------------------------------------- export


def _selected(topo: Topology, nodes: set[int] | None):
    for edge in topo.edges():
        if nodes is None or edge.source in nodes:
            yield edge


def export_graph(topo: Topology, fmt: str, nodes: set[int] | None = None) -> str:
    """Serialise ``topo`` as ``edgelist``, ``dot`` or ``json``.

    ``nodes`` restricts output to edges leaving those sources.  An edge list
    with nothing selected holds a single header comment.
    """
    edges = list(_selected(topo, nodes))
    label = topo.params.label()
    if fmt == "edgelist":
        if not edges:
            return f"# {label}: no edges selected\n"
        return "".join(f"{e.source} {e.target} {e.kind.value}\n" for e in edges)
    if fmt == "dot":
        lines = [f'digraph "{label}" {{']
        lines += [f'  {e.source} -> {e.target} [kind="{e.kind.value}"];' for e in edges]
        lines.append("}")
        return "\n".join(lines) + "\n"
    if fmt == "json":
        keep = {e.source for e in edges} if nodes is not None else None
        doc = {
            "params": topo.params.as_dict(),
            "n": topo.n,
            "warnings": list(topo.warnings),
            "adjacency": [
                [
                    {
                        "target": e.target,
                        "kind": e.kind.value,
                        "kinds": sorted(k.value for k in e.kinds),
                        "offset": e.offset,
                    }
                    for e in out
                ]
                if keep is None or u in keep
                else []
                for u, out in enumerate(topo.adjacency)
            ],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    raise UsageError(f"unknown export format {fmt!r}")


# ---------------------------------------------------------------- args


def _node_set(text: str) -> set[int]:
    out: set[int] = set()
    for part in filter(None, (p.strip() for p in text.split(","))):
        lo, _, hi = part.partition("-")
        out.update(range(int(lo), int(hi or lo) + 1))
    return out


def _add_topology_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", required=True, choices=[f.value for f in Family])
    p.add_argument("--kappa", type=int)
    p.add_argument("-k", type=int)
    p.add_argument("--lam", "--lambda", dest="lam", type=int)
    p.add_argument("-m", type=int)
    p.add_argument("-b", type=int)
    p.add_argument("--max-nodes", type=int, default=DEFAULT_MAX_NODES)


def _add_strategy_args(p: argparse.ArgumentParser, multiple: bool = False) -> None:
    choices = [s.value for s in Strategy]
    if multiple:
        p.add_argument("--strategy", action="append", choices=choices)
    else:
        p.add_argument("--strategy", default="greedy", choices=choices)
    p.add_argument("--metric", choices=["clockwise", "absolute", "xor"])
    p.add_argument("--strict-loop", action="store_true")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--max-hops", type=int)


def _add_output_args(p: argparse.ArgumentParser, formats: list[str], default: str) -> None:
    p.add_argument("--format", choices=formats, default=default)
    p.add_argument("-o", "--output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="papillon", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"papillon {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="construct a topology and print its summary")
    _add_topology_args(p)
    _add_output_args(p, ["json", "text"], "text")

    p = sub.add_parser("route", help="route one pair")
    _add_topology_args(p)
    _add_strategy_args(p)
    p.add_argument("--from", dest="source", type=int, required=True)
    p.add_argument("--to", dest="target", type=int, required=True)
    _add_output_args(p, ["json", "text"], "text")

    for name, helptext in (
        ("analyze", "exhaustive all-pairs statistics and edge loads"),
        ("compare", "compare several strategies on one topology"),
    ):
        p = sub.add_parser(name, help=helptext)
        _add_topology_args(p)
        _add_strategy_args(p, multiple=name == "compare")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
        _add_output_args(p, ["json", "csv", "text"], "json")

    p = sub.add_parser("export", help="write the graph as an edge list, DOT or JSON")
    _add_topology_args(p)
    p.add_argument("--nodes", type=_node_set, help="source selection, e.g. 0-3,7")
    _add_output_args(p, ["edgelist", "dot", "json"], "edgelist")
    return parser


def _params(args: argparse.Namespace) -> TopologyParams:
    fam = Family(args.family)
    wanted = {
        Family.CLOCKWISE: ("kappa", "m"),
        Family.ABSOLUTE: ("k", "m"),
        Family.XOR: ("lam", "m"),
        Family.CHORD_CLOCKWISE: ("b",),
        Family.CHORD_BIDIRECTIONAL: ("b",),
    }[fam]
    values = {name: getattr(args, name) for name in ("kappa", "k", "lam", "m", "b")}
    extra = [name for name, v in values.items() if v is not None and name not in wanted]
    if extra:
        raise UsageError(f"family {fam.value} does not take {', '.join(extra)}")
    return TopologyParams(fam, **{name: values[name] for name in wanted})


def _config(args: argparse.Namespace, strategy: str) -> StrategyConfig:
    return StrategyConfig(
        Strategy(strategy),
        metric=args.metric,
        strict_loop=args.strict_loop,
        seed=args.seed,
        max_hops=args.max_hops,
    )


# ---------------------------------------------------------------- reports


def _report(command: str, topo: Topology, body: dict) -> dict:
    return {
        "schema": REPORT_SCHEMA,
        "version": __version__,
        "command": command,
        "params": topo.params.as_dict(),
        "topology": topo.summary(),
        **body,
    }


def _csv(report: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["strategy", "section", "key", "value"])
    for row in report["strategies"]:
        name = row["config"]["strategy"]
        stats = row["stats"]
        for key in ("worst", "mean", "pairs"):
            writer.writerow([name, "stats", key, stats[key]])
        for hops, mass in stats["histogram"].items():
            writer.writerow([name, "histogram", hops, mass])
        for key, value in row["load"].items():
            if not isinstance(value, list):
                writer.writerow([name, "load", key, value])
        for edge, load in row.get("loads", {}).items():
            writer.writerow([name, "edge_load", edge, load])
        for check in row["checks"]:
            writer.writerow([name, "check", check["name"], "pass" if check["passed"] else "FAIL"])
    return buf.getvalue()


def _text(report: dict) -> str:
    lines = [f"papillon {report['version']} {report['command']} {report['topology']['params']}"]
    lines.append(f"  n={report['topology']['n']} edges={report['topology']['edges']}")
    for row in report.get("strategies", []):
        stats, load = row["stats"], row["load"]
        lines.append(
            f"  {row['config']['strategy']:<17} worst={stats['worst']} mean={stats['mean']}"
            f" (~{stats['mean_float']:.4f}) pi={load['pi']}"
        )
        for check in row["checks"]:
            mark = "ok  " if check["passed"] else "FAIL"
            lines.append(f"    [{mark}] {check['name']}: {check['detail']}")
    for w in report.get("greedy_longer_than_shortest", []):
        lines.append(f"  greedy {w['source']}->{w['target']}: {w['greedy']} hops, shortest {w['shortest']}")
    return "\n".join(lines) + "\n"


def _emit(text: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(text)
        return
    path = Path(output)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not path.is_absolute():
        path = Path(base) / path
    path.write_text(text)


def _dump(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True) + "\n"
    if fmt == "csv":
        return _csv(report)
    return _text(report)


def _strategy_row(topo: Topology, config: StrategyConfig, workers: int, budget: int) -> dict:
    stats, load = analyze(topo, config, workers, budget)
    return {
        "config": config.as_dict(),
        "stats": stats.as_dict(),
        "load": load.digest(),
        "loads": {f"{u}-{v}": str(w) for (u, v), w in sorted(load.loads.items())},
        "checks": [c.as_dict() for c in bound_checks(topo, config, stats, load)],
    }


def _run(args: argparse.Namespace) -> int:
    params = _params(args)
    topo = build(params, args.max_nodes)

    if args.command == "build":
        summary = topo.summary()
        if args.format == "json":
            text = json.dumps(summary, indent=2, sort_keys=True) + "\n"
        else:
            hist = ", ".join(f"{d}:{c}" for d, c in summary["degree_histogram"].items())
            text = f"{params.label()} n={topo.n} edges={topo.edge_count} out-degree {{{hist}}}\n"
            text += "".join(f"warning: {w}\n" for w in topo.warnings)
        _emit(text, args.output)
        return EXIT_OK

    if args.command == "export":
        _emit(export_graph(topo, args.format, args.nodes), args.output)
        return EXIT_OK

    if args.command == "route":
        config = _config(args, args.strategy)
        r = route(topo, config, args.source, args.target)
        r = r.with_phases(route_phases(r, params))
        if args.format == "json":
            doc = {"config": config.as_dict(), "params": params.as_dict(), "route": r.as_dict()}
            text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
        else:
            text = "->".join(map(str, r.nodes)) + f"  ({r.length} hops)\n"
            for h in r.hops:
                text += f"  {h.source}->{h.target} {h.kind.value} remaining={h.remaining} phase={h.phase}\n"
        _emit(text, args.output)
        return EXIT_OK

    if args.command == "analyze":
        config = _config(args, args.strategy)
        body = {"strategies": [_strategy_row(topo, config, args.workers, args.budget)]}
    else:
        strategies = args.strategy or ["greedy", "hypercubic"]
        configs = [_config(args, s) for s in strategies]
        body = compare_strategies(topo, configs, args.workers, budget=args.budget)
    report = _report(args.command, topo, body)
    _emit(_dump(report, args.format), args.output)
    failed = [c for row in report["strategies"] for c in row["checks"] if not c["passed"]]
    return EXIT_INVARIANT if failed else EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _run(args)
    except (InvariantViolation, RoutingError) as exc:
        print(f"papillon: invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except OSError as exc:
        print(f"papillon: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except PapillonError as exc:
        print(f"papillon: {exc}", file=sys.stderr)
        return EXIT_USAGE
