"""Command-line entry point: ``dqczne <command>``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import harness
from .circuit import BENCHMARKS, Circuit, decompose_toffoli, generate_benchmark
from .partition import build_interaction_graph, cut_edges, modularity, partition
from .qasm import QasmError, check_qasm, emit_qasm


def _cmd_run(args: argparse.Namespace) -> int:
    data = harness.load_config(args.config)
    arrays = [k for k, v in data.items() if isinstance(v, list)]
    if arrays:
        raise harness.ConfigError(f"run takes scalar values only; use sweep for axes {arrays}")
    rec = harness.run_experiment(harness.ExperimentConfig(**data))
    print(harness.record_json(rec))
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    grid = harness.load_config(args.config) if args.config else dict(harness.DEFAULT_GRID)
    records = harness.sweep(grid, args.out, workers=args.workers)
    skipped = sum(not r.ok for r in records)
    print(f"wrote {len(records)} rows ({skipped} skipped) to {args.out}", file=sys.stderr)
    return 0


def _cmd_summarize(args: argparse.Namespace) -> int:
    rows = harness.read_csv(args.input)
    group_by = [g for g in args.group_by.split(",") if g]
    missing = [g for g in group_by if rows and g not in rows[0]]
    if missing:
        raise harness.ConfigError(f"unknown group-by columns: {missing}")
    sys.stdout.write(harness.summary_to_csv(harness.summarize(rows, group_by, args.trim)))
    return 0


def _read_qasm(path: str) -> Circuit:
    c, diags = check_qasm(Path(path).read_bytes())
    if c is None:
        raise QasmError(diags)
    return c


def _cmd_partition(args: argparse.Namespace) -> int:
    c = _read_qasm(args.qasm)
    a = partition(c, args.k)
    g = build_interaction_graph(decompose_toffoli(c))
    q = modularity(g, [a.members(p) for p in range(a.k)]) if g.total_weight else None
    print(json.dumps({"k": a.k, "assignment": list(a.part_of), "cut_count": cut_edges(c, a), "modularity": q}))
    return 0


def _cmd_gen(args: argparse.Namespace) -> int:
    c = generate_benchmark(args.alg, args.n, args.oracle)
    if args.qasm:
        sys.stdout.write(emit_qasm(c))
        return 0
    gates = [
        {k: v for k, v in (("kind", g.kind), ("qubits", list(g.qubits)), ("angle", g.angle), ("clbit", g.clbit)) if v is not None}
        for g in c.gates
    ]
    print(json.dumps({"num_qubits": c.num_qubits, "num_clbits": c.num_clbits, "data_qubits": list(c.data_qubits), "gates": gates}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dqczne", description="Distributed circuit ZNE experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one experiment and print its record as JSON")
    r.add_argument("--config", required=True)
    r.set_defaults(func=_cmd_run)

    s = sub.add_parser("sweep", help="run a parameter grid and write a CSV")
    s.add_argument("--config", help="flat TOML file; list values are sweep axes (default: built-in grid)")
    s.add_argument("--out", required=True)
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=_cmd_sweep)

    m = sub.add_parser("summarize", help="aggregate a sweep CSV")
    m.add_argument("--in", dest="input", required=True)
    m.add_argument("--group-by", default="strategy", help="comma-separated column names")
    m.add_argument("--trim", type=float, default=harness.DEFAULT_TRIM)
    m.set_defaults(func=_cmd_summarize)

    t = sub.add_parser("partition", help="partition a QASM circuit")
    t.add_argument("--qasm", required=True)
    t.add_argument("-k", type=int, required=True)
    t.set_defaults(func=_cmd_partition)

    g = sub.add_parser("gen", help="generate a benchmark circuit")
    g.add_argument("--alg", required=True, choices=BENCHMARKS)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--oracle", default="balanced", choices=("balanced", "constant"))
    g.add_argument("--qasm", action="store_true", help="emit OpenQASM instead of JSON")
    g.set_defaults(func=_cmd_gen)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except QasmError as e:
        for d in e.diagnostics:
            print(f"{args.qasm}:{d.line}:{d.column}: {d.message}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as e:
        print(f"dqczne: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
