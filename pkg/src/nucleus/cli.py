"""Command-line interface: ``nucleus {decompose,validate,gen-rmat,bench}``.

Exit codes: 0 success, 1 validation failure, 2 usage or runtime error.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time

import numpy as np

from .exceptions import NucleusError
from .graph import cpu_count, generate_rmat, read_edge_list, write_edge_list
from .peeling import PeelConfig, peel, prepare
from .validation import all_pairs, max_threads, random_instances, validate_graph

SCHEMA = 1
BENCH_FIELDS = ["graph", "r", "s", "levels", "aggregation", "threads", "phase", "seconds", "peak_table_bytes"]
PHASES = ("orient", "build", "count", "peel")


def _threads(text):
    if text == "max":
        return cpu_count()
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("thread count must be >= 1 or 'max'")
    return value


def _int_list(text):
    return [int(x) for x in text.split(",") if x]


def _add_tuning(p, sweep=False):
    p.add_argument("--r", type=int, required=True, help="clique size being peeled")
    p.add_argument("--s", type=int, required=True, help="clique size being counted")
    if not sweep:
        p.add_argument("--levels", type=int, default=2, help="table levels, 1..r (default 2)")
        p.add_argument("--agg", choices=["array", "list-buffer", "hash"], default=None,
                       help="update aggregation (default: hash for (2,3), list-buffer otherwise)")
        p.add_argument("--threads", type=_threads, default=1, help="worker threads or 'max'")
    p.add_argument("--contiguous", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--inverse", choices=["binary", "pointer"], default="pointer")
    p.add_argument("--relabel", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--buffer-size", type=int, default=64)
    p.add_argument("--contract", action=argparse.BooleanOptionalAction, default=None,
                   help="drop peeled edges during (2,3) peeling (default on for (2,3))")
    p.add_argument("--contract-edge-factor", type=float, default=2.0,
                   help="contract after this many peeled edges per vertex")
    p.add_argument("--contract-fraction", type=float, default=0.25,
                   help="rebuild lists that lost at least this fraction")
    p.add_argument("--bucket", choices=["open", "dense"], default="open")
    p.add_argument("--orientation", choices=["degeneracy", "degree"], default="degeneracy")
    p.add_argument("--seed", type=int, default=0)


def _config(args, **over) -> PeelConfig:
    fields = dict(
        levels=getattr(args, "levels", 2), contiguous=args.contiguous, inverse_map=args.inverse,
        relabel=args.relabel, aggregation=getattr(args, "agg", None), buffer_size=args.buffer_size,
        contract=args.contract, contract_edge_factor=args.contract_edge_factor,
        contract_fraction=args.contract_fraction, bucket=args.bucket, orientation=args.orientation,
        threads=getattr(args, "threads", 1), seed=args.seed)
    fields.update(over)
    return PeelConfig(**fields)


def build_parser():
    parser = argparse.ArgumentParser(prog="nucleus", description="(r,s) nucleus decomposition of graphs")
    sub = parser.add_subparsers(dest="command", required=True)

    d = sub.add_parser("decompose", help="decompose one graph and print a JSON report")
    d.add_argument("--input", required=True, help="SNAP edge list (or NUCGRAPH1 cache)")
    _add_tuning(d)
    d.add_argument("--cores-out", help="write index,core CSV here")
    d.add_argument("--with-vertices", action="store_true", help="add clique vertices to --cores-out rows")
    d.add_argument("--report", help="also write the JSON report to this path")
    d.set_defaults(func=cmd_decompose)

    v = sub.add_parser("validate", help="compare every configuration with the brute-force oracle")
    v.add_argument("--input", help="small SNAP edge list")
    v.add_argument("--random", nargs=3, metavar=("N", "P", "SEEDS"),
                   help="G(N,P) graphs for seeds 0..SEEDS-1")
    v.add_argument("--r", type=int, help="restrict to one r (default: all r<s<=5)")
    v.add_argument("--s", type=int)
    v.add_argument("--threads-max", type=_threads, default=None,
                   help="thread count used as 'max' in the matrix (default max(4, cores))")
    v.add_argument("--corrupt-count", help=argparse.SUPPRESS)
    v.set_defaults(func=cmd_validate)

    g = sub.add_parser("gen-rmat", help="write a recursive-matrix random graph")
    g.add_argument("--scale", type=int, required=True)
    g.add_argument("--edge-factor", type=int, default=16)
    g.add_argument("--a", type=float, default=0.5)
    g.add_argument("--b", type=float, default=0.1)
    g.add_argument("--c", type=float, default=0.1)
    g.add_argument("--d", type=float, default=0.3)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--output", "-o", help="destination (default stdout)")
    g.set_defaults(func=cmd_gen_rmat)

    b = sub.add_parser("bench", help="time a configuration sweep and write CSV rows")
    b.add_argument("--input", action="append", default=[], help="edge list; repeatable")
    b.add_argument("--rmat", type=int, action="append", default=[], metavar="SCALE",
                   help="generate an rMAT graph of this scale; repeatable")
    b.add_argument("--edge-factor", type=int, default=16)
    _add_tuning(b, sweep=True)
    b.add_argument("--threads", type=lambda t: [_threads(x) for x in t.split(",")], default=[1],
                   help="comma-separated thread counts")
    b.add_argument("--levels", type=_int_list, default=[2], help="comma-separated level counts")
    b.add_argument("--agg", type=lambda t: t.split(","), default=[None],
                   help="comma-separated aggregation strategies")
    b.add_argument("--output", "-o", help="CSV destination (default stdout)")
    b.set_defaults(func=cmd_bench)
    return parser


# ------------------------------------------------------------------ commands

def run_report(G, r, s, cfg, parse_seconds=0.0, path=None):
    prep = prepare(G, r, s, cfg)
    res = peel(prep)
    timings = {"parse": parse_seconds}
    timings.update({k: res.timings[k] for k in PHASES})
    report = {
        "schema": SCHEMA,
        "graph": {"path": path, "n": G.n, "m": G.m},
        "r": r,
        "s": s,
        "rho": res.rho,
        "max_core": res.max_core,
        "total_cliques": res.total_cliques,
        "histogram": {str(k): v for k, v in res.histogram().items()},
        "timings": timings,
        "memory": res.memory,
        "config": res.config,
        "threads": res.config["threads"],
    }
    return report, res


def cmd_decompose(args):
    t0 = time.perf_counter()
    G = read_edge_list(args.input)
    parse_seconds = time.perf_counter() - t0
    report, res = run_report(G, args.r, args.s, _config(args), parse_seconds, args.input)
    if args.cores_out:
        labels = G.labels if G.labels is not None else np.arange(G.n)
        with open(args.cores_out, "w", newline="") as fh:
            w = csv.writer(fh)
            head = ["index", "core"]
            if args.with_vertices:
                head += [f"v{i}" for i in range(args.r)]
            w.writerow(head)
            for idx, core, verts in zip(res.indices, res.cores, res.cliques):
                row = [int(idx), int(core)]
                if args.with_vertices:
                    row += [int(x) for x in labels[verts]]
                w.writerow(row)
    text = json.dumps(report, indent=2)
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


def cmd_validate(args):
    if (args.r is None) != (args.s is None):
        raise NucleusError("give both --r and --s, or neither")
    pairs = [(args.r, args.s)] if args.r is not None else all_pairs()
    corrupt = None
    if args.corrupt_count:
        i, delta = args.corrupt_count.split(":")
        corrupt = (int(i), int(delta))
    instances = []
    if args.input:
        instances.append((args.input, read_edge_list(args.input)))
    if args.random:
        n, p, seeds = int(args.random[0]), float(args.random[1]), int(args.random[2])
        instances.extend((f"gnp(n={n},p={p},seed={seed})", G) for seed, G in random_instances(n, p, range(seeds)))
    if not instances:
        raise NucleusError("validate needs --input or --random")
    threads_max = args.threads_max or max_threads()
    failed = 0
    runs = 0
    for name, G in instances:
        rep = validate_graph(G, pairs, threads_max, corrupt)
        runs += rep.runs
        if rep.ok:
            print(f"PASS {name}: {rep.runs} runs match the oracle")
        else:
            failed += 1
            print(f"FAIL {name}: {len(rep.mismatches)} of {rep.runs} runs differ, "
                  f"{rep.monotone_violations} non-monotone")
            if rep.mismatches:
                print(f"  first difference: {rep.mismatches[0].describe()}")
    print(f"{len(instances) - failed}/{len(instances)} graphs passed ({runs} runs)")
    return 1 if failed else 0


def cmd_gen_rmat(args):
    G = generate_rmat(args.scale, args.edge_factor, args.a, args.b, args.c, args.d, args.seed)
    if args.output:
        write_edge_list(G, args.output)
    else:
        sys.stdout.write(G.to_text())
    return 0


def cmd_bench(args):
    graphs = [(os.path.basename(p), lambda p=p: read_edge_list(p)) for p in args.input]
    graphs += [(f"rmat{sc}", lambda sc=sc: generate_rmat(sc, args.edge_factor, seed=args.seed))
               for sc in args.rmat]
    if not graphs:
        raise NucleusError("bench needs --input or --rmat")
    out = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        w = csv.DictWriter(out, fieldnames=BENCH_FIELDS)
        w.writeheader()
        for name, load in graphs:
            G = load()
            for lv in args.levels:
                for agg in args.agg:
                    for th in args.threads:
                        base = {"graph": name, "r": args.r, "s": args.s, "levels": lv,
                                "aggregation": agg or "default", "threads": th}
                        try:
                            cfg = _config(args, levels=lv, aggregation=agg, threads=th)
                            prep = prepare(G, args.r, args.s, cfg)
                            res = peel(prep)
                            nbytes = res.memory["key_memory_bytes"]
                            base["aggregation"] = res.config["aggregation"]
                            for ph in PHASES:
                                w.writerow({**base, "phase": ph, "seconds": f"{res.timings[ph]:.6f}",
                                            "peak_table_bytes": nbytes})
                        except (NucleusError, ValueError) as exc:
                            print(f"bench row failed ({name}, levels={lv}, agg={agg}, threads={th}): {exc}",
                                  file=sys.stderr)
                            w.writerow({**base, "phase": "error", "seconds": "", "peak_table_bytes": ""})
                        out.flush()
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (NucleusError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
