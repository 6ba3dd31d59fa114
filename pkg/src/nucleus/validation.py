"""Cross-checking every configuration against the brute-force oracle."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .graph import UndirectedGraph, cpu_count
from .oracle import oracle_nucleus
from .peeling import PeelConfig, peel, prepare

INVERSE_MAPS = ("binary", "pointer")
AGGREGATIONS = ("array", "list-buffer", "hash")
BUCKETS = ("open", "dense")


def max_threads() -> int:
    """Thread count standing for "max" in the matrix; at least 4 so multi-worker paths run on any host."""
    return max(4, cpu_count())


def all_pairs(top=5):
    return [(r, s) for s in range(2, top + 1) for r in range(1, s)]


def config_matrix(r, threads_max=None):
    """Every (levels, inverse map, aggregation, bucket, threads) combination for ``r``."""
    threads_max = threads_max or max_threads()
    for lv, inv, agg, bucket, th in product(range(1, min(r, 3) + 1), INVERSE_MAPS, AGGREGATIONS,
                                            BUCKETS, sorted({1, threads_max})):
        yield PeelConfig(levels=lv, inverse_map=inv, aggregation=agg, bucket=bucket, threads=th)


@dataclass
class Mismatch:
    r: int
    s: int
    config: PeelConfig
    clique: tuple | None
    expected: int | None
    got: int | None
    detail: str = ""

    def describe(self):
        c = self.config
        where = (f"(r,s)=({self.r},{self.s}) levels={c.levels} inverse={c.inverse_map} "
                 f"agg={c.aggregation} bucket={c.bucket} threads={c.threads}")
        if self.clique is None:
            return f"{where}: {self.detail}"
        return f"{where}: clique {self.clique} expected core {self.expected}, got {self.got}"


@dataclass
class ValidationReport:
    runs: int = 0
    mismatches: list = field(default_factory=list)
    monotone_violations: int = 0

    @property
    def ok(self):
        return not self.mismatches and self.monotone_violations == 0

    def merge(self, other):
        self.runs += other.runs
        self.mismatches.extend(other.mismatches)
        self.monotone_violations += other.monotone_violations
        return self


def _first_diff(expected, got):
    for key in sorted(set(expected) | set(got)):
        if expected.get(key) != got.get(key):
            return key, expected.get(key), got.get(key)
    return None


def validate_graph(G: UndirectedGraph, pairs=None, threads_max=None, corrupt=None) -> ValidationReport:
    """Run the full configuration matrix on ``G`` and compare with the oracle."""
    rep = ValidationReport()
    for r, s in pairs or all_pairs():
        truth = oracle_nucleus(G, r, s)
        for lv in range(1, min(r, 3) + 1):
            prep = prepare(G, r, s, PeelConfig(levels=lv))
            for cfg in config_matrix(r, threads_max):
                if cfg.levels != lv:
                    continue
                res = peel(prep, cfg, corrupt=corrupt)
                rep.runs += 1
                ks = [k for k, _ in res.k_sequence]
                if any(b < a for a, b in zip(ks, ks[1:])):
                    rep.monotone_violations += 1
                got = res.as_dict()
                diff = _first_diff(truth.cores, got)
                if diff is not None:
                    rep.mismatches.append(Mismatch(r, s, cfg, *diff))
                elif res.rho != truth.rho:
                    rep.mismatches.append(Mismatch(r, s, cfg, None, None, None,
                                                   f"rho {res.rho} != oracle {truth.rho}"))
    return rep


def random_instances(n, p, seeds):
    from .graph import generate_gnp
    for seed in seeds:
        yield seed, generate_gnp(n, p, seed)


def histogram_of(cores) -> dict:
    vals, cnts = np.unique(np.asarray(cores), return_counts=True)
    return {int(v): int(c) for v, c in zip(vals, cnts)}
