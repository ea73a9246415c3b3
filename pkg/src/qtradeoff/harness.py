"""Experiment driver: random instances, savings ratios, benchmark sweeps.

Seed derivation: instance ``i`` of sweep cell ``c`` is generated from
``seed + c * SEED_STRIDE + i``, where ``i`` counts every attempt
(discarded and failed instances included).  Every random draw in a sweep
flows from the one base seed.
"""

from __future__ import annotations

import csv
import io
import itertools
import logging
import time
from dataclasses import asdict, dataclass, field
from typing import Iterable, TextIO

import numpy as np

from .bn import exact_sign, prune_irrelevant
from .errors import GenerationFailure
from .netgen import GenConfig, generate, node_names
from .qpn import Sign
from .reduction import (
    ResolutionStats,
    Resolver,
    Strategy,
    StrategyKind,
    full_numeric_reduce,
    run_itor,
)

log = logging.getLogger(__name__)

SEED_STRIDE = 1_000_000
CSV_COLUMNS = ("l", "nodes_avg", "links_avg", "mc", "r_nodes", "r_reversals",
               "instances_kept", "instances_discarded")


def compute_ratios(
    itor_stats: ResolutionStats,
    baseline_stats: ResolutionStats,
    completion_stats: ResolutionStats | None = None,
) -> tuple[float, float]:
    """(R_nodes, R_reversals) for one instance.

    R_nodes divides ITOR's reductions by the full reduction's.  R_reversals
    divides ITOR's reversals by ITOR's reversals plus those needed to finish
    reducing ITOR's residual network (``completion_stats``); without a
    completion run the baseline's own reversal count is the denominator.
    A pruned net with nothing to reduce scores (1, 1).
    """
    if baseline_stats.nodes_reduced == 0:
        return 1.0, 1.0
    r_nodes = itor_stats.nodes_reduced / baseline_stats.nodes_reduced
    if completion_stats is not None:
        denom = itor_stats.arc_reversals + completion_stats.arc_reversals
    else:
        denom = baseline_stats.arc_reversals
    r_rev = itor_stats.arc_reversals / denom if denom else 0.0
    return r_nodes, r_rev


@dataclass
class ExperimentRecord:
    index: int
    seed: int
    n: int
    l: int
    mc: int
    nodes: int
    links: int
    exact_sign: str
    itor_sign: str
    nodes_reduced: int
    baseline_nodes: int
    arc_reversals: int
    completion_reversals: int
    r_nodes: float
    r_reversals: float
    resolved_at: str
    strategy: str
    resolver: str
    wall_time: float = field(default=0.0, compare=False)

    def as_dict(self, timing: bool = False) -> dict:
        d = asdict(self)
        if not timing:
            d.pop("wall_time")
        return d


def run_instance(
    config: GenConfig,
    strategy: Strategy = Strategy(),
    resolver: Resolver = Resolver.MARGINALIZE,
    index: int = 0,
) -> ExperimentRecord | None:
    """Generate, query node1 -> node_n, and score one instance.

    Returns None when the exact answer is ambiguous (such instances are
    discarded).  Raises GenerationFailure if the CPTs cannot be realized.
    """
    decision, target = node_names(config.n)[0], node_names(config.n)[-1]
    start = time.perf_counter()
    _, net = generate(config)
    pruned = prune_irrelevant(net, decision, target)
    truth = exact_sign(pruned, decision, target)
    if truth is Sign.AMBIGUOUS:
        return None
    outcome = run_itor(pruned, decision, target, strategy, resolver)
    _, baseline = full_numeric_reduce(pruned, decision, target)
    _, completion = full_numeric_reduce(outcome.residual, decision, target)
    r_nodes, r_rev = compute_ratios(outcome.stats, baseline, completion)
    return ExperimentRecord(
        index=index, seed=config.seed, n=config.n, l=config.l, mc=config.mc,
        nodes=len(pruned), links=len(pruned.arcs),
        exact_sign=truth.symbol, itor_sign=outcome.sign.symbol,
        nodes_reduced=outcome.stats.nodes_reduced, baseline_nodes=baseline.nodes_reduced,
        arc_reversals=outcome.stats.arc_reversals, completion_reversals=completion.arc_reversals,
        r_nodes=r_nodes, r_reversals=r_rev,
        resolved_at=outcome.stats.resolved_at.value,
        strategy=strategy.kind.value, resolver=Resolver(resolver).value,
        wall_time=time.perf_counter() - start,
    )


@dataclass
class Table1Config:
    n: int = 10
    cells: list[tuple[int, int]] = field(default_factory=lambda: [(20, 2), (20, 3), (30, 2), (30, 3)])
    instances: int = 1000
    strategy: StrategyKind = StrategyKind.REDUCE_X_FIRST
    resolver: Resolver = Resolver.MARGINALIZE
    seed: int = 0
    max_attempts: int | None = None  # per cell; default 5 * instances

    @classmethod
    def from_dict(cls, doc: dict) -> "Table1Config":
        if "cells" in doc:
            cells = [(int(c["l"]), int(c["mc"])) for c in doc["cells"]]
        else:
            cells = [(int(l), int(mc)) for l, mc in itertools.product(doc["l_list"], doc["mc_list"])]
        return cls(
            n=int(doc.get("n", 10)),
            cells=cells,
            instances=int(doc.get("instances", 1000)),
            strategy=StrategyKind(doc.get("strategy", "x-first")),
            resolver=Resolver(doc.get("resolver", "marginalize")),
            seed=int(doc.get("seed", 0)),
            max_attempts=doc.get("max_attempts"),
        )


@dataclass
class Table1Row:
    l: int
    mc: int
    nodes_avg: float
    links_avg: float
    r_nodes: float
    r_reversals: float
    instances_kept: int
    instances_discarded: int
    generation_failures: int = 0
    records: list[ExperimentRecord] = field(default_factory=list, repr=False)

    @property
    def savings(self) -> tuple[float, float]:
        return 1.0 - self.r_nodes, 1.0 - self.r_reversals


def run_cell(n: int, l: int, mc: int, instances: int, strategy: Strategy, resolver: Resolver,
             base_seed: int, max_attempts: int | None = None) -> Table1Row:
    records: list[ExperimentRecord] = []
    discarded = failures = 0
    limit = max_attempts or 5 * instances
    attempt = 0
    while len(records) < instances and attempt < limit:
        seed = base_seed + attempt
        try:
            rec = run_instance(GenConfig(n, l, mc, seed), strategy, resolver, index=attempt)
        except GenerationFailure as exc:
            log.warning("instance seed=%d: %s; resampling", seed, exc)
            failures += 1
        else:
            if rec is None:
                discarded += 1
            else:
                records.append(rec)
        attempt += 1
    records.sort(key=lambda r: r.index)

    def mean(attr):
        return float(np.mean([getattr(r, attr) for r in records])) if records else float("nan")

    return Table1Row(l, mc, mean("nodes"), mean("links"), mean("r_nodes"), mean("r_reversals"),
                     len(records), discarded, failures, records)


def run_table1(config: Table1Config) -> list[Table1Row]:
    rows = []
    for c, (l, mc) in enumerate(config.cells):
        strategy = Strategy(config.strategy, config.seed)
        rows.append(run_cell(config.n, l, mc, config.instances, strategy, config.resolver,
                             config.seed + c * SEED_STRIDE, config.max_attempts))
    return rows


def write_table_csv(rows: Iterable[Table1Row], out: TextIO | None = None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in rows:
        writer.writerow([r.l, f"{r.nodes_avg:.3f}", f"{r.links_avg:.3f}", r.mc,
                         f"{r.r_nodes:.4f}", f"{r.r_reversals:.4f}",
                         r.instances_kept, r.instances_discarded])
    text = buf.getvalue()
    if out is not None:
        out.write(text)
    return text


def run_query(
    path,
    decision: str,
    target: str,
    strategy: Strategy = Strategy(),
    resolver: Resolver = Resolver.MARGINALIZE,
) -> tuple[Sign, ResolutionStats]:
    """Load a network file and resolve one influence query."""
    from .io import load_network

    outcome = run_itor(load_network(path), decision, target, strategy, resolver)
    return outcome.sign, outcome.stats
