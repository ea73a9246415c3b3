"""Arc reversal, node marginalization and the incremental resolution loop."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .bn import (
    TOL,
    BayesNet,
    Cpt,
    ancestors,
    ancestral_order,
    check_network,
    exact_conditional_cdfs,
    prune_irrelevant,
)
from .errors import IneligibleError, NoSuchArcError, PathExistsError, TradeoffError
from .qpn import (
    PropagationTrace,
    Sign,
    abstract_to_qpn,
    ambiguity_frontier,
    arc_sign,
    propagate_signs,
)

log = logging.getLogger(__name__)


class StrategyKind(Enum):
    REDUCE_X_FIRST = "x-first"
    REDUCE_Y_FIRST = "y-first"


@dataclass(frozen=True)
class Strategy:
    kind: StrategyKind = StrategyKind.REDUCE_X_FIRST
    seed: int = 0


class Resolver(Enum):
    MARGINALIZE = "marginalize"
    ISSA = "issa"


class Resolution(Enum):
    QUALITATIVE = "QUALITATIVE"
    AFTER_REDUCTION = "AFTER_REDUCTION"
    EXHAUSTED = "EXHAUSTED"


@dataclass
class ResolutionStats:
    nodes_reduced: int = 0
    arc_reversals: int = 0
    qualitative_passes: int = 0
    resolved_at: Resolution | None = None
    refinement_steps: int = 0
    issa_calls: int = 0
    reduced: list[str] = field(default_factory=list)

    @property
    def did_numeric_work(self) -> bool:
        return bool(self.nodes_reduced or self.arc_reversals or self.issa_calls)

    def as_dict(self) -> dict:
        return {
            "nodes_reduced": self.nodes_reduced,
            "arc_reversals": self.arc_reversals,
            "qualitative_passes": self.qualitative_passes,
            "resolved_at": self.resolved_at.value if self.resolved_at else None,
            "refinement_steps": self.refinement_steps,
            "issa_calls": self.issa_calls,
            "reduced": list(self.reduced),
        }


# -- arc reversal -------------------------------------------------------------


def _reachable_avoiding(net: BayesNet, src: str, dst: str, skip: tuple[str, str]) -> bool:
    stack = [c for c in net.children(src) if (src, c) != skip]
    seen = set()
    while stack:
        n = stack.pop()
        if n == dst:
            return True
        if n not in seen:
            seen.add(n)
            stack.extend(net.children(n))
    return False


def reverse_arc(net: BayesNet, x: str, y: str) -> BayesNet:
    """Turn x->y into y->x by Bayes' rule; both nodes inherit each other's parents.

    Rows whose new marginal Pr(y|...) is zero get a uniform conditional for x.
    """
    net.require(x, y)
    if not net.has_arc(x, y):
        raise NoSuchArcError(f"no arc {x}->{y}")
    if _reachable_avoiding(net, x, y, (x, y)):
        raise PathExistsError(f"another directed path {x}~>{y} exists")
    cx, cy = net.cpt(x), net.cpt(y)
    shared = net.ordered(set(cx.parents) | (set(cy.parents) - {x}))
    ids = {v: i for i, v in enumerate(shared + (x, y))}
    joint = np.einsum(
        cx.table, [ids[v] for v in cx.parents + (x,)],
        cy.table, [ids[v] for v in cy.parents + (y,)],
        [ids[v] for v in shared + (x, y)],
    )
    new_y = joint.sum(axis=-2)
    zero = new_y <= 0.0
    with np.errstate(invalid="ignore", divide="ignore"):
        cond_x = joint / new_y[..., None, :]
    if zero.any():
        log.debug("DEGENERATE_ROW reversing %s->%s: %d rows", x, y, int(zero.sum()))
        cond_x = np.where(zero[..., None, :], 1.0 / net.card(x), cond_x)
    # cond_x axes: shared..., x, y  ->  canonical parents of x, then x
    x_parents = net.ordered(shared + (y,))
    current = shared + (x, y)
    perm = [current.index(v) for v in x_parents + (x,)]
    new_cx = Cpt(x, x_parents, np.transpose(cond_x, perm))
    new_cy = Cpt(y, shared, new_y)
    return net.replace({x: new_cx, y: new_cy})


def marginalize_node(net: BayesNet, x: str) -> tuple[BayesNet, int]:
    """Reverse every outgoing arc of ``x`` then drop it as barren."""
    net.require(x)
    reversals = 0
    while True:
        kids = net.children(x)
        if not kids:
            break
        position = {n: i for i, n in enumerate(ancestral_order(net))}
        first = min(kids, key=position.__getitem__)
        net = reverse_arc(net, x, first)
        reversals += 1
    return net.replace(remove=[x]), reversals


def root_decision(net: BayesNet, decision: str) -> tuple[BayesNet, int]:
    """Reverse arcs into ``decision`` until it has no parents.

    The latest parent in ancestral order always admits reversal, and each
    reversal removes that parent from the decision's ancestor set.
    """
    reversals = 0
    while net.parents(decision):
        position = {n: i for i, n in enumerate(ancestral_order(net))}
        last = max(net.parents(decision), key=position.__getitem__)
        net = reverse_arc(net, last, decision)
        reversals += 1
    return net, reversals


# -- node selection -------------------------------------------------------------


def select_node(
    trace: PropagationTrace,
    net: BayesNet,
    decision: str,
    target: str,
    strategy: Strategy,
    rng: np.random.Generator | None = None,
) -> str | None:
    frontier = ambiguity_frontier(trace, decision, target)
    if frontier is None:
        return None
    x, y = frontier
    ranked = (x, y) if strategy.kind is StrategyKind.REDUCE_X_FIRST else (y, x)
    for cand in ranked:
        if cand not in (decision, target):
            return cand
    others = [n for n in net.names if n not in (decision, target)]
    if not others:
        return None
    near = set()
    for q in (decision, target):
        near.update(net.parents(q))
        near.update(net.children(q))
    pool = [n for n in others if n in near] or others
    if rng is None:
        rng = np.random.default_rng(strategy.seed)
    return pool[int(rng.integers(len(pool)))]


# -- full reduction baseline ------------------------------------------------------


def _final_sign(net: BayesNet, decision: str, target: str) -> Sign:
    if net.has_arc(decision, target):
        return arc_sign(net, decision, target)
    return Sign.ZERO


def full_numeric_reduce(net: BayesNet, decision: str, target: str) -> tuple[Sign, ResolutionStats]:
    """Marginalize every non-query node in ancestral order and read off the sign."""
    stats = ResolutionStats(resolved_at=Resolution.AFTER_REDUCTION)
    work = prune_irrelevant(net, decision, target)
    work, rev = root_decision(work, decision)
    stats.arc_reversals += rev
    for node in ancestral_order(work):
        if node in (decision, target):
            continue
        work, rev = marginalize_node(work, node)
        stats.nodes_reduced += 1
        stats.arc_reversals += rev
        stats.reduced.append(node)
    return _final_sign(work, decision, target), stats


# -- collapse into a direct arc -------------------------------------------------------


def collapsible_set(net: BayesNet, decision: str, x: str) -> set[str]:
    """Nodes that touch the rest of the net only through ``decision`` and ``x``.

    Returns the strict ancestors of ``x`` other than ``decision`` when that
    set is closed in this sense, otherwise the empty set.
    """
    inner = ancestors(net, x) - {decision}
    if not inner or decision in inner:
        return set()
    if not set(net.parents(x)) <= inner | {decision}:
        return set()
    for s in inner:
        if not set(net.parents(s)) <= inner | {decision}:
            return set()
        if not set(net.children(s)) <= inner | {x}:
            return set()
    return inner


def collapse_into_arc(net: BayesNet, decision: str, x: str, inner: set[str]) -> BayesNet:
    """Replace ``inner`` by a direct decision->x arc carrying exact Pr(x|d)."""
    sub = net.restrict(inner | {decision, x})
    cdfs = exact_conditional_cdfs(sub, x, decision)
    k = net.card(x)
    rows = []
    for state in net.variable(decision).states:
        cdf = cdfs[state]
        rows.append(np.full(k, 1.0 / k) if cdf is None else np.diff(cdf, prepend=0.0))
    cpt = Cpt(x, (decision,), np.clip(np.array(rows), 0.0, 1.0))
    return net.replace({x: cpt}, remove=inner)


# -- ITOR ---------------------------------------------------------------------------


@dataclass
class ItorOutcome:
    sign: Sign
    stats: ResolutionStats
    residual: BayesNet


def _issa_step(work, decision, target, x, stats, tol):
    """One bounds-based attempt at the frontier relation.

    Returns ("resolved", sign), ("reduced", net) or None when bounds do not
    apply or report an ambiguous frontier that is not the query itself.
    """
    from .bounds import issa_resolve

    if x == target:
        try:
            verdict, steps = issa_resolve(work, decision, target, tol=tol)
        except IneligibleError:
            return None
        stats.issa_calls += 1
        stats.refinement_steps += steps
        return "resolved", verdict
    inner = collapsible_set(work, decision, x)
    if not inner:
        return None
    try:
        verdict, steps = issa_resolve(work, decision, x, tol=tol)
    except IneligibleError:
        return None
    stats.issa_calls += 1
    stats.refinement_steps += steps
    if verdict is Sign.AMBIGUOUS:
        return None
    stats.nodes_reduced += len(inner)
    stats.reduced.extend(work.ordered(inner))
    return "reduced", collapse_into_arc(work, decision, x, inner)


def run_itor(
    net: BayesNet,
    decision: str,
    target: str,
    strategy: Strategy = Strategy(),
    resolver: Resolver = Resolver.MARGINALIZE,
    tol: float = TOL,
) -> ItorOutcome:
    """Incremental tradeoff resolution; also returns the residual network."""
    net.require(decision, target)
    if decision == target:
        raise TradeoffError("decision and target must differ")
    check_network(net)
    resolver = Resolver(resolver)
    stats = ResolutionStats()
    work = prune_irrelevant(net, decision, target)
    work, rev = root_decision(work, decision)
    stats.arc_reversals += rev
    rng = np.random.default_rng(strategy.seed)
    cache: dict = {}
    while True:
        trace = propagate_signs(abstract_to_qpn(work, tol, cache), decision)
        stats.qualitative_passes += 1
        answer = trace.signs[target]
        if answer.is_decisive:
            stats.resolved_at = (Resolution.AFTER_REDUCTION if stats.did_numeric_work
                                 else Resolution.QUALITATIVE)
            return ItorOutcome(answer, stats, work)
        if resolver is Resolver.ISSA:
            x, _ = ambiguity_frontier(trace, decision, target)
            step = _issa_step(work, decision, target, x, stats, tol)
            if step is not None and step[0] == "resolved":
                stats.resolved_at = Resolution.AFTER_REDUCTION
                return ItorOutcome(step[1], stats, work)
            if step is not None:
                work = step[1]
                continue
        node = select_node(trace, work, decision, target, strategy, rng)
        if node is None:
            stats.resolved_at = Resolution.EXHAUSTED
            return ItorOutcome(Sign.AMBIGUOUS, stats, work)
        work, rev = marginalize_node(work, node)
        stats.nodes_reduced += 1
        stats.arc_reversals += rev
        stats.reduced.append(node)


def itor(
    net: BayesNet,
    decision: str,
    target: str,
    strategy: Strategy = Strategy(),
    resolver: Resolver = Resolver.MARGINALIZE,
    tol: float = TOL,
) -> tuple[Sign, ResolutionStats]:
    out = run_itor(net, decision, target, strategy, resolver, tol)
    return out.sign, out.stats
