"""CDF bounds from state-space abstraction under the dominance policy.

An abstracted node has its ordered states merged into contiguous
superstates.  Its own CPT rows are summed over each superstate; each child
CPT is replaced, per superstate, by the pointwise minimum (STRENGTHEN) or
maximum (WEAKEN) of the child's CDFs over the merged states.  When the
structural conditions checked by :func:`check_eligibility` hold, evaluating
the abstracted network exactly yields a lower (or upper) bound on
F(x | d) for every decision state d at once.

Directive choice: a mediator whose influence on x is positive is
strengthened for the lower bound (it becomes stochastically larger, which
pushes x up and its CDF down) and weakened for the upper bound; negative
mediators get the opposite.  A parent whose only child is x has x's CPT
strengthened for the lower bound and weakened for the upper bound.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterator

import networkx as nx
import numpy as np

from .bn import (
    TOL,
    BayesNet,
    Cpt,
    Variable,
    ancestral_order,
    cdf_to_probs,
    descendants,
    exact_conditional_cdfs,
    prune_irrelevant,
)
from .errors import IneligibleError, InvalidPartitionError
from .qpn import Sign, arc_sign

LOWER = "lower"
UPPER = "upper"
BOUND_KINDS = (LOWER, UPPER)

MAX_MEDIATORS = 2


class Directive(Enum):
    STRENGTHEN = "strengthen"
    WEAKEN = "weaken"


class Role(Enum):
    MEDIATED = "mediated"        # every child is a decisively signed parent of x
    SOLE_PARENT = "sole_parent"  # x is the only child


@dataclass(frozen=True)
class StatePartition:
    node: str
    blocks: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple((int(i), int(j)) for i, j in self.blocks))

    @classmethod
    def coarsest(cls, node: str, card: int) -> "StatePartition":
        return cls(node, ((0, card - 1),))

    @classmethod
    def finest(cls, node: str, card: int) -> "StatePartition":
        return cls(node, tuple((k, k) for k in range(card)))

    @property
    def is_finest(self) -> bool:
        return all(i == j for i, j in self.blocks)

    def check(self, card: int) -> None:
        expect = 0
        for i, j in self.blocks:
            if i != expect or j < i:
                raise InvalidPartitionError(f"{self.node}: blocks {self.blocks} not contiguous")
            expect = j + 1
        if expect != card:
            raise InvalidPartitionError(f"{self.node}: blocks {self.blocks} do not cover {card} states")

    def widest(self) -> int:
        widths = [j - i for i, j in self.blocks]
        return widths.index(max(widths))

    def split(self, block: int) -> "StatePartition":
        i, j = self.blocks[block]
        if i == j:
            raise InvalidPartitionError(f"{self.node}: block {block} is a single state")
        mid = (i + j) // 2
        blocks = self.blocks[:block] + ((i, mid), (mid + 1, j)) + self.blocks[block + 1:]
        return StatePartition(self.node, blocks)


def _superstate_labels(var: Variable, partition: StatePartition) -> tuple[str, ...]:
    return tuple(var.states[i] if i == j else f"[{var.states[i]}..{var.states[j]}]"
                 for i, j in partition.blocks)


def aggregate_node(net: BayesNet, a: str, partition: StatePartition) -> tuple[BayesNet, tuple[str, ...]]:
    """Merge ``a``'s states into superstates, summing its CPT rows.

    The children of ``a`` still carry tables over the original states and
    must each go through :func:`transform_child_cpt`; their names are
    returned as the pending list.
    """
    var = net.variable(a)
    partition.check(var.card)
    cpt = net.cpt(a)
    summed = np.stack([cpt.table[..., i:j + 1].sum(axis=-1) for i, j in partition.blocks], axis=-1)
    new_var = Variable(a, _superstate_labels(var, partition))
    return net.with_variable(new_var, Cpt(a, cpt.parents, summed)), net.children(a)


def transform_child_cpt(cpt: Cpt, a: str, partition: StatePartition, directive: Directive) -> Cpt:
    axis = cpt.parents.index(a)
    cdf = cpt.cdf()
    pick = np.min if Directive(directive) is Directive.STRENGTHEN else np.max
    blocks = [pick(np.take(cdf, range(i, j + 1), axis=axis), axis=axis)
              for i, j in partition.blocks]
    merged = np.stack(blocks, axis=axis)
    return Cpt(cpt.child, cpt.parents, np.clip(cdf_to_probs(merged), 0.0, 1.0))


# -- eligibility ------------------------------------------------------------------


@dataclass(frozen=True)
class Candidate:
    """A node that may be abstracted, with the directive for each child per bound."""

    node: str
    role: Role
    directives: dict[str, dict[str, Directive]]

    def directive(self, child: str, kind: str) -> Directive:
        return self.directives[child][kind]


@dataclass
class EligibilityReport:
    decision: str
    target: str
    net: BayesNet
    candidates: tuple[Candidate, ...]
    rejected: dict[str, str]

    @property
    def eligible(self) -> bool:
        return bool(self.candidates)


def _directives_for(sign: Sign) -> dict[str, Directive]:
    if sign is Sign.NEGATIVE:
        return {LOWER: Directive.WEAKEN, UPPER: Directive.STRENGTHEN}
    return {LOWER: Directive.STRENGTHEN, UPPER: Directive.WEAKEN}


def check_eligibility(net: BayesNet, decision: str, x: str, tol: float = TOL) -> EligibilityReport:
    """Find nodes whose abstraction provably bounds F(x | decision).

    Works on the network pruned to the ancestral closure of
    {decision, x}.  Node ``a`` qualifies as SOLE_PARENT when x is its only
    child and the decision does not descend from it.  It qualifies as
    MEDIATED when its children are one or two parents of x, none a
    descendant of another, each with a decisive sign on x; the decision
    precedes ``a``; no other parent of x descends from ``a``; and x is
    d-separated from ``a`` by the decision together with the children.
    """
    pruned = prune_irrelevant(net, decision, x)
    graph = nx.DiGraph(pruned.arcs)
    graph.add_nodes_from(pruned.names)
    x_parents = set(pruned.parents(x))
    candidates: list[Candidate] = []
    rejected: dict[str, str] = {}
    for a in ancestral_order(pruned):
        if a in (decision, x):
            continue
        below = descendants(pruned, a)
        kids = pruned.children(a)
        if decision in below:
            rejected[a] = "decision descends from node"
            continue
        if kids == (x,):
            candidates.append(Candidate(a, Role.SOLE_PARENT, {x: _directives_for(Sign.POSITIVE)}))
            continue
        if x in kids:
            rejected[a] = "x is a child but not the only child"
            continue
        if not 1 <= len(kids) <= MAX_MEDIATORS:
            rejected[a] = f"{len(kids)} children; at most {MAX_MEDIATORS} mediators supported"
            continue
        if not set(kids) <= x_parents:
            rejected[a] = "a child is not a parent of x"
            continue
        if any(k2 in descendants(pruned, k1) for k1 in kids for k2 in kids if k1 != k2):
            rejected[a] = "mediators are ordered by descent"
            continue
        if (x_parents & below) - set(kids):
            rejected[a] = "another parent of x descends from node"
            continue
        signs = {k: arc_sign(pruned, k, x, tol) for k in kids}
        if any(s is Sign.AMBIGUOUS for s in signs.values()):
            rejected[a] = "mediator sign on x is ambiguous"
            continue
        if not nx.is_d_separator(graph, {x}, {a}, {decision, *kids}):
            rejected[a] = "x not independent of node given decision and mediators"
            continue
        candidates.append(Candidate(a, Role.MEDIATED, {k: _directives_for(s) for k, s in signs.items()}))
    return EligibilityReport(decision, x, pruned, tuple(candidates), rejected)


# -- plans and bounds ----------------------------------------------------------------


@dataclass(frozen=True)
class AbstractionPlan:
    """Which nodes are abstracted, how finely, and with which directives.

    Each plan is evaluated as two abstract networks: the LOWER one bounds
    F(x|d) from below and the UPPER one from above, for every decision
    state d.
    """

    decision: str
    target: str
    candidates: tuple[Candidate, ...]
    partitions: tuple[StatePartition, ...]

    @classmethod
    def coarsest(cls, report: EligibilityReport) -> "AbstractionPlan":
        if not report.eligible:
            raise IneligibleError(f"no abstractable node for {report.decision}->{report.target}")
        parts = tuple(StatePartition.coarsest(c.node, report.net.card(c.node)) for c in report.candidates)
        return cls(report.decision, report.target, report.candidates, parts)

    @property
    def is_exact(self) -> bool:
        return all(p.is_finest for p in self.partitions)

    def partition(self, node: str) -> StatePartition:
        for p in self.partitions:
            if p.node == node:
                return p
        raise KeyError(node)

    def refined(self, node: str, block: int) -> "AbstractionPlan":
        parts = tuple(p.split(block) if p.node == node else p for p in self.partitions)
        return replace(self, partitions=parts)

    def as_dict(self) -> dict:
        return {
            "decision": self.decision,
            "target": self.target,
            "nodes": [
                {
                    "node": c.node,
                    "role": c.role.value,
                    "blocks": [list(b) for b in p.blocks],
                    "directives": {ch: {k: d.value for k, d in ds.items()}
                                   for ch, ds in c.directives.items()},
                }
                for c, p in zip(self.candidates, self.partitions)
            ],
        }


def abstract_network(net: BayesNet, plan: AbstractionPlan, kind: str) -> BayesNet:
    """The abstract network computing the ``kind`` bound under ``plan``."""
    for cand, part in zip(plan.candidates, plan.partitions):
        if part.is_finest:
            continue
        net, pending = aggregate_node(net, cand.node, part)
        net = net.replace({ch: transform_child_cpt(net.cpt(ch), cand.node, part, cand.directive(ch, kind))
                           for ch in pending})
    return net


@dataclass
class CdfBounds:
    states: tuple[str, ...]
    lower: dict[str, np.ndarray | None]
    upper: dict[str, np.ndarray | None]

    def defined(self) -> list[str]:
        return [s for s in self.states if self.lower[s] is not None and self.upper[s] is not None]

    def as_dict(self) -> dict:
        def enc(v):
            return None if v is None else [float(t) for t in v]
        return {s: {LOWER: enc(self.lower[s]), UPPER: enc(self.upper[s])} for s in self.states}


def bound_target_cdfs(net: BayesNet, decision: str, x: str, plan: AbstractionPlan) -> CdfBounds:
    """Evaluate both abstract networks of ``plan`` and collect the bounds."""
    if (plan.decision, plan.target) != (decision, x):
        raise IneligibleError("INELIGIBLE_PLAN: plan was built for another query")
    pruned = prune_irrelevant(net, decision, x)
    for c, p in zip(plan.candidates, plan.partitions):
        if c.node not in pruned:
            raise IneligibleError(f"INELIGIBLE_PLAN: {c.node} not in query network")
        p.check(pruned.card(c.node))
    states = pruned.variable(decision).states
    if plan.is_exact:
        exact = exact_conditional_cdfs(pruned, x, decision)
        return CdfBounds(states, dict(exact), dict(exact))
    lower = exact_conditional_cdfs(abstract_network(pruned, plan, LOWER), x, decision)
    upper = exact_conditional_cdfs(abstract_network(pruned, plan, UPPER), x, decision)
    return CdfBounds(states, lower, upper)


def sign_from_bounds(bounds: CdfBounds, tol: float = TOL) -> Sign | None:
    """Decide the sign of d on x from CDF bounds; ``None`` means unresolved.

    NEGATIVE when upper(.|d_i) <= lower(.|d_j) for every d_i < d_j,
    POSITIVE when upper(.|d_j) <= lower(.|d_i), ZERO when both.  AMBIGUOUS
    when some pair provably crosses, or when one pair is provably strictly
    increasing and another strictly decreasing.
    """
    states = bounds.defined()
    if len(states) < 2:
        return Sign.ZERO
    lo = [np.asarray(bounds.lower[s])[:-1] for s in states]
    up = [np.asarray(bounds.upper[s])[:-1] for s in states]
    pos_all = neg_all = True
    strict_pos = strict_neg = crossing = False
    for i in range(len(states)):
        for j in range(i + 1, len(states)):
            pos = bool(np.all(up[j] <= lo[i] + tol))
            neg = bool(np.all(up[i] <= lo[j] + tol))
            rises = bool(np.any(up[j] < lo[i] - tol))  # F(.|d_j) strictly below somewhere
            falls = bool(np.any(up[i] < lo[j] - tol))
            pos_all &= pos
            neg_all &= neg
            strict_pos |= pos and rises
            strict_neg |= neg and falls
            crossing |= rises and falls
    if pos_all and neg_all:
        return Sign.ZERO
    if pos_all:
        return Sign.POSITIVE
    if neg_all:
        return Sign.NEGATIVE
    if crossing or (strict_pos and strict_neg):
        return Sign.AMBIGUOUS
    return None


# -- refinement loop ---------------------------------------------------------------


@dataclass
class IssaLevel:
    plan: AbstractionPlan
    bounds: CdfBounds
    verdict: Sign | None
    refined: tuple[str, int] | None = None  # (node, block) split to reach this level


def _tightening(old: CdfBounds, new: CdfBounds) -> float:
    total = 0.0
    for s in new.defined():
        if old.lower[s] is None or old.upper[s] is None:
            continue
        total += float(np.sum(new.lower[s] - old.lower[s]) + np.sum(old.upper[s] - new.upper[s]))
    return total


def issa_iterations(net: BayesNet, decision: str, x: str, tol: float = TOL,
                    stop_early: bool = True) -> Iterator[IssaLevel]:
    """Yield one level per refinement, coarsest first, ending at full refinement.

    Refinement splits, at its midpoint, the widest superstate of the node
    whose previous split tightened the bounds most (unsplit nodes first,
    ties by ancestral order).
    """
    report = check_eligibility(net, decision, x, tol)
    plan = AbstractionPlan.coarsest(report)
    order = {n: i for i, n in enumerate(ancestral_order(report.net))}
    gain: dict[str, float] = {c.node: float("inf") for c in plan.candidates}
    bounds = bound_target_cdfs(report.net, decision, x, plan)
    level = IssaLevel(plan, bounds, sign_from_bounds(bounds, tol))
    while True:
        yield level
        if plan.is_exact or (stop_early and level.verdict is not None):
            return
        open_nodes = [p.node for p in plan.partitions if not p.is_finest]
        node = min(open_nodes, key=lambda n: (-gain[n], order[n]))
        block = plan.partition(node).widest()
        plan = plan.refined(node, block)
        new_bounds = bound_target_cdfs(report.net, decision, x, plan)
        gain[node] = _tightening(bounds, new_bounds)
        bounds = new_bounds
        level = IssaLevel(plan, bounds, sign_from_bounds(bounds, tol), (node, block))


def issa_resolve(net: BayesNet, decision: str, x: str, tol: float = TOL) -> tuple[Sign, int]:
    """Refine until the bounds decide the sign; returns (sign, refinement steps)."""
    steps = 0
    last = None
    for last in issa_iterations(net, decision, x, tol):
        if last.refined is not None:
            steps += 1
    assert last is not None and last.verdict is not None
    return last.verdict, steps
