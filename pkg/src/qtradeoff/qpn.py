"""Qualitative layer: FSD tests, arc signs, and sign propagation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, MutableMapping

import numpy as np

from .bn import TOL, BayesNet, Cpt, topological_order
from .errors import LengthMismatchError, NoSuchArcError, UnknownNodeError
from .signs import Sign, dominance_sign, sign_add, sign_multiply

__all__ = [
    "Sign", "sign_add", "sign_multiply", "Qpn", "PropagationTrace",
    "fsd", "arc_sign", "cpt_arc_sign", "abstract_to_qpn",
    "propagate_signs", "ambiguity_frontier",
]


def fsd(f, g, tol: float = TOL) -> bool:
    """True iff ``f`` first-order stochastically dominates ``g`` (f <= g pointwise)."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f.shape != g.shape:
        raise LengthMismatchError(f"CDF lengths differ: {f.shape} vs {g.shape}")
    return bool(np.all(f <= g + tol))


def cpt_arc_sign(cpt: Cpt, parent: str, tol: float = TOL) -> Sign:
    """Sign of the influence of ``parent`` on ``cpt.child`` across all contexts."""
    try:
        axis = cpt.parents.index(parent)
    except ValueError:
        raise NoSuchArcError(f"{parent} is not a parent of {cpt.child}") from None
    cdf = np.moveaxis(cpt.cdf()[..., :-1], axis, -2)
    return dominance_sign(cdf, tol)


def arc_sign(net: BayesNet, parent: str, child: str, tol: float = TOL) -> Sign:
    net.require(parent, child)
    if not net.has_arc(parent, child):
        raise NoSuchArcError(f"no arc {parent}->{child}")
    return cpt_arc_sign(net.cpt(child), parent, tol)


@dataclass(frozen=True)
class Qpn:
    """A DAG whose arcs carry qualitative signs."""

    nodes: tuple[str, ...]
    signs: Mapping[tuple[str, str], Sign]
    _parents: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "signs", dict(self.signs))
        parents: dict[str, list[str]] = {n: [] for n in self.nodes}
        for (p, c) in self.signs:
            if p not in parents or c not in parents:
                raise UnknownNodeError(f"arc {p}->{c} names unknown node")
            parents[c].append(p)
        object.__setattr__(self, "_parents", parents)

    @property
    def arcs(self) -> tuple[tuple[str, str], ...]:
        return tuple(self.signs)

    def parents(self, node: str) -> tuple[str, ...]:
        return tuple(self._parents[node])

    def children(self, node: str) -> tuple[str, ...]:
        return tuple(c for (p, c) in self.signs if p == node)

    def ancestral_order(self) -> list[str]:
        return topological_order(self.nodes, self._parents)


def abstract_to_qpn(
    net: BayesNet,
    tol: float = TOL,
    cache: MutableMapping[tuple[str, str], tuple[Cpt, Sign]] | None = None,
) -> Qpn:
    """Label every arc of ``net`` with its arc sign.

    ``cache`` maps (parent, child) to the CPT object the sign was computed
    from; a sign is reused while the child's CPT object is unchanged.
    """
    signs: dict[tuple[str, str], Sign] = {}
    for parent, child in net.arcs:
        cpt = net.cpt(child)
        hit = cache.get((parent, child)) if cache is not None else None
        if hit is not None and hit[0] is cpt:
            signs[(parent, child)] = hit[1]
            continue
        s = cpt_arc_sign(cpt, parent, tol)
        signs[(parent, child)] = s
        if cache is not None:
            cache[(parent, child)] = (cpt, s)
    return Qpn(net.names, signs)


@dataclass
class PropagationTrace:
    """Result of propagating a unit change from the decision node.

    ``messages[n]`` is the (source, carried sign) that turned ``n``
    ambiguous, or for other nodes the last message that changed it.
    """

    decision: str
    signs: dict[str, Sign]
    messages: dict[str, tuple[str, Sign]]
    order: list[str]


def propagate_signs(qpn: Qpn, decision: str) -> PropagationTrace:
    if decision not in qpn.nodes:
        raise UnknownNodeError(f"unknown node {decision!r}")
    order = qpn.ancestral_order()
    reached = {decision}
    signs: dict[str, Sign] = {}
    messages: dict[str, tuple[str, Sign]] = {}
    position = {n: i for i, n in enumerate(order)}
    for node in order:
        if node == decision:
            signs[node] = Sign.POSITIVE
            continue
        acc = Sign.ZERO
        for parent in sorted(qpn.parents(node), key=position.__getitem__):
            if parent not in reached:
                continue
            reached.add(node)
            carried = sign_multiply(signs[parent], qpn.signs[(parent, node)])
            new = sign_add(acc, carried)
            if new is not acc and acc is not Sign.AMBIGUOUS:
                messages[node] = (parent, carried)
            acc = new
        signs[node] = acc
    return PropagationTrace(decision, signs, messages, order)


def ambiguity_frontier(trace: PropagationTrace, decision: str, target: str
                       ) -> tuple[str, str] | None:
    """(X, Y): the first ambiguous node in visit order and the node whose message made it so."""
    if trace.signs[target].is_decisive:
        return None
    for node in trace.order:
        if trace.signs[node] is Sign.AMBIGUOUS:
            return node, trace.messages[node][0]
    return None


def qpn_from_signs(nodes: Iterable[str], signs: Mapping[tuple[str, str], Sign | str]) -> Qpn:
    return Qpn(tuple(nodes), {k: v if isinstance(v, Sign) else Sign.parse(v)
                              for k, v in signs.items()})
