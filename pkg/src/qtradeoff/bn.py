"""Discrete Bayesian network model, validation, pruning and the exact oracle.

Networks are immutable: every transformation returns a new ``BayesNet``
that shares unchanged ``Cpt`` objects with its source.  A CPT stores its
table as a dense array whose axes are the parents (in ``Cpt.parents``
order) followed by the child, so ``table[pa..., :]`` is one row.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import InvalidNetworkError, TooLargeError, UnknownNodeError
from .signs import Sign, dominance_sign

TOL = 1e-9
ENUMERATION_CAP = 10**7

CYCLE = "CYCLE"
NON_NORMALIZED_ROW = "NON_NORMALIZED_ROW"
MISSING_ROW = "MISSING_ROW"
PARENT_MISMATCH = "PARENT_MISMATCH"
INVALID_VARIABLE = "INVALID_VARIABLE"


@dataclass(frozen=True)
class Variable:
    name: str
    states: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(str(s) for s in self.states))

    @property
    def card(self) -> int:
        return len(self.states)


@dataclass(frozen=True, eq=False)
class Cpt:
    """Conditional probability table of ``child`` given ``parents``."""

    child: str
    parents: tuple[str, ...]
    table: np.ndarray

    def __post_init__(self):
        table = np.array(self.table, dtype=float)
        table.flags.writeable = False
        object.__setattr__(self, "parents", tuple(self.parents))
        object.__setattr__(self, "table", table)

    def rows(self) -> Iterator[tuple[tuple[int, ...], np.ndarray]]:
        for idx in np.ndindex(*self.table.shape[:-1]):
            yield idx, self.table[idx]

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.table, axis=-1)


@dataclass(frozen=True)
class Violation:
    kind: str
    node: str | None = None
    detail: str = ""

    def __str__(self) -> str:
        where = f" at {self.node}" if self.node is not None else ""
        return f"{self.kind}{where}: {self.detail}" if self.detail else f"{self.kind}{where}"


class BayesNet:
    """A DAG of discrete variables with one CPT per variable.

    Variable declaration order is significant: it is the tie-break for
    ancestral ordering and the canonical order of CPT parent axes.
    """

    def __init__(
        self,
        variables: Iterable[Variable],
        cpts: Mapping[str, Cpt] | Iterable[Cpt],
        arcs: Iterable[tuple[str, str]] | None = None,
    ):
        self._vars: dict[str, Variable] = {}
        for v in variables:
            self._vars[v.name] = v
        if isinstance(cpts, Mapping):
            self._cpts = dict(cpts)
        else:
            self._cpts = {c.child: c for c in cpts}
        if arcs is None:
            arcs = [(p, c.child) for c in self._cpts.values() for p in c.parents]
        self._arcs = tuple(dict.fromkeys((str(a), str(b)) for a, b in arcs))
        self._index = {name: i for i, name in enumerate(self._vars)}
        self._parents: dict[str, list[str]] = {n: [] for n in self._vars}
        self._children: dict[str, list[str]] = {n: [] for n in self._vars}
        for a, b in self._arcs:
            if a in self._vars and b in self._vars:
                self._parents[b].append(a)
                self._children[a].append(b)
        for lst in (*self._parents.values(), *self._children.values()):
            lst.sort(key=self._index.__getitem__)

    # -- structure -------------------------------------------------------

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self._vars)

    @property
    def variables(self) -> tuple[Variable, ...]:
        return tuple(self._vars.values())

    @property
    def arcs(self) -> tuple[tuple[str, str], ...]:
        return self._arcs

    @property
    def cpts(self) -> dict[str, Cpt]:
        return dict(self._cpts)

    def __contains__(self, name: object) -> bool:
        return name in self._vars

    def __len__(self) -> int:
        return len(self._vars)

    def __repr__(self) -> str:
        return f"BayesNet(nodes={len(self)}, arcs={len(self._arcs)})"

    def require(self, *names: str) -> None:
        for n in names:
            if n not in self._vars:
                raise UnknownNodeError(f"unknown node {n!r}")

    def variable(self, name: str) -> Variable:
        self.require(name)
        return self._vars[name]

    def card(self, name: str) -> int:
        return self._vars[name].card

    def cpt(self, name: str) -> Cpt:
        self.require(name)
        return self._cpts[name]

    def index(self, name: str) -> int:
        return self._index[name]

    def parents(self, name: str) -> tuple[str, ...]:
        self.require(name)
        return tuple(self._parents[name])

    def children(self, name: str) -> tuple[str, ...]:
        self.require(name)
        return tuple(self._children[name])

    def has_arc(self, parent: str, child: str) -> bool:
        return parent in self._parents.get(child, ())

    def ordered(self, names: Iterable[str]) -> tuple[str, ...]:
        """``names`` sorted by declaration order."""
        return tuple(sorted(set(names), key=self._index.__getitem__))

    # -- derivation ------------------------------------------------------

    def replace(self, cpts: Mapping[str, Cpt] | None = None, remove: Iterable[str] = ()) -> "BayesNet":
        """New net with some CPTs swapped and some variables dropped.

        Arcs are re-derived from the CPT parent lists.
        """
        gone = set(remove)
        merged = {n: c for n, c in self._cpts.items() if n not in gone}
        merged.update(cpts or {})
        variables = [v for v in self._vars.values() if v.name not in gone]
        return BayesNet(variables, merged)

    def restrict(self, keep: Iterable[str]) -> "BayesNet":
        keep = set(keep)
        return self.replace(remove=[n for n in self._vars if n not in keep])

    def with_variable(self, var: Variable, cpt: Cpt) -> "BayesNet":
        variables = [var if v.name == var.name else v for v in self._vars.values()]
        return BayesNet(variables, {**self._cpts, var.name: cpt})


# -- graph helpers --------------------------------------------------------


def topological_order(nodes: Sequence[str], parents: Mapping[str, Iterable[str]]) -> list[str]:
    """Kahn's algorithm; ties broken by position in ``nodes``.

    Returns a partial order (shorter than ``nodes``) if there is a cycle.
    """
    index = {n: i for i, n in enumerate(nodes)}
    indeg = {n: 0 for n in nodes}
    kids: dict[str, list[str]] = {n: [] for n in nodes}
    for n in nodes:
        for p in parents.get(n, ()):
            if p in index:
                indeg[n] += 1
                kids[p].append(n)
    heap = [(index[n], n) for n in nodes if indeg[n] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        _, n = heapq.heappop(heap)
        order.append(n)
        for k in kids[n]:
            indeg[k] -= 1
            if indeg[k] == 0:
                heapq.heappush(heap, (index[k], k))
    return order


def ancestral_order(net: BayesNet) -> list[str]:
    """Every node appears after all of its ancestors."""
    return topological_order(net.names, {n: net.parents(n) for n in net.names})


def ancestors(net: BayesNet, node: str) -> set[str]:
    net.require(node)
    seen: set[str] = set()
    stack = list(net.parents(node))
    while stack:
        n = stack.pop()
        if n not in seen:
            seen.add(n)
            stack.extend(net.parents(n))
    return seen


def descendants(net: BayesNet, node: str) -> set[str]:
    net.require(node)
    seen: set[str] = set()
    stack = list(net.children(node))
    while stack:
        n = stack.pop()
        if n not in seen:
            seen.add(n)
            stack.extend(net.children(n))
    return seen


# -- validation -------------------------------------------------------------


def validate_network(net: BayesNet, tol: float = TOL) -> list[Violation]:
    """Check every structural and numeric invariant; empty list means valid."""
    report: list[Violation] = []
    for v in net.variables:
        if v.card < 2:
            report.append(Violation(INVALID_VARIABLE, v.name, "fewer than 2 states"))
        if len(set(v.states)) != v.card:
            report.append(Violation(INVALID_VARIABLE, v.name, "duplicate state labels"))
    for a, b in net.arcs:
        for end in (a, b):
            if end not in net:
                report.append(Violation(PARENT_MISMATCH, end, f"arc {a}->{b} names unknown node"))
    cpts = net.cpts
    for name in net.names:
        cpt = cpts.get(name)
        if cpt is None:
            report.append(Violation(MISSING_ROW, name, "no CPT"))
            continue
        if set(cpt.parents) != set(net.parents(name)) or len(set(cpt.parents)) != len(cpt.parents):
            report.append(Violation(
                PARENT_MISMATCH, name,
                f"CPT parents {list(cpt.parents)} vs arcs {list(net.parents(name))}"))
        if any(p not in net for p in cpt.parents):
            continue
        shape = tuple(net.card(p) for p in cpt.parents) + (net.card(name),)
        if cpt.table.shape != shape:
            report.append(Violation(MISSING_ROW, name, f"table shape {cpt.table.shape} != {shape}"))
            continue
        flat = cpt.table.reshape(-1, shape[-1])
        missing = np.isnan(flat).any(axis=1)
        if missing.any():
            report.append(Violation(MISSING_ROW, name, f"{int(missing.sum())} row(s) absent"))
        ok = ~missing
        bad_entry = ((flat < -tol) | (flat > 1 + tol)).any(axis=1) & ok
        bad_sum = (np.abs(flat.sum(axis=1) - 1.0) > tol) & ok
        for r in np.flatnonzero(bad_entry | bad_sum):
            assignment = np.unravel_index(r, shape[:-1]) if shape[:-1] else ()
            report.append(Violation(
                NON_NORMALIZED_ROW, name,
                f"row {tuple(int(i) for i in assignment)} = {flat[r].tolist()}"))
    if len(ancestral_order(net)) != len(net) or any(a == b for a, b in net.arcs):
        report.append(Violation(CYCLE, None, "arc set is not acyclic"))
    return report


def check_network(net: BayesNet) -> BayesNet:
    report = validate_network(net)
    if report:
        raise InvalidNetworkError(report)
    return net


# -- pruning ----------------------------------------------------------------


def prune_irrelevant(net: BayesNet, decision: str, target: str) -> BayesNet:
    """Drop every node outside the ancestral closure of {decision, target}.

    With no evidence the removed nodes are barren with respect to the query,
    so the joint over the retained nodes is untouched.
    """
    net.require(decision, target)
    keep = {decision, target} | ancestors(net, decision) | ancestors(net, target)
    if len(keep) == len(net):
        return net
    return net.restrict(keep)


# -- exact oracle -----------------------------------------------------------


def expand_table(cpt: Cpt, order: Sequence[str], index: Mapping[str, int] | None = None) -> np.ndarray:
    """View of a CPT table broadcastable against a joint laid out in ``order``."""
    if index is None:
        index = {n: i for i, n in enumerate(order)}
    axes_vars = list(cpt.parents) + [cpt.child]
    positions = [index[v] for v in axes_vars]
    perm = np.argsort(positions)
    arr = np.transpose(cpt.table, perm)
    shape = [1] * len(order)
    for src in perm:
        shape[positions[src]] = cpt.table.shape[src]
    return arr.reshape(shape)


def joint_distribution(net: BayesNet, cap: int = ENUMERATION_CAP) -> np.ndarray:
    """Full joint table with one axis per variable, in declaration order."""
    size = math.prod(net.card(n) for n in net.names)
    if size > cap:
        raise TooLargeError(f"joint has {size} cells, cap is {cap}")
    order = net.names
    index = {n: i for i, n in enumerate(order)}
    joint = np.ones([net.card(n) for n in order])
    for name in order:
        joint = joint * expand_table(net.cpt(name), order, index)
    return joint


def exact_conditional_cdfs(
    net: BayesNet, target: str, decision: str, cap: int = ENUMERATION_CAP
) -> dict[str, np.ndarray | None]:
    """F(target | decision) for every decision state by full enumeration.

    A decision state with zero probability maps to ``None`` (undefined).
    """
    net.require(target, decision)
    joint = joint_distribution(net, cap)
    i_d, i_t = net.index(decision), net.index(target)
    other = tuple(k for k in range(joint.ndim) if k not in (i_d, i_t))
    pair = joint.sum(axis=other)
    if i_d > i_t:
        pair = pair.T
    out: dict[str, np.ndarray | None] = {}
    for k, state in enumerate(net.variable(decision).states):
        mass = pair[k].sum()
        out[state] = None if mass <= 0.0 else np.cumsum(pair[k] / mass)
    return out


def sign_of_cdfs(cdfs: Sequence[np.ndarray | None], tol: float = TOL) -> Sign:
    """Query-level sign over an ordered family of CDFs; ``None`` entries are skipped."""
    rows = [c for c in cdfs if c is not None]
    if len(rows) < 2:
        return Sign.ZERO
    return dominance_sign(np.stack(rows), tol)


def exact_sign(net: BayesNet, decision: str, target: str, tol: float = TOL,
               cap: int = ENUMERATION_CAP) -> Sign:
    cdfs = exact_conditional_cdfs(net, target, decision, cap)
    return sign_of_cdfs(list(cdfs.values()), tol)


def is_cdf(values: np.ndarray, tol: float = TOL) -> bool:
    v = np.asarray(values, dtype=float)
    return bool(np.all(np.diff(v) >= -tol) and abs(v[-1] - 1.0) <= tol and v[0] >= -tol)


def cdf_to_probs(cdf: np.ndarray) -> np.ndarray:
    """Inverse of cumsum along the last axis."""
    return np.diff(cdf, axis=-1, prepend=0.0)
