"""Random QPNs and sign-consistent Bayesian networks.

Structure: start from the complete DAG on node1..noden (arcs low -> high),
give each arc a uniform random key, and walk the arcs by descending key,
deleting each one unless that would disconnect the undirected skeleton,
until ``l`` arcs remain.  Signs are fair coin flips.  CPTs are realized so
that every arc reproduces its sign under first-order stochastic dominance.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import networkx as nx
import numpy as np

from .bn import BayesNet, Cpt, Variable
from .errors import GenerationFailure
from .qpn import Qpn, Sign, abstract_to_qpn

MIN_GAP = 1e-6
MAX_RETRIES = 100


@dataclass(frozen=True)
class GenConfig:
    n: int
    l: int
    mc: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if not self.n - 1 <= self.l <= self.n * (self.n - 1) // 2:
            raise ValueError(f"l={self.l} outside [{self.n - 1}, {self.n * (self.n - 1) // 2}]")
        if self.mc < 2:
            raise ValueError("mc must be at least 2")


def node_names(n: int) -> list[str]:
    return [f"node{i}" for i in range(1, n + 1)]


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_connected_dag(config: GenConfig, rng=None) -> nx.DiGraph:
    rng = _rng(config.seed if rng is None else rng)
    names = node_names(config.n)
    arcs = list(itertools.combinations(names, 2))
    keys = rng.random(len(arcs))
    dag = nx.DiGraph()
    dag.add_nodes_from(names)
    dag.add_edges_from(arcs)
    skeleton = dag.to_undirected()
    for k in np.argsort(-keys, kind="stable"):
        if dag.number_of_edges() == config.l:
            break
        u, v = arcs[k]
        skeleton.remove_edge(u, v)
        if nx.is_connected(skeleton):
            dag.remove_edge(u, v)
        else:
            skeleton.add_edge(u, v)
    return dag


def assign_random_signs(dag: nx.DiGraph, seed=0) -> Qpn:
    rng = _rng(seed)
    arcs = list(dag.edges())
    flips = rng.random(len(arcs)) < 0.5
    signs = {arc: Sign.POSITIVE if f else Sign.NEGATIVE for arc, f in zip(arcs, flips)}
    return Qpn(tuple(dag.nodes()), signs)


@dataclass(frozen=True)
class DominanceOrder:
    """Product order on parent configurations, oriented by the arc signs.

    A configuration is mapped to oriented coordinates (state index for a
    positive parent, reversed index for a negative one); p dominates q iff
    p is componentwise >= q in those coordinates.
    """

    signs: tuple[Sign, ...]
    cards: tuple[int, ...]

    def oriented(self, config: tuple[int, ...]) -> tuple[int, ...]:
        return tuple(c if s is Sign.POSITIVE else k - 1 - c
                     for c, s, k in zip(config, self.signs, self.cards))

    def dominates(self, p: tuple[int, ...], q: tuple[int, ...]) -> bool:
        return all(a >= b for a, b in zip(self.oriented(p), self.oriented(q)))

    @property
    def maximal(self) -> tuple[int, ...]:
        return tuple(k - 1 if s is Sign.POSITIVE else 0 for s, k in zip(self.signs, self.cards))

    def dominated_count(self, config: tuple[int, ...]) -> int:
        return math.prod(c + 1 for c in self.oriented(config))

    def linear_extension(self) -> list[tuple[int, ...]]:
        """Most dominant first: descending dominated-count, ties lexicographic."""
        configs = list(itertools.product(*(range(k) for k in self.cards)))
        return sorted(configs, key=lambda c: (-self.dominated_count(c), c))

    def covers_above(self, config: tuple[int, ...]) -> list[tuple[int, ...]]:
        """Configurations one oriented step above ``config``."""
        out = []
        for i, (c, s, k) in enumerate(zip(config, self.signs, self.cards)):
            step = c + 1 if s is Sign.POSITIVE else c - 1
            if 0 <= step < k:
                out.append(config[:i] + (step,) + config[i + 1:])
        return out


def dominance_order(signs, cards) -> DominanceOrder:
    signs = tuple(signs)
    if any(s not in (Sign.POSITIVE, Sign.NEGATIVE) for s in signs):
        raise ValueError("dominance order needs decisive signs")
    return DominanceOrder(signs, tuple(cards))


def _uniform_dist(rng: np.random.Generator, k: int) -> np.ndarray:
    u = rng.random(k)
    return u / u.sum()


def _constrained_cdf(rng: np.random.Generator, floor: np.ndarray) -> np.ndarray:
    """Sample a CDF pointwise >= ``floor`` + MIN_GAP where room allows."""
    k = floor.shape[0]
    cdf = np.empty(k)
    prev = 0.0
    for i in range(k - 1):
        lo = max(prev, min(floor[i] + MIN_GAP, 1.0))
        cdf[i] = lo + (1.0 - lo) * rng.random()
        prev = cdf[i]
    cdf[-1] = 1.0
    return cdf


def _realize_cpt(rng, child: str, parents: tuple[str, ...], signs, cards, k: int) -> Cpt:
    if not parents:
        return Cpt(child, (), _uniform_dist(rng, k))
    order = dominance_order(signs, cards)
    cdfs: dict[tuple[int, ...], np.ndarray] = {}
    for config in order.linear_extension():
        above = order.covers_above(config)
        if not above:
            cdfs[config] = np.cumsum(_uniform_dist(rng, k))
            cdfs[config][-1] = 1.0
        else:
            floor = np.max([cdfs[c] for c in above], axis=0)
            cdfs[config] = _constrained_cdf(rng, floor)
    table = np.empty(tuple(cards) + (k,))
    for config, cdf in cdfs.items():
        table[config] = np.diff(cdf, prepend=0.0)
    return Cpt(child, parents, table)


def realize_bayes_net(qpn: Qpn, mc: int, seed=0) -> BayesNet:
    """Draw cardinalities in [2, mc] and CPTs that reproduce every arc sign."""
    rng = _rng(seed)
    if any(not s.is_decisive or s is Sign.ZERO for s in qpn.signs.values()):
        raise ValueError("realization needs POSITIVE/NEGATIVE arc signs")
    cards = {n: int(rng.integers(2, mc + 1)) for n in qpn.nodes}
    variables = [Variable(n, tuple(f"s{i}" for i in range(cards[n]))) for n in qpn.nodes]
    position = {n: i for i, n in enumerate(qpn.nodes)}
    cpts = {}
    for node in qpn.nodes:
        parents = tuple(sorted(qpn.parents(node), key=position.__getitem__))
        signs = [qpn.signs[(p, node)] for p in parents]
        pcards = [cards[p] for p in parents]
        for _ in range(MAX_RETRIES):
            cpt = _realize_cpt(rng, node, parents, signs, pcards, cards[node])
            if _reproduces(cpt, signs):
                break
        else:
            raise GenerationFailure(f"could not realize strict signs for {node}")
        cpts[node] = cpt
    return BayesNet(variables, cpts)


def _reproduces(cpt: Cpt, signs) -> bool:
    from .qpn import cpt_arc_sign

    return all(cpt_arc_sign(cpt, p) is s for p, s in zip(cpt.parents, signs))


def generate(config: GenConfig) -> tuple[Qpn, BayesNet]:
    """QPN and realized network, both drawn from one stream seeded by ``config.seed``."""
    rng = np.random.default_rng(config.seed)
    dag = random_connected_dag(config, rng)
    qpn = assign_random_signs(dag, rng)
    return qpn, realize_bayes_net(qpn, config.mc, rng)


def round_trip_ok(qpn: Qpn, net: BayesNet) -> bool:
    return abstract_to_qpn(net).signs == dict(qpn.signs)
