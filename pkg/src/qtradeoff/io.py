"""JSON documents for networks and QPNs.

Network document::

    {"variables": [{"name": "D", "states": ["f", "t"]}, ...],
     "arcs": [["D", "T"], ...],
     "cpts": {"T": [{"given": {"D": "f"}, "dist": [0.7, 0.3]}, ...], ...}}

QPN documents replace ``cpts`` with ``signs``: {"D→T": "+", ...}
("->" is accepted as the arrow too).
"""

from __future__ import annotations

import itertools
import json
from pathlib import Path
from typing import Any

import numpy as np

from .bn import (
    MISSING_ROW,
    PARENT_MISMATCH,
    BayesNet,
    Cpt,
    Variable,
    Violation,
    validate_network,
)
from .errors import InvalidNetworkError
from .qpn import Qpn, Sign

ARROW = "→"


def network_to_dict(net: BayesNet) -> dict[str, Any]:
    cpts = {}
    for name in net.names:
        cpt = net.cpt(name)
        rows = []
        for idx in itertools.product(*(range(net.card(p)) for p in cpt.parents)):
            given = {p: net.variable(p).states[i] for p, i in zip(cpt.parents, idx)}
            rows.append({"given": given, "dist": [float(v) for v in cpt.table[idx]]})
        cpts[name] = rows
    return {
        "variables": [{"name": v.name, "states": list(v.states)} for v in net.variables],
        "arcs": [list(a) for a in net.arcs],
        "cpts": cpts,
    }


def network_from_dict(doc: dict[str, Any], validate: bool = True) -> BayesNet:
    """Build a network; raises InvalidNetworkError listing every violation."""
    variables = [Variable(str(v["name"]), tuple(v["states"])) for v in doc.get("variables", [])]
    by_name = {v.name: v for v in variables}
    arcs = [(str(a), str(b)) for a, b in doc.get("arcs", [])]
    problems: list[Violation] = []
    cpts = {}
    for child, rows in (doc.get("cpts") or {}).items():
        if child not in by_name:
            problems.append(Violation(PARENT_MISMATCH, child, "CPT for undeclared variable"))
            continue
        var = by_name[child]
        incoming = [a for a, b in arcs if b == child]
        keys = {p for row in rows for p in row.get("given", {})}
        if keys != set(incoming):
            problems.append(Violation(
                PARENT_MISMATCH, child, f"rows condition on {sorted(keys)}, arcs give {incoming}"))
            continue
        unknown = [p for p in incoming if p not in by_name]
        if unknown:
            problems.append(Violation(PARENT_MISMATCH, child, f"unknown parents {unknown}"))
            continue
        parents = incoming
        shape = tuple(by_name[p].card for p in parents) + (var.card,)
        table = np.full(shape, np.nan)
        for row in rows:
            given = row.get("given", {})
            try:
                idx = tuple(by_name[p].states.index(str(given[p])) for p in parents)
            except (KeyError, ValueError):
                problems.append(Violation(MISSING_ROW, child, f"bad assignment {given}"))
                continue
            dist = list(row["dist"])
            if len(dist) != var.card:
                problems.append(Violation(MISSING_ROW, child, f"row {given} has {len(dist)} entries"))
                continue
            table[idx] = dist
        cpts[child] = Cpt(child, tuple(parents), table)
    net = BayesNet(variables, cpts, arcs)
    if validate:
        problems.extend(validate_network(net))
        if problems:
            raise InvalidNetworkError(problems)
    return net


def qpn_to_dict(qpn: Qpn) -> dict[str, Any]:
    return {
        "variables": [{"name": n} for n in qpn.nodes],
        "arcs": [list(a) for a in qpn.arcs],
        "signs": {f"{p}{ARROW}{c}": s.symbol for (p, c), s in qpn.signs.items()},
    }


def qpn_from_dict(doc: dict[str, Any]) -> Qpn:
    nodes = [str(v["name"]) for v in doc.get("variables", [])]
    signs = {}
    for key, sym in (doc.get("signs") or {}).items():
        sep = ARROW if ARROW in key else "->"
        p, c = (part.strip() for part in key.split(sep, 1))
        signs[(p, c)] = Sign.parse(sym)
    for a, b in doc.get("arcs", []):
        if (a, b) not in signs:
            raise InvalidNetworkError([Violation(PARENT_MISMATCH, b, f"arc {a}->{b} has no sign")])
    return Qpn(tuple(nodes), signs)


def dump_json(doc: Any, path: str | Path | None = None) -> str:
    text = json.dumps(doc, indent=2, ensure_ascii=False, sort_keys=False) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def load_network(path: str | Path) -> BayesNet:
    return network_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def save_network(net: BayesNet, path: str | Path) -> None:
    dump_json(network_to_dict(net), path)
