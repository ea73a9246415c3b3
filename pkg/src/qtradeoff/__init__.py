"""Incremental resolution of qualitative tradeoffs in Bayesian networks."""

from .bn import BayesNet, Cpt, Variable, exact_sign, prune_irrelevant, validate_network
from .bounds import issa_iterations, issa_resolve
from .errors import TradeoffError
from .netgen import GenConfig, generate
from .qpn import Qpn, abstract_to_qpn, propagate_signs
from .reduction import Resolver, Strategy, StrategyKind, itor, marginalize_node, reverse_arc, run_itor
from .signs import Sign

__all__ = [
    "BayesNet", "Cpt", "Variable", "exact_sign", "prune_irrelevant", "validate_network",
    "issa_iterations", "issa_resolve", "TradeoffError", "GenConfig", "generate",
    "Qpn", "abstract_to_qpn", "propagate_signs",
    "Resolver", "Strategy", "StrategyKind", "itor", "marginalize_node", "reverse_arc", "run_itor",
    "Sign",
]
