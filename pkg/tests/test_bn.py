import numpy as np
import pytest

from qtradeoff.bn import (
    CYCLE,
    MISSING_ROW,
    NON_NORMALIZED_ROW,
    PARENT_MISMATCH,
    BayesNet,
    Cpt,
    ancestral_order,
    exact_conditional_cdfs,
    exact_sign,
    is_cdf,
    joint_distribution,
    prune_irrelevant,
    validate_network,
)
from qtradeoff.errors import InvalidNetworkError, TooLargeError, UnknownNodeError
from qtradeoff.bn import check_network
from qtradeoff.signs import Sign

from nets import bern, binary, chain, mediator_net, two_node


def kinds(net):
    return {v.kind for v in validate_network(net)}


def test_valid_two_node():
    assert validate_network(two_node()) == []


def test_cycle_reported():
    net = BayesNet([binary("A"), binary("B")],
                   [Cpt("A", ("B",), bern([0.1, 0.2])), Cpt("B", ("A",), bern([0.3, 0.4]))])
    assert CYCLE in kinds(net)


def test_non_normalized_row():
    net = BayesNet([binary("A")], [Cpt("A", (), [0.5, 0.48])])
    assert NON_NORMALIZED_ROW in kinds(net)
    with pytest.raises(InvalidNetworkError) as exc:
        check_network(net)
    assert exc.value.violations[0].kind == NON_NORMALIZED_ROW


def test_missing_and_mismatched():
    net = BayesNet([binary("A"), binary("B")], [Cpt("A", (), bern(0.5))], arcs=[("A", "B")])
    assert MISSING_ROW in kinds(net)
    net = BayesNet([binary("A"), binary("B")],
                   [Cpt("A", (), bern(0.5)), Cpt("B", (), bern(0.5))], arcs=[("A", "B")])
    assert PARENT_MISMATCH in kinds(net)


def test_ancestral_orders():
    assert ancestral_order(chain()) == ["D", "X", "T"]
    diamond = BayesNet(
        [binary(n) for n in "DABT"],
        [Cpt("D", (), bern(0.5)), Cpt("A", ("D",), bern([0.2, 0.4])),
         Cpt("B", ("D",), bern([0.3, 0.6])), Cpt("T", ("A", "B"), bern([[0.1, 0.2], [0.3, 0.4]]))],
    )
    order = ancestral_order(diamond)
    assert order[0] == "D" and order[-1] == "T"


def test_prune_removes_leaf_and_barren_target():
    net = chain()
    leafy = BayesNet([*net.variables, binary("L")], {**net.cpts, "L": Cpt("L", ("X",), bern([0.5, 0.5]))})
    assert set(prune_irrelevant(leafy, "D", "T").names) == {"D", "X", "T"}
    fig = mediator_net(1)
    assert "T" not in prune_irrelevant(fig, "D", "X")


def test_prune_unknown_node():
    with pytest.raises(UnknownNodeError):
        prune_irrelevant(chain(), "D", "nope")


def test_two_node_cdfs():
    # P(t|d)=0.8, P(t|not d)=0.3
    net = BayesNet([binary("D"), binary("T")],
                   [Cpt("D", (), bern(0.5)), Cpt("T", ("D",), bern([0.3, 0.8]))])
    cdfs = exact_conditional_cdfs(net, "T", "D")
    np.testing.assert_allclose(cdfs["t"], [0.2, 1.0], atol=1e-12)
    np.testing.assert_allclose(cdfs["f"], [0.7, 1.0], atol=1e-12)
    assert exact_sign(net, "D", "T") is Sign.POSITIVE


def test_chain_cdfs():
    cdfs = exact_conditional_cdfs(chain(), "T", "D")
    np.testing.assert_allclose(cdfs["f"], [0.8, 1.0], atol=1e-12)
    np.testing.assert_allclose(cdfs["t"], [0.55, 1.0], atol=1e-12)


def test_independent_target_is_zero():
    net = BayesNet([binary("D"), binary("T")], [Cpt("D", (), bern(0.4)), Cpt("T", (), bern(0.7))])
    cdfs = exact_conditional_cdfs(net, "T", "D")
    np.testing.assert_allclose(cdfs["f"], cdfs["t"])
    assert exact_sign(net, "D", "T") is Sign.ZERO


def test_zero_probability_state_is_undefined():
    net = BayesNet([binary("D"), binary("T")],
                   [Cpt("D", (), [1.0, 0.0]), Cpt("T", ("D",), bern([0.3, 0.8]))])
    assert exact_conditional_cdfs(net, "T", "D")["t"] is None


def test_enumeration_cap():
    with pytest.raises(TooLargeError):
        joint_distribution(chain(), cap=4)


def test_joint_sums_to_one_and_cdf_check():
    assert joint_distribution(mediator_net(2)).sum() == pytest.approx(1.0)
    assert is_cdf([0.2, 0.5, 1.0]) and not is_cdf([0.5, 0.2, 1.0])
