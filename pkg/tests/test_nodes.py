import random
from fractions import Fraction as F

import pytest

from trajbench.nodes import (NodeKind, check_value_nonnegative, classify_tree, classify_values, compute_reduction,
                             free_positive_portfolio, is_truncation_induced, node_table, stopping_time,
                             type_ii_nodes, verify_reduction_classes)
from trajbench.portfolio import terminal_wealth
from trajbench.scenarios import random_instance


@pytest.mark.parametrize("value, children, kind, eps", [
    (1, [1], NodeKind.FLAT, 0),
    (2, [2, 4], NodeKind.TYPE_I, 1),
    (2, [0, 2], NodeKind.TYPE_I, -1),
    (2, [4], NodeKind.TYPE_II, 1),
    (2, [0, 1], NodeKind.TYPE_II, -1),
    (1, [0, 1, 2], NodeKind.UP_DOWN, 0),
])
def test_classify_values(value, children, kind, eps):
    c = classify_values(F(value), [F(v) for v in children])
    assert c.kind is kind and c.direction == eps


def test_scn_c_table(scn):
    inst = scn("SCN-C", 4, 3)
    rows = {r.node.key: r for r in node_table(inst)}
    assert rows[(1,)].cls.kind is NodeKind.UP_DOWN
    assert rows[(1, 2)].cls.kind is NodeKind.TYPE_I
    last = rows[(1, 2, 2, 2, 2)]
    assert last.cls.kind is NodeKind.TYPE_II and last.truncation
    assert type_ii_nodes(inst, include_truncation=False) == []


def test_genuine_type_ii_is_not_truncation(scn):
    inst = random_instance(random.Random(3))
    for nd in type_ii_nodes(inst):
        assert not is_truncation_induced(inst, nd)


def test_scn_b_reduction(scn):
    inst = scn("SCN-B", 6, 8)
    d1 = inst.class_id("D1")
    assert stopping_time(inst, d1, 6) == 7
    assert stopping_time(inst, inst.class_id("U3"), 6) == 4
    rep = compute_reduction(inst, 6)
    assert {inst.labels[c] for c in rep.removed} == {"U1", "U2", "U3", "U4", "U5"}
    assert verify_reduction_classes(inst, 6)


def test_reduction_flattens_type_i(scn):
    rep = compute_reduction(scn("SCN-C", 4, 5), 3)
    cls = classify_tree(rep.reduced)
    assert cls[(1, 2)].kind is NodeKind.FLAT


def test_reduction_rejects_type_ii_before_n(scn):
    assert not verify_reduction_classes(scn("SCN-C", 4, 5), 5)


def test_free_positive_portfolio_pays_two(scn):
    inst = scn("SCN-C", 4, 5)
    p = free_positive_portfolio(inst)
    assert p.V == 0
    assert terminal_wealth(inst, p) == [2, 2, 2, 2, 0, 0]
    assert check_value_nonnegative(inst, p)


def test_free_positive_without_truncation(scn):
    inst = scn("SCN-C", 4, 5)
    assert terminal_wealth(inst, free_positive_portfolio(inst, include_truncation=False)) == [2, 2, 2, 0, 0, 0]


def test_type_ii_breaks_nonnegative_value_process():
    from trajbench.market import Explicit, Regime, Trajectory, build_instance
    from trajbench.portfolio import SimplePortfolio, is_positive

    inst = build_instance(1, [Explicit((Trajectory.from_path([1, 0]), Trajectory.from_path([1, 2, 3])))],
                          Regime(1, 2))
    p = SimplePortfolio(F(0), 2, {(1,): F(-1), (1, 2): F(1)})
    assert is_positive(inst, p)
    assert type_ii_nodes(inst) and not check_value_nonnegative(inst, p)
