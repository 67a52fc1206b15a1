import json
import random
from fractions import Fraction as F

import pytest

from trajbench.hedging import sigma_bar
from trajbench.martingale import (MartingaleMeasure, TypeIINodeFound, check_duality_bounds, construct_measure,
                                  dual_price, expectation, verify_martingale)
from trajbench.scenarios import random_instance, random_payoff


def test_binary_tree_uniform(scn):
    inst = scn("SCN-D")
    Q = construct_measure(inst)
    assert Q.weights == (F(1, 8),) * 8
    assert verify_martingale(inst, Q)
    assert expectation(inst, Q, "S[3]") == 3


def test_trinomial(scn):
    inst = scn("SCN-E")
    Q = construct_measure(inst)
    assert verify_martingale(inst, Q)
    assert set(Q.support()) == {inst.class_id(lab) for lab in ("uu", "ud", "du", "dd")}


def test_scn_c_point_mass_and_failure(scn):
    inst = scn("SCN-C", 4, 3)
    dz = MartingaleMeasure.point_mass(inst, "Z")
    assert verify_martingale(inst, dz)
    assert not verify_martingale(inst, MartingaleMeasure.point_mass(inst, "D"))
    with pytest.raises(TypeIINodeFound):
        construct_measure(inst)
    (rep,) = check_duality_bounds(inst, "ind(S[1] < 1/2)", dz)
    assert rep.passed
    assert (rep.expectation_abs, rep.sigma_bar_abs, rep.norm) == (0, F(1, 2), F(1, 2))


def test_duality_bounds_need_a_measure(scn):
    inst = scn("SCN-C", 4, 3)
    with pytest.raises(ValueError):
        check_duality_bounds(inst, "S[1]", MartingaleMeasure.point_mass(inst, "D"))


def test_measure_json_roundtrip(scn):
    inst = scn("SCN-A")
    Q = MartingaleMeasure((F(1, 2), F(0), F(1, 2)))
    back = MartingaleMeasure.from_mapping(inst, json.loads(Q.to_json(inst)))
    assert back == Q


def test_restricted_dual_scn_c(scn):
    inst = scn("SCN-C", 4, 3)
    f = "ind(S[1] < 1/2)"
    assert dual_price(inst, f).value == F(1, 2)


@pytest.mark.parametrize("seed", range(4))
def test_dual_equals_primal_on_random_instances(seed):
    rng = random.Random(seed)
    for _ in range(5):
        inst = random_instance(rng, max_depth=3, max_classes=8)
        f = random_payoff(rng, inst)
        primal, dual = sigma_bar(inst, f), dual_price(inst, f)
        assert primal.value == dual.value
        if dual.finite:
            assert dual.certified() and primal.certified()
            if inst.is_exact:
                assert verify_martingale(inst, MartingaleMeasure(dual.measure))
