import math
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from trajbench.lp import (EQ, GE, LE, Infeasible, LinearProgram, LPSizeError, Optimal, Unbounded, fm_value,
                          is_feasible, outcome_value, solve_lp, verify_certificate)
from trajbench.scenarios import random_lp


def test_small_max_program():
    lp = LinearProgram.build([1, 1], [([1, 2], LE, 4), ([3, 1], LE, 6)], sense="max")
    out = solve_lp(lp)
    assert isinstance(out, Optimal)
    assert out.value == F(14, 5)
    assert out.x == (F(8, 5), F(6, 5))
    assert verify_certificate(lp, out)


def test_infeasible_has_farkas_vector():
    lp = LinearProgram.build([0], [([1], GE, 2), ([1], LE, 1)])
    out = solve_lp(lp)
    assert isinstance(out, Infeasible)
    assert verify_certificate(lp, out)
    assert fm_value(lp) is None


def test_unbounded_has_ray():
    lp = LinearProgram.build([-1, 0], [([1, -1], LE, 1)])
    out = solve_lp(lp)
    assert isinstance(out, Unbounded)
    assert verify_certificate(lp, out)
    assert outcome_value(out) == -math.inf == fm_value(lp)


def test_free_variables_and_equalities():
    lp = LinearProgram.build([1, 1], [([1, -1], EQ, 3), ([1, 0], GE, -2)], free=True)
    out = solve_lp(lp)
    assert out.value == -7
    assert verify_certificate(lp, out)


def test_beale_cycling_program_terminates():
    # cycles under the textbook largest-coefficient rule
    lp = LinearProgram.build(
        [F(-3, 4), 150, F(-1, 50), 6],
        [([F(1, 4), -60, F(-1, 25), 9], LE, 0),
         ([F(1, 2), -90, F(-1, 50), 3], LE, 0),
         ([0, 0, 1, 0], LE, 1)],
    )
    out = solve_lp(lp)
    assert out.value == F(-1, 20)
    assert verify_certificate(lp, out)
    assert fm_value(lp) == F(-1, 20)


def test_perturbed_value_fails_verification():
    lp = LinearProgram.build([1, 1], [([1, 2], LE, 4), ([3, 1], LE, 6)], sense="max")
    out = solve_lp(lp)
    bad = Optimal(out.value + F(1, 10**9), out.x, out.y)
    assert not verify_certificate(lp, bad)
    assert not verify_certificate(lp, Optimal(out.value, out.x, tuple(-v for v in out.y)))


def test_bogus_infeasibility_claim_rejected():
    lp = LinearProgram.build([1], [([1], GE, 0)])
    assert not verify_certificate(lp, Infeasible((F(1),)))


def test_fm_size_guard():
    lp = LinearProgram.build([1] * 9, [([1] * 9, GE, 1)])
    with pytest.raises(LPSizeError):
        fm_value(lp)


def test_validate_rejects_bad_rows():
    with pytest.raises(ValueError):
        LinearProgram.build([1, 2], [([1], LE, 0)])
    with pytest.raises(ValueError):
        LinearProgram.build([1], [([1], "<", 0)])


@pytest.mark.parametrize("seed", range(5))
def test_random_programs_match_elimination(seed):
    rng = random.Random(seed)
    for k in range(30):
        lp = random_lp(rng, bounded=k % 2 == 0)
        out = solve_lp(lp)
        assert verify_certificate(lp, out)
        assert outcome_value(out, lp.sense) == fm_value(lp)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 5))
def test_scaling_scales_value(seed, factor):
    lp = random_lp(random.Random(seed), n_max=5, m_max=4, bounded=True)
    out, big = solve_lp(lp), solve_lp(lp.scaled(factor))
    assert type(out) is type(big)
    if isinstance(out, Optimal):
        # feasible set scales by factor and so does the objective
        assert big.value == factor ** 2 * out.value
        assert is_feasible(lp.scaled(factor), big.x)
