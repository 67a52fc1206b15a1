"""Acceptance criteria 1-10, all exact.

Each criterion is a plain function raising AssertionError on failure, so the
module runs under pytest (one test per criterion, with a PASS/FAIL summary
line each) or directly as ``python3 tests/test_acceptance.py``.
"""
import math
import random
import sys
import time
import warnings
from fractions import Fraction as F

import pytest

from trajbench import hedging as hg
from trajbench.lp import LinearProgram, LE, fm_value, outcome_value, solve_lp, verify_certificate
from trajbench.martingale import (MartingaleMeasure, TypeIINodeFound, check_duality_bounds, construct_measure,
                                  dual_price, expectation, verify_martingale)
from trajbench.nodes import check_value_nonnegative, type_ii_nodes, verify_reduction_classes
from trajbench.payoff import evaluate_payoff
from trajbench.portfolio import SimplePortfolio, is_positive, terminal_wealth
from trajbench.scenarios import get_scenario, random_instance, random_lp, random_payoff, random_portfolio
from trajbench.workbench import regime_sweep

IND_D = "ind(S[1] < 1/2)"
STRADDLE = "abs(S[1]-1)"


def scn(name, N=None, M=None):
    return get_scenario(name).build(N, M)


def le(a, b):
    """a <= b on extended reals with exact rationals."""
    return a <= b


def ext_add(a, b):
    if isinstance(a, float) or isinstance(b, float):
        return -math.inf
    return a + b


def c1_drop_indicator():
    emu = scn("SCN-C", 4, 3)
    assert hg.i_bar(emu, IND_D).value == F(1, 2)
    res = hg.sigma_bar(emu, IND_D)
    assert res.value == F(1, 2) and res.certified()
    q = MartingaleMeasure(res.measure)
    assert expectation(emu, q, IND_D) == F(1, 2)
    full = scn("SCN-C", 4, 6)
    assert hg.sigma_bar(full, IND_D).value == 0 == hg.i_bar(full, IND_D).value
    rows = regime_sweep("SCN-C", IND_D, [(3, 4), (6, 4)]).rows
    assert [(r.sigma_bar, r.i_bar, r.kind) for r in rows] == [(F(1, 2), F(1, 2), "emulation"), (0, 0, "exact")]


def c2_non_lattice():
    inst = scn("SCN-A")
    assert hg.replicate(inst, "S[1]-1").value == 0
    f = evaluate_payoff(STRADDLE, inst)
    with pytest.raises(hg.NotReplicable) as err:
        hg.replicate(inst, f)
    # Farkas vector y over class rows: y.(1, gains) = 0 and y.f > 0
    y = err.value.certificate
    hd = hg._hedge(inst)
    cols = [[F(1)] + hd.gains[c] for c in range(inst.n_classes)]
    assert all(sum(y[c] * cols[c][j] for c in range(inst.n_classes)) == 0 for j in range(len(cols[0])))
    assert sum(y[c] * f[c] for c in range(inst.n_classes)) > 0


def c3_two_regimes():
    inst = scn("SCN-B", 6, 3)
    assert {inst.labels[c] for c in hg.null_set(inst)} == {"U1", "U2"}
    assert hg.check_L(inst)
    assert hg.sigma_bar(inst, STRADDLE).value == 1 == hg.i_bar(inst, STRADDLE).value
    deg = scn("SCN-B", 6, 8)
    assert not hg.check_L(deg)
    p = hg.detect_strict_mia(deg)
    unit = p.scaled(F(-1) / p.holding((1,)))
    assert unit.V == 0 and unit.holding((1,)) == -1
    plateau = [k for k in unit.nonzero() if len(k) > 1]
    assert plateau and all(set(k[1:]) == {2} and unit.holding(k) > 0 for k in plateau)
    assert all(w > 0 for w in terminal_wealth(deg, unit))


def c4_point_mass():
    inst = scn("SCN-C", 4, 3)
    dz = MartingaleMeasure.point_mass(inst, "Z")
    assert verify_martingale(inst, dz)
    with pytest.raises(TypeIINodeFound):
        construct_measure(inst)
    (rep,) = check_duality_bounds(inst, IND_D, dz)
    assert rep.passed
    assert (rep.expectation_abs, rep.sigma_bar_abs, rep.norm) == (0, F(1, 2), F(1, 2))


def c5_complete_trees():
    rng = random.Random(5)
    for name in ("SCN-D", "SCN-E"):
        inst = scn(name)
        Q = construct_measure(inst)
        assert verify_martingale(inst, Q)
        for _ in range(20):
            f = random_payoff(rng, inst)
            primal, dual = hg.sigma_bar(inst, f), dual_price(inst, f)
            assert primal.value == dual.value
            assert primal.certified() and dual.certified()
            Qd = MartingaleMeasure(dual.measure)
            assert verify_martingale(inst, Qd) and expectation(inst, Qd, f) == dual.value
            v = hg.integral_K(inst, f)
            if v is not None:
                assert v == expectation(inst, Qd, f) == expectation(inst, Q, f)
        if name == "SCN-D":
            assert hg.integral_K(inst, f) is not None


def _l_instances(rng):
    named = [scn(s) for s in ("SCN-A", "SCN-B", "SCN-C", "SCN-D", "SCN-E")]
    named += [scn("SCN-C", 4, 6), scn("SCN-B", 4, 2)]
    rand = [random_instance(rng, max_depth=3, max_classes=8, avoid_type_ii=k % 2 == 0) for k in range(12)]
    return [i for i in named + rand if hg.check_L(i)]


def c6_replicable_prices():
    rng = random.Random(6)
    instances = _l_instances(rng)
    assert len(instances) >= 10
    for inst in instances:
        for k in range(20):
            p = random_portfolio(rng, inst, positive=k % 2 == 0)
            f = terminal_wealth(inst, p)
            i_f = hg.replication_price(inst, f)
            assert i_f == p.V
            assert hg.sigma_bar(inst, f).value == i_f == hg.sigma_under(inst, f).value
            if is_positive(inst, p):
                assert hg.i_bar(inst, f).value == i_f


def c7_reduction():
    rng = random.Random(7)
    checked = 0
    for k in range(50):
        inst = random_instance(rng, max_depth=4, max_classes=12, avoid_type_ii=k % 2 == 0)
        for n in range(1, inst.depth + 1):
            if not type_ii_nodes(inst, before=n):
                assert verify_reduction_classes(inst, n)
                checked += 1
        f = random_payoff(rng, inst, positive=True)
        res = hg.i_bar(inst, f)
        for p in res.components:
            if not type_ii_nodes(inst, before=p.n):
                assert is_positive(inst, p) and check_value_nonnegative(inst, p)
    assert checked >= 50


def c8_operator_axioms():
    rng = random.Random(8)
    for _ in range(50):
        inst = random_instance(rng, max_depth=3, max_classes=8)
        f = random_payoff(rng, inst)
        g = random_payoff(rng, inst)
        pos = random_payoff(rng, inst, positive=True)
        up = [a + b for a, b in zip(f, pos)]
        c = F(rng.randint(1, 5), rng.randint(1, 3))
        sb = lambda h: hg.sigma_bar(inst, h).value
        assert le(sb(f), sb(up))
        sf = sb(f)
        assert sb([c * v for v in f]) == (c * sf if isinstance(sf, F) else sf)
        assert le(sb([a + b for a, b in zip(f, g)]), ext_add(sf, sb(g)))
        af, ag = [abs(v) for v in f], [abs(v) for v in g]
        ib = lambda h: hg.i_bar(inst, h).value
        assert le(ib(af), ib([a + b for a, b in zip(af, pos)]))
        assert ib([c * v for v in af]) == c * ib(af)
        assert le(ib([a + b for a, b in zip(af, ag)]), ib(af) + ib(ag))
        assert hg.norm(inst, [a + b for a, b in zip(f, g)]) <= hg.norm(inst, f) + hg.norm(inst, g)
        if hg.check_L(inst):
            assert le(hg.sigma_under(inst, f).value, sf)
        assert le(sb(af), ib(af))
        one = ib(af)
        assert hg.i_bar(inst, af, components=2).value == one == hg.i_bar(inst, af, components=3).value


def c9_lp_core():
    rng = random.Random(9)
    for k in range(200):
        lp = random_lp(rng, n_max=8, m_max=6, bounded=k % 2 == 0)
        out = solve_lp(lp)
        assert verify_certificate(lp, out)
        assert outcome_value(out, lp.sense) == fm_value(lp)
    beale = LinearProgram.build(
        [F(-3, 4), 150, F(-1, 50), 6],
        [([F(1, 4), -60, F(-1, 25), 9], LE, 0),
         ([F(1, 2), -90, F(-1, 50), 3], LE, 0),
         ([0, 0, 1, 0], LE, 1)],
    )
    out = solve_lp(beale)
    assert out.value == F(-1, 20) and verify_certificate(beale, out)


def c10_null_arbitrage():
    rng = random.Random(10)
    pool = [scn(s) for s in ("SCN-A", "SCN-B", "SCN-C", "SCN-D", "SCN-E")]
    pool += [random_instance(rng, max_depth=3, max_classes=8, avoid_type_ii=k % 2 == 0) for k in range(10)]
    passed = 0
    for inst in pool:
        if hg.check_K(inst).passed:
            passed += 1
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", hg.DegenerateMarketWarning)
                assert hg.detect_null_arbitrage(inst) is None
    assert passed >= 5
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        hg.detect_null_arbitrage(scn("SCN-B", 6, 8))
    assert any(issubclass(w.category, hg.DegenerateMarketWarning) for w in caught)
    assert hg.norm(scn("SCN-B", 6, 8), "1") == 0


CRITERIA = [
    (1, "indicator of D: 1/2 emulated, 0 in the full regime", c1_drop_indicator),
    (2, "straddle not replicable on SCN-A", c2_non_lattice),
    (3, "SCN-B null set and strict arbitrage", c3_two_regimes),
    (4, "point mass on the constant path", c4_point_mass),
    (5, "strong duality on complete trees", c5_complete_trees),
    (6, "replicable payoffs priced at I", c6_replicable_prices),
    (7, "reduction and nonnegative value processes", c7_reduction),
    (8, "operator axioms", c8_operator_axioms),
    (9, "LP core against elimination", c9_lp_core),
    (10, "no null arbitrage under K, degenerate warning", c10_null_arbitrage),
]

RESULTS = {}


@pytest.mark.parametrize("number, title, check", CRITERIA, ids=[f"criterion_{n}" for n, _, _ in CRITERIA])
def test_criterion(number, title, check):
    RESULTS[number] = (title, False)
    start = time.perf_counter()
    check()
    RESULTS[number] = (title, True)
    assert time.perf_counter() - start < 10


def summary_lines(results):
    return [f"ACCEPTANCE {n:>2} {'PASS' if ok else 'FAIL'}  {title}" for n, (title, ok) in sorted(results.items())]


if __name__ == "__main__":
    results = {}
    for number, title, check in CRITERIA:
        try:
            check()
            results[number] = (title, True)
        except AssertionError:
            results[number] = (title, False)
    print("\n".join(summary_lines(results)))
    sys.exit(0 if all(ok for _, ok in results.values()) else 1)
