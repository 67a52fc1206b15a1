"""Print the headline values for the built-in scenarios, one line each."""
from fractions import Fraction as F

from trajbench import hedging as hg
from trajbench.martingale import (MartingaleMeasure, TypeIINodeFound, check_duality_bounds, construct_measure,
                                  verify_martingale)
from trajbench.scenarios import get_scenario
from trajbench.workbench import fmt


def scn(name, N=None, M=None):
    return get_scenario(name).build(N, M)


def line(label, value, expected):
    status = "ok " if value == expected else "DIFF"
    print(f"[{status}] {label:<52} {fmt(value):>10}   expected {fmt(expected)}")


def main():
    a = scn("SCN-A")
    line("SCN-A sigmabar(|S1-1|)", hg.sigma_bar(a, "abs(S[1]-1)").value, F(1))
    line("SCN-A inner integral of |S1-1|", hg.sigma_under(a, "abs(S[1]-1)").value, F(0))
    line("SCN-A replicate(S1-1)", hg.replication_price(a, "S[1]-1"), F(0))
    line("SCN-A |S1-1| replicable", hg.replication_price(a, "abs(S[1]-1)") is not None, False)

    ind = "ind(S[1] < 1/2)"
    c3, c6 = scn("SCN-C", 4, 3), scn("SCN-C", 4, 6)
    line("SCN-C(4,3) ibar(1_D)", hg.i_bar(c3, ind).value, F(1, 2))
    line("SCN-C(4,3) sigmabar(1_D)", hg.sigma_bar(c3, ind).value, F(1, 2))
    line("SCN-C(4,6) sigmabar(1_D)", hg.sigma_bar(c6, ind).value, F(0))
    line("SCN-C point mass on Z is a martingale", verify_martingale(c3, MartingaleMeasure.point_mass(c3, "Z")), True)
    try:
        construct_measure(c3)
        built = True
    except TypeIINodeFound:
        built = False
    line("SCN-C construct_measure succeeds", built, False)
    (rep,) = check_duality_bounds(c3, ind, MartingaleMeasure.point_mass(c3, "Z"))
    print(f"       SCN-C duality chain {rep.chain()}")

    b3, b8 = scn("SCN-B", 6, 3), scn("SCN-B", 6, 8)
    line("SCN-B(6,3) null set size", len(hg.null_set(b3)), 2)
    line("SCN-B(6,3) sigmabar(straddle)", hg.sigma_bar(b3, "abs(S[1]-1)").value, F(1))
    line("SCN-B(6,3) ibar(straddle)", hg.i_bar(b3, "abs(S[1]-1)").value, F(1))
    line("SCN-B(6,8) condition L", hg.check_L(b8), False)
    line("SCN-B(6,8) norm of 1", hg.norm(b8, "1"), F(0))

    d = scn("SCN-D")
    line("SCN-D constructed measure weight on uuu", construct_measure(d).weights[0], F(1, 8))


if __name__ == "__main__":
    main()
