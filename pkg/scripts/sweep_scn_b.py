"""SCN-B across maturity caps: null set growth, loss of (L), strict arbitrage."""
import argparse

from trajbench import hedging as hg
from trajbench.portfolio import describe, terminal_wealth
from trajbench.scenarios import get_scenario
from trajbench.workbench import fmt, regime_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--N", type=int, default=6)
    ap.add_argument("--Ms", default="1,2,3,4,5,6,7,8")
    args = ap.parse_args()
    Ms = [int(m) for m in args.Ms.split(",")]
    print(regime_sweep("SCN-B", "abs(S[1]-1)", [(M, args.N) for M in Ms]).text())
    for M in Ms:
        inst = get_scenario("SCN-B").build(args.N, M)
        p = hg.detect_strict_mia(inst)
        if p is None:
            continue
        unit = p.scaled(-1 / p.holding((1,)))
        print(f"M={M}: strict arbitrage {describe(unit)}")
        print("  terminal wealth " + " ".join(f"{lab}:{fmt(w)}" for lab, w in
                                             zip(inst.labels, terminal_wealth(inst, unit))))
        break


if __name__ == "__main__":
    main()
