"""Sweep the maturity cap on SCN-C for the indicator of the drop path.

Below the family depth the plateau looks like a jump that never comes and the
price of the indicator is 1/2; once the cap reaches the last stabilization
time every jump is visible and the price falls to 0.
"""
import argparse
from pathlib import Path

from trajbench.workbench import regime_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--N", type=int, default=4)
    ap.add_argument("--max-M", type=int, default=7)
    ap.add_argument("--payoff", default="ind(S[1] < 1/2)")
    ap.add_argument("--csv", type=Path, help="also write the table as CSV")
    args = ap.parse_args()
    rep = regime_sweep("SCN-C", args.payoff, [(M, args.N) for M in range(1, args.max_M + 1)])
    print(rep.text())
    if args.csv:
        args.csv.write_text(rep.csv())


if __name__ == "__main__":
    main()
