"""Exact superhedging and integration workbench for trajectory-based markets."""
from .hedging import (check_K, check_L, check_L_nodewise, check_lop, check_mon, check_nK_sufficient,
                      detect_null_arbitrage, detect_strict_mia, i_bar, integral_K, norm, null_set, replicate,
                      sigma_bar, sigma_under, superhedge_price)
from .lp import LinearProgram, solve_lp, verify_certificate
from .market import DelayedJump, Explicit, Instance, Regime, Trajectory, build_instance
from .martingale import MartingaleMeasure, construct_measure, dual_price, expectation, verify_martingale
from .payoff import Payoff, evaluate_payoff
from .scenarios import get_scenario

__all__ = [
    "DelayedJump", "Explicit", "Instance", "LinearProgram", "MartingaleMeasure", "Payoff", "Regime", "Trajectory",
    "build_instance", "check_K", "check_L", "check_L_nodewise", "check_lop", "check_mon", "check_nK_sufficient",
    "construct_measure", "detect_null_arbitrage", "detect_strict_mia", "dual_price", "evaluate_payoff",
    "expectation", "get_scenario", "i_bar", "integral_K", "norm", "null_set", "replicate", "sigma_bar",
    "sigma_under", "solve_lp", "superhedge_price", "verify_certificate", "verify_martingale",
]
