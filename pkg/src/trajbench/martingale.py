"""Finitely supported martingale measures on the class tree."""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .hedging import NEG_INF, PriceResult, norm, null_set, sigma_bar, _hedge
from .lp import EQ, LinearProgram, Optimal, solve_lp
from .market import Instance, Node, as_rational
from .nodes import NodeKind, classify_tree
from .payoff import PayoffLike, materialize

ZERO = Fraction(0)


class TypeIINodeFound(RuntimeError):
    def __init__(self, node: Node):
        super().__init__(f"type-II arbitrage node {node.label()} reached with positive mass")
        self.node = node


@dataclass(frozen=True)
class MartingaleMeasure:
    weights: tuple[Fraction, ...]

    def support(self) -> list[int]:
        return [c for c, w in enumerate(self.weights) if w]

    def to_json(self, instance: Instance) -> str:
        return json.dumps({lab: str(w) for lab, w in zip(instance.labels, self.weights)}, indent=2)

    @classmethod
    def from_mapping(cls, instance: Instance, data: Mapping[str, object]) -> "MartingaleMeasure":
        w = [ZERO] * instance.n_classes
        for lab, v in data.items():
            w[instance.class_id(lab)] = as_rational(v)
        return cls(tuple(w))

    @classmethod
    def point_mass(cls, instance: Instance, label: str) -> "MartingaleMeasure":
        cid = instance.class_id(label)
        return cls(tuple(Fraction(1) if c == cid else ZERO for c in range(instance.n_classes)))


def construct_measure(instance: Instance) -> MartingaleMeasure:
    """Binomial construction walked from the root.

    Flat and type-I nodes pass all mass to the constant continuation; an
    up-down node splits between the nearest child above and the nearest child
    below so that the one-step move is fair.
    """
    classes = classify_tree(instance)
    weights = [ZERO] * instance.n_classes
    frontier = [(instance.root, Fraction(1))]
    while frontier:
        node, mass = frontier.pop()
        if node.depth >= instance.depth:
            (cid,) = node.members
            weights[cid] += mass
            continue
        kind = classes[node.key].kind
        v = node.value
        if kind in (NodeKind.FLAT, NodeKind.TYPE_I):
            frontier.append((instance.nodes[node.key + (v,)], mass))
        elif kind is NodeKind.UP_DOWN:
            up = min(c for c in node.children if c > v)
            down = max(c for c in node.children if c < v)
            p_up = (v - down) / (up - down)
            frontier.append((instance.nodes[node.key + (up,)], mass * p_up))
            frontier.append((instance.nodes[node.key + (down,)], mass * (1 - p_up)))
        else:
            raise TypeIINodeFound(node)
    return MartingaleMeasure(tuple(weights))


def verify_martingale(instance: Instance, Q: MartingaleMeasure) -> bool:
    """Probability weights with zero expected increment at every charged node."""
    w = Q.weights
    if len(w) != instance.n_classes or any(x < 0 for x in w) or sum(w) != 1:
        return False
    for node in instance.nodes.values():
        if node.depth >= instance.depth:
            continue
        mass = sum((w[c] for c in node.members), ZERO)
        if not mass:
            continue
        j = node.depth
        drift = sum((w[c] * (instance.value(c, j + 1) - node.value) for c in node.members), ZERO)
        if drift != 0:
            return False
    return True


def expectation(instance: Instance, Q: MartingaleMeasure, payoff: PayoffLike) -> Fraction:
    f = materialize(payoff, instance)
    return sum((q * v for q, v in zip(Q.weights, f)), ZERO)


def dual_price(instance: Instance, payoff: PayoffLike, restrict_off_null: bool = True) -> PriceResult:
    """max E_Q[f] over tree martingale measures (martingale up to the cap M).

    With ``restrict_off_null`` the measure must vanish on the null set.  An
    infeasible dual gives ``-inf``.
    """
    f = materialize(payoff, instance)
    hd = _hedge(instance)
    A = null_set(instance) if restrict_off_null else frozenset()
    off = [c for c in range(instance.n_classes) if c not in A]
    if not off:
        return PriceResult(NEG_INF)
    rows = [([Fraction(1)] * len(off), EQ, 1)]
    for k in range(len(hd.nodes)):
        rows.append(([hd.gains[c][k] for c in off], EQ, 0))
    lp = LinearProgram.build([f[c] for c in off], rows, sense="max", free=False)
    out = solve_lp(lp)
    if not isinstance(out, Optimal):
        return PriceResult(NEG_INF, lp=lp, outcome=out)
    q = [ZERO] * instance.n_classes
    for c, v in zip(off, out.x):
        q[c] = v
    return PriceResult(out.value, measure=tuple(q), lp=lp, outcome=out)


@dataclass(frozen=True)
class DualityReport:
    expectation_abs: Fraction
    sigma_bar_abs: object
    norm: Fraction
    expectation: Fraction
    sigma_bar: object
    violations: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return not self.violations

    def chain(self) -> str:
        return f"{self.expectation_abs} <= {self.sigma_bar_abs} <= {self.norm}"


def check_duality_bounds(instance: Instance, payoff: PayoffLike,
                         measures: Sequence[MartingaleMeasure] | MartingaleMeasure | None = None) -> list[DualityReport]:
    """E_Q|f| <= sigma_bar(|f|) <= ||f|| and E_Q f <= sigma_bar(f) for each verified Q."""
    if isinstance(measures, MartingaleMeasure):
        measures = [measures]
    if measures is None:
        measures = [construct_measure(instance)]
    measures = [Q for Q in measures if verify_martingale(instance, Q)]
    if not measures:
        raise ValueError("no verified martingale measure available")
    f = materialize(payoff, instance)
    af = [abs(v) for v in f]
    sb_abs = sigma_bar(instance, af).value
    nrm = norm(instance, f)
    sb = sigma_bar(instance, f).value
    reports = []
    for Q in measures:
        e_abs = expectation(instance, Q, af)
        e = expectation(instance, Q, f)
        bad = []
        if not e_abs <= sb_abs:
            bad.append("E_Q|f| <= sigma_bar(|f|)")
        if not sb_abs <= nrm:
            bad.append("sigma_bar(|f|) <= ||f||")
        if not e <= sb:
            bad.append("E_Q f <= sigma_bar(f)")
        reports.append(DualityReport(e_abs, sb_abs, nrm, e, sb, tuple(bad)))
    return reports
