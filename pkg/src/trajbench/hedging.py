"""Replication, superhedging operators, null sets and arbitrage checks.

Every operator is an exact LP over portfolios of maturity <= M (the regime
cap).  On a finite set of eventually constant classes, positive portfolios
form a polyhedral cone closed under addition, so the countable sums in the
definitions of the outer integral and the norm collapse to one portfolio;
sets that free positive portfolios can cover are relieved from the hedging
constraint.
"""
from __future__ import annotations

import math
import random
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .lp import GE, EQ, Infeasible, LinearProgram, LpOutcome, Optimal, Unbounded, solve_lp, verify_certificate
from .market import Instance, Node, check_complete, shifted_space
from .nodes import NodeKind, classify_tree, type_ii_nodes
from .payoff import PayoffLike, materialize
from .portfolio import SimplePortfolio

NEG_INF = -math.inf
ZERO = Fraction(0)
ONE = Fraction(1)


class NotReplicable(ValueError):
    """The payoff is not the terminal wealth of any simple portfolio."""

    def __init__(self, certificate):
        super().__init__("payoff is not replicable by a simple portfolio of maturity <= M")
        self.certificate = certificate


class DegenerateMarketWarning(UserWarning):
    """Every class is null, i.e. the norm of the constant 1 is zero."""


class AggregationError(ValueError):
    pass


# ---------------------------------------------------------------------------
# LP plumbing


@dataclass(frozen=True)
class _Hedge:
    nodes: list[Node]
    gains: list[list[Fraction]]  # class x trade node increment


def _hedge(instance: Instance) -> _Hedge:
    h = instance.cache.get("hedge")
    if h is None:
        nodes = instance.trade_nodes()
        idx = {nd.key: k for k, nd in enumerate(nodes)}
        cap = min(instance.regime.M, instance.depth)
        gains = []
        for cid in range(instance.n_classes):
            row = [ZERO] * len(nodes)
            p = instance.path(cid, cap)
            for j in range(cap):
                k = idx.get(p[: j + 1])
                if k is not None:
                    row[k] = p[j + 1] - p[j]
            gains.append(row)
        h = _Hedge(nodes, gains)
        instance.cache["hedge"] = h
    return h


def _portfolio(instance: Instance, V: Fraction, hs: Sequence[Fraction]) -> SimplePortfolio:
    nodes = _hedge(instance).nodes
    return SimplePortfolio(V, instance.regime.M, {nd.key: h for nd, h in zip(nodes, hs) if h != 0})


@dataclass
class PriceResult:
    """Value of a pricing LP with its certificates.

    ``value`` is a Fraction or ``-inf``; ``measure`` holds the dual weights
    per class when the dual is a probability measure; ``witness`` is a strict
    arbitrage portfolio when the value is ``-inf``.
    """

    value: object
    portfolio: SimplePortfolio | None = None
    measure: tuple[Fraction, ...] | None = None
    witness: SimplePortfolio | None = None
    lp: LinearProgram | None = None
    outcome: LpOutcome | None = None
    components: tuple[SimplePortfolio, ...] = field(default=())

    @property
    def finite(self) -> bool:
        return isinstance(self.value, Fraction)

    def certified(self) -> bool:
        return self.lp is not None and self.outcome is not None and verify_certificate(self.lp, self.outcome)


def _check_len(instance: Instance, f: Sequence[Fraction]) -> None:
    if len(f) != instance.n_classes:
        raise ValueError("payoff vector length does not match classes")


# ---------------------------------------------------------------------------
# replication and the law of one price


@dataclass(frozen=True)
class Replication:
    value: Fraction
    portfolio: SimplePortfolio


def replicate(instance: Instance, payoff: PayoffLike) -> Replication:
    """Exact replication; raises NotReplicable when the payoff is not in E."""
    f = materialize(payoff, instance)
    hd = _hedge(instance)
    k = len(hd.nodes)
    rows = [([ONE] + hd.gains[c], EQ, f[c]) for c in range(instance.n_classes)]
    lp = LinearProgram.build([0] * (k + 1), rows, free=True)
    out = solve_lp(lp)
    if isinstance(out, Infeasible):
        raise NotReplicable(out.certificate)
    return Replication(out.x[0], _portfolio(instance, out.x[0], out.x[1:]))


def replication_price(instance: Instance, payoff: PayoffLike) -> Fraction | None:
    """I(f), or None when f is not replicable."""
    try:
        return replicate(instance, payoff).value
    except NotReplicable:
        return None


def _minus_one_hedges_zero(instance: Instance, relation: str) -> bool:
    hd = _hedge(instance)
    k = len(hd.nodes)
    rows = [([ONE] + [ZERO] * k, EQ, -1)]
    rows += [([ONE] + hd.gains[c], relation, 0) for c in range(instance.n_classes)]
    lp = LinearProgram.build([0] * (k + 1), rows, free=True)
    return not isinstance(solve_lp(lp), Infeasible)


def check_lop(instance: Instance) -> bool:
    """No portfolio with V=-1 replicates 0."""
    return not _minus_one_hedges_zero(instance, EQ)


def check_mon(instance: Instance) -> bool:
    """No portfolio with V=-1 superhedges 0."""
    return not _minus_one_hedges_zero(instance, GE)


# ---------------------------------------------------------------------------
# null sets


def null_certificates(instance: Instance) -> dict[int, SimplePortfolio]:
    """Per null class, a zero-cost positive portfolio paying >= 1 there."""
    cached = instance.cache.get("null")
    if cached is not None:
        return cached
    hd = _hedge(instance)
    k = len(hd.nodes)
    certs = {}
    base = [(hd.gains[c], GE, 0) for c in range(instance.n_classes)]
    for cid in range(instance.n_classes):
        if k == 0:
            break
        lp = LinearProgram.build([0] * k, base + [(hd.gains[cid], GE, 1)], free=True)
        out = solve_lp(lp)
        if isinstance(out, Optimal):
            certs[cid] = _portfolio(instance, ZERO, out.x)
    instance.cache["null"] = certs
    return certs


def null_set(instance: Instance) -> frozenset[int]:
    """Largest set of classes whose indicator has norm zero."""
    return frozenset(null_certificates(instance))


def is_degenerate(instance: Instance) -> bool:
    return len(null_set(instance)) == instance.n_classes


# ---------------------------------------------------------------------------
# superhedging operators


def superhedge_price(instance: Instance, payoff: PayoffLike, relief: bool = True) -> PriceResult:
    """min V over portfolios whose terminal wealth dominates the payoff.

    With ``relief`` the constraint is only imposed off the null set.
    """
    f = materialize(payoff, instance)
    _check_len(instance, f)
    hd = _hedge(instance)
    k = len(hd.nodes)
    A = null_set(instance) if relief else frozenset()
    off = [c for c in range(instance.n_classes) if c not in A]
    rows = [([ONE] + hd.gains[c], GE, f[c]) for c in off]
    lp = LinearProgram.build([1] + [0] * k, rows, free=True)
    out = solve_lp(lp)
    if isinstance(out, Unbounded):
        return PriceResult(NEG_INF, witness=detect_strict_mia(instance), lp=lp, outcome=out)
    assert isinstance(out, Optimal), out
    measure = [ZERO] * instance.n_classes
    for c, y in zip(off, out.y):
        measure[c] = y
    return PriceResult(out.value, _portfolio(instance, out.x[0], out.x[1:]), tuple(measure), lp=lp, outcome=out)


def sigma_bar(instance: Instance, payoff: PayoffLike) -> PriceResult:
    """Outer superhedging integral."""
    return superhedge_price(instance, payoff, relief=True)


def sigma_under(instance: Instance, payoff: PayoffLike) -> PriceResult:
    """Inner integral -sigma_bar(-f)."""
    f = materialize(payoff, instance)
    res = sigma_bar(instance, [-v for v in f])
    value = -res.value if res.finite else math.inf
    return PriceResult(value, res.portfolio, res.measure, res.witness, res.lp, res.outcome)


def i_bar(instance: Instance, payoff: PayoffLike, components: int = 1) -> PriceResult:
    """Cheapest cover of a positive payoff by positive portfolios.

    ``components`` > 1 prices with a sum of that many separately positive
    portfolios; the collapse argument says this never changes the value.
    """
    f = materialize(payoff, instance)
    _check_len(instance, f)
    if any(v < 0 for v in f):
        raise ValueError("i_bar needs a payoff >= 0 on every class")
    if components < 1:
        raise ValueError("components must be >= 1")
    hd = _hedge(instance)
    k = len(hd.nodes)
    width = k + 1
    n_vars = width * components
    A = null_set(instance)
    rows = []
    for m in range(components):
        for c in range(instance.n_classes):
            row = [ZERO] * n_vars
            row[m * width] = ONE
            row[m * width + 1: (m + 1) * width] = hd.gains[c]
            rows.append((row, GE, 0))
    for c in range(instance.n_classes):
        if c in A:
            continue
        row = []
        for _ in range(components):
            row += [ONE] + hd.gains[c]
        rows.append((row, GE, f[c]))
    objective = ([ONE] + [ZERO] * k) * components
    free = ([False] + [True] * k) * components
    lp = LinearProgram.build(objective, rows, free=free)
    out = solve_lp(lp)
    assert isinstance(out, Optimal), out
    comps = tuple(_portfolio(instance, out.x[m * width], out.x[m * width + 1:(m + 1) * width])
                  for m in range(components))
    total = comps[0]
    for p in comps[1:]:
        total = total + p
    return PriceResult(out.value, total, lp=lp, outcome=out, components=comps)


def norm(instance: Instance, payoff: PayoffLike) -> Fraction:
    """||f|| = I_bar(|f|)."""
    f = materialize(payoff, instance)
    return i_bar(instance, [abs(v) for v in f]).value


NOT_INTEGRABLE = None


def integral_K(instance: Instance, payoff: PayoffLike):
    """sigma_bar(f) when inner and outer integral agree and are finite, else None."""
    f = materialize(payoff, instance)
    upper = sigma_bar(instance, f)
    lower = sigma_under(instance, f)
    if upper.finite and lower.finite and upper.value == lower.value:
        return upper.value
    return NOT_INTEGRABLE


# ---------------------------------------------------------------------------
# continuity conditions


def leinert_measure(instance: Instance) -> tuple[Fraction, ...] | None:
    """A tree martingale measure (up to the cap) vanishing on the null set, or None."""
    hd = _hedge(instance)
    A = null_set(instance)
    off = [c for c in range(instance.n_classes) if c not in A]
    if not off:
        return None
    rows = [([ONE] * len(off), EQ, 1)]
    for k in range(len(hd.nodes)):
        rows.append(([hd.gains[c][k] for c in off], EQ, 0))
    out = solve_lp(LinearProgram.build([0] * len(off), rows, free=False))
    if not isinstance(out, Optimal):
        return None
    q = [ZERO] * instance.n_classes
    for c, v in zip(off, out.x):
        q[c] = v
    return tuple(q)


def check_L(instance: Instance) -> bool:
    """Leinert's condition sigma_bar(0) >= 0 via feasibility of the dual."""
    return leinert_measure(instance) is not None


def nodewise_failures(instance: Instance) -> list[Node]:
    """Nodes whose shifted conditional space violates Leinert's condition."""
    bad = []
    for nd in sorted(instance.nodes.values(), key=lambda n: (n.depth, n.key)):
        if nd.depth >= instance.depth:
            continue
        sub = shifted_space(instance, nd.members[0], nd.depth)
        if not check_L(sub):
            bad.append(nd)
    return bad


def check_L_nodewise(instance: Instance) -> bool:
    return not nodewise_failures(instance)


@dataclass(frozen=True)
class KCheck:
    passed: bool
    checked: int
    counterexample: tuple[Fraction, ...] | None = None
    i_bar: object = None
    sigma_bar: object = None


def default_k_sample(instance: Instance, n_random: int = 5, seed: int = 0) -> list[list[Fraction]]:
    """Class indicators, straddles at every node value, and random positive payoffs."""
    n = instance.n_classes
    sample = []
    for c in range(n):
        sample.append([ONE if d == c else ZERO for d in range(n)])
    cap = min(instance.regime.M, instance.depth)
    seen = set()
    for nd in instance.nodes.values():
        if nd.depth < cap and (nd.depth, nd.value) not in seen:
            seen.add((nd.depth, nd.value))
            j = nd.depth + 1
            sample.append([abs(instance.value(c, j) - nd.value) for c in range(n)])
    rng = random.Random(seed)
    for _ in range(n_random):
        sample.append([Fraction(rng.randint(0, 6), rng.randint(1, 3)) for _ in range(n)])
    return sample


def check_K(instance: Instance, sample: Sequence[PayoffLike] | None = None) -> KCheck:
    """Search for a positive payoff with I_bar(f) != sigma_bar(f)."""
    if sample is None:
        sample = default_k_sample(instance)
    for count, payoff in enumerate(sample, 1):
        f = materialize(payoff, instance)
        ib = i_bar(instance, f).value
        sb = sigma_bar(instance, f).value
        if ib != sb:
            return KCheck(False, count, tuple(f), ib, sb)
    return KCheck(True, len(sample))


def check_nK_sufficient(instance: Instance) -> bool:
    """Complete families and no genuine type-II node: certifies (nL) and (nK)."""
    if not check_complete(instance.families).complete:
        return False
    return not type_ii_nodes(instance, include_truncation=False)


# ---------------------------------------------------------------------------
# arbitrage


def detect_strict_mia(instance: Instance) -> SimplePortfolio | None:
    """Zero-cost portfolio paying at least 1 on every class, if one exists."""
    hd = _hedge(instance)
    k = len(hd.nodes)
    if k == 0:
        return None
    rows = [(hd.gains[c], GE, 1) for c in range(instance.n_classes)]
    out = solve_lp(LinearProgram.build([0] * k, rows, free=True))
    if isinstance(out, Optimal):
        return _portfolio(instance, ZERO, out.x)
    return None


@dataclass(frozen=True)
class NullArbitrage:
    portfolio: SimplePortfolio
    class_id: int


def detect_null_arbitrage(instance: Instance) -> NullArbitrage | None:
    """Zero-cost portfolio, >= 0 off the null set and >= 1 on some class off it."""
    A = null_set(instance)
    if len(A) == instance.n_classes:
        warnings.warn("degenerate market: every class is null (||1|| = 0)", DegenerateMarketWarning,
                      stacklevel=2)
        return None
    hd = _hedge(instance)
    k = len(hd.nodes)
    if k == 0:
        return None
    off = [c for c in range(instance.n_classes) if c not in A]
    base = [(hd.gains[c], GE, 0) for c in off]
    for cid in off:
        out = solve_lp(LinearProgram.build([0] * k, base + [(hd.gains[cid], GE, 1)], free=True))
        if isinstance(out, Optimal):
            return NullArbitrage(_portfolio(instance, ZERO, out.x), cid)
    return None


# ---------------------------------------------------------------------------
# generalized portfolios


@dataclass(frozen=True)
class GeneralizedPortfolio:
    """Finite list of simple portfolios; components 1.. must be positive."""

    components: tuple[SimplePortfolio, ...]

    def validate(self, instance: Instance) -> None:
        from .portfolio import is_positive

        for m, p in enumerate(self.components[1:], 1):
            if not is_positive(instance, p):
                raise ValueError(f"component {m} is not a positive portfolio")

    @property
    def V(self) -> Fraction:
        return sum((p.V for p in self.components), ZERO)


def aggregate(instance: Instance, gp: GeneralizedPortfolio, n: int) -> dict:
    """Summed holdings per node of depth < n.

    Requires that no type-II node occurs before depth n.
    """
    bad = type_ii_nodes(instance, before=n)
    if bad:
        raise AggregationError(f"type-II node {bad[0].label()} before depth {n}")
    out: dict = {}
    for p in gp.components:
        for key, h in p.holdings.items():
            depth = len(key) - 1
            if depth < min(n, p.n):
                out[key] = out.get(key, ZERO) + h
    return {k: v for k, v in out.items() if v != 0}


def node_kinds_summary(instance: Instance) -> dict[NodeKind, int]:
    counts: dict[NodeKind, int] = {}
    for key, c in classify_tree(instance).items():
        if len(key) - 1 < instance.depth:
            counts[c.kind] = counts.get(c.kind, 0) + 1
    return counts
