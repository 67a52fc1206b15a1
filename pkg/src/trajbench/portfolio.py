"""Simple portfolios on a compiled tree and their wealth processes."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .market import Instance, NodeKey


@dataclass(frozen=True)
class SimplePortfolio:
    """Initial endowment ``V``, maturity ``n`` and holdings per tree node.

    A node key is the price prefix (S_0..S_i); holdings on nodes of depth
    >= n are ignored.  Indexing by node makes the strategy nonanticipating.
    """

    V: Fraction
    n: int
    holdings: Mapping[NodeKey, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("maturity must be nonnegative")

    def holding(self, key: NodeKey) -> Fraction:
        if len(key) - 1 >= self.n:
            return Fraction(0)
        return self.holdings.get(key, Fraction(0))

    def scaled(self, c) -> "SimplePortfolio":
        c = Fraction(c)
        return SimplePortfolio(self.V * c, self.n, {k: h * c for k, h in self.holdings.items()})

    def __add__(self, other: "SimplePortfolio") -> "SimplePortfolio":
        h = dict(self.holdings)
        for k, v in other.holdings.items():
            if len(k) - 1 < other.n:
                h[k] = h.get(k, Fraction(0)) + v
        own = {k: v for k, v in h.items() if len(k) - 1 < max(self.n, other.n)}
        return SimplePortfolio(self.V + other.V, max(self.n, other.n), own)

    def nonzero(self) -> dict[NodeKey, Fraction]:
        return {k: v for k, v in self.holdings.items() if v != 0 and len(k) - 1 < self.n}


def zero_portfolio(n: int = 1) -> SimplePortfolio:
    return SimplePortfolio(Fraction(0), n, {})


def wealth(instance: Instance, portfolio: SimplePortfolio, cid: int, j: int | None = None) -> Fraction:
    """Pi_j = V + sum_{i < min(j, n)} H_i (S_{i+1} - S_i); ``j=None`` means j = infinity."""
    stop = portfolio.n if j is None else min(j, portfolio.n)
    stop = min(stop, instance.depth)
    path = instance.path(cid, stop)
    total = Fraction(portfolio.V)
    for i in range(stop):
        dS = path[i + 1] - path[i]
        if dS:
            total += portfolio.holding(path[: i + 1]) * dS
    return total


def terminal_wealth(instance: Instance, portfolio: SimplePortfolio) -> list[Fraction]:
    return [wealth(instance, portfolio, cid) for cid in range(instance.n_classes)]


def value_process(instance: Instance, portfolio: SimplePortfolio, cid: int) -> list[Fraction]:
    """Pi_0, ..., Pi_n along class ``cid``."""
    return [wealth(instance, portfolio, cid, j) for j in range(portfolio.n + 1)]


def is_positive(instance: Instance, portfolio: SimplePortfolio) -> bool:
    return portfolio.V >= 0 and all(w >= 0 for w in terminal_wealth(instance, portfolio))


def describe(portfolio: SimplePortfolio) -> str:
    parts = [f"V={portfolio.V}", f"n={portfolio.n}"]
    for k, v in sorted(portfolio.nonzero().items(), key=lambda kv: (len(kv[0]), kv[0])):
        parts.append("H(" + ",".join(str(x) for x in k) + f")={v}")
    return " ".join(parts)
