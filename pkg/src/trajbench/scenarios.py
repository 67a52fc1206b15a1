"""Built-in scenarios and random instance generators."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .lp import GE, LE, RELATIONS, LinearProgram
from .market import DelayedJump, Explicit, Instance, Regime, Trajectory, build_instance
from .portfolio import SimplePortfolio, terminal_wealth

F = Fraction


def up_family() -> DelayedJump:
    """Paths 1, 2, ..., 2, 4, 4, ... jumping to 4 at time n+1."""
    return DelayedJump((F(1),), F(2), F(4), label="U")


def scn_a(N: int = 1, M: int = 1) -> Instance:
    fam = Explicit(
        (Trajectory.from_path([1, 0]), Trajectory.from_path([1, 1]), Trajectory.from_path([1, 2])),
        ("T-", "T0", "T+"),
    )
    return build_instance(1, [fam], Regime(N, M))


def scn_b(N: int = 6, M: int = 3) -> Instance:
    down = Explicit(
        tuple(Trajectory.from_path([1, 1 - F(1, n)]) for n in range(1, N + 1)),
        tuple(f"D{n}" for n in range(1, N + 1)),
    )
    return build_instance(1, [up_family(), down], Regime(N, M))


def scn_c(N: int = 4, M: int = 3) -> Instance:
    rest = Explicit((Trajectory.from_path([1, 0]), Trajectory.constant(1)), ("D", "Z"))
    return build_instance(1, [up_family(), rest], Regime(N, M))


def _lattice(s0: int, steps: dict[str, int], depth: int, N: int, M: int) -> Instance:
    trajs, labels = [], []
    for word in itertools.product(steps, repeat=depth):
        vals = [s0]
        for ch in word:
            vals.append(vals[-1] + steps[ch])
        trajs.append(Trajectory.from_path(vals))
        labels.append("".join(word))
    return build_instance(s0, [Explicit(tuple(trajs), tuple(labels))], Regime(N, M))


def scn_d(N: int = 1, M: int = 3) -> Instance:
    """Additive binary tree, moves +-1, depth 3."""
    return _lattice(3, {"u": 1, "d": -1}, 3, N, M)


def scn_e(N: int = 1, M: int = 2) -> Instance:
    """Trinomial tree, moves -1, 0, +1, depth 2."""
    return _lattice(2, {"u": 1, "m": 0, "d": -1}, 2, N, M)


@dataclass(frozen=True)
class Scenario:
    id: str
    description: str
    generator: Callable[[int, int], Instance]
    default_N: int
    default_M: int

    def build(self, N: int | None = None, M: int | None = None) -> Instance:
        return self.generator(self.default_N if N is None else N, self.default_M if M is None else M)


SCENARIOS: dict[str, Scenario] = {
    s.id: s
    for s in [
        Scenario("SCN-A", "one period, s0=1, moves to {0,1,2}", scn_a, 1, 1),
        Scenario("SCN-B", "up family plateau 2 jumping to 4, down family 1-1/n", scn_b, 6, 3),
        Scenario("SCN-C", "up family, drop to 0, constant 1", scn_c, 4, 3),
        Scenario("SCN-D", "additive binary tree, depth 3", scn_d, 1, 3),
        Scenario("SCN-E", "trinomial tree, depth 2", scn_e, 1, 2),
    ]
}


def get_scenario(name: str) -> Scenario:
    key = name.upper()
    if not key.startswith("SCN-"):
        key = "SCN-" + key
    try:
        return SCENARIOS[key]
    except KeyError:
        raise KeyError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}") from None


_STEPS = (F(1), F(2), F(1, 2))


def _child_sets(rng: random.Random, v: Fraction, avoid_type_ii: bool) -> list[Fraction]:
    a, b = rng.choice(_STEPS), rng.choice(_STEPS)
    options = [
        [v],
        [v, v + a],
        [v, v - a],
        [v + a, v - b],
        [v - b, v, v + a],
    ]
    if not avoid_type_ii:
        options += [[v + a], [v - a], [v + a, v + a + b]]
    return rng.choice(options)


def random_instance(rng: random.Random, max_depth: int = 4, max_classes: int = 12,
                    avoid_type_ii: bool = False, M: int | None = None) -> Instance:
    """Random finite tree of eventually constant paths.

    With ``avoid_type_ii`` every non-flat node keeps a constant child or moves
    both ways, so no node is a type-II arbitrage node.
    """
    depth = rng.randint(1, max_depth)
    paths = [[F(rng.randint(2, 6))]]
    for _ in range(depth):
        nxt = []
        for k, p in enumerate(paths):
            budget = max_classes - len(nxt) - (len(paths) - k - 1)
            while True:
                kids = _child_sets(rng, p[-1], avoid_type_ii)
                if len(kids) <= budget:
                    break
                kids = [p[-1]] if avoid_type_ii else [p[-1] + rng.choice(_STEPS) * rng.choice((1, -1))]
                if len(kids) <= budget:
                    break
            for c in kids:
                nxt.append(p + [c])
        paths = nxt
    trajs = [Trajectory.from_path(p) for p in paths]
    uniq = list(dict.fromkeys(trajs))
    labels = tuple(f"s{k}" for k in range(len(uniq)))
    if M is None:
        M = rng.randint(1, depth + 1)
    return build_instance(paths[0][0], [Explicit(tuple(uniq), labels)], Regime(1, M))


def random_payoff(rng: random.Random, instance: Instance, positive: bool = False) -> list[Fraction]:
    lo = 0 if positive else -4
    return [F(rng.randint(lo, 4), rng.randint(1, 3)) for _ in range(instance.n_classes)]


def random_portfolio(rng: random.Random, instance: Instance, positive: bool = False) -> SimplePortfolio:
    """Random holdings on the trade nodes; ``positive`` shifts V so the portfolio is positive."""
    M = instance.regime.M
    holdings = {nd.key: F(rng.randint(-3, 3), rng.randint(1, 2)) for nd in instance.trade_nodes()}
    p = SimplePortfolio(F(rng.randint(-3, 3), rng.randint(1, 2)), M, holdings)
    if positive:
        low = min(terminal_wealth(instance, p)) - p.V
        p = SimplePortfolio(max(-low, F(0)) + F(rng.randint(0, 2)), M, holdings)
    return p


def random_lp(rng: random.Random, n_max: int = 8, m_max: int = 6, bounded: bool = False) -> LinearProgram:
    """Small random program; ``bounded`` adds box rows so it is never unbounded."""
    n = rng.randint(1, n_max)
    m = rng.randint(1, m_max)
    rows = []
    for _ in range(m):
        coeffs = [rng.randint(-4, 4) for _ in range(n)]
        rows.append((coeffs, rng.choice(RELATIONS), rng.randint(-5, 5)))
    free = [rng.random() < 0.3 for _ in range(n)]
    if bounded:
        for j in range(n):
            e = [0] * n
            e[j] = 1
            rows.append((e, LE, 6))
            rows.append((e, GE, -6))
    obj = [rng.randint(-5, 5) for _ in range(n)]
    return LinearProgram.build(obj, rows, sense=rng.choice(("min", "max")), free=free)
