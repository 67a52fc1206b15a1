"""Node classification, the stopping time tau and trajectory-set reduction."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .market import DelayedJump, Instance, Node
from .portfolio import SimplePortfolio, value_process


class NodeKind(enum.Enum):
    FLAT = "flat"
    TYPE_I = "arbitrage-I"
    TYPE_II = "arbitrage-II"
    UP_DOWN = "up-down"


@dataclass(frozen=True)
class NodeClass:
    kind: NodeKind
    direction: int = 0  # epsilon for arbitrage nodes

    def __str__(self) -> str:
        if self.direction:
            return f"{self.kind.value}({self.direction:+d})"
        return self.kind.value


class TreeError(RuntimeError):
    pass


def classify_values(value: Fraction, children: Iterable[Fraction]) -> NodeClass:
    incs = {c - value for c in children}
    if not incs:
        raise TreeError("node has no children")
    if incs == {0}:
        return NodeClass(NodeKind.FLAT)
    up = any(d > 0 for d in incs)
    down = any(d < 0 for d in incs)
    if up and down:
        return NodeClass(NodeKind.UP_DOWN)
    eps = 1 if up else -1
    if 0 in incs:
        return NodeClass(NodeKind.TYPE_I, eps)
    return NodeClass(NodeKind.TYPE_II, eps)


def classify_node(node: Node) -> NodeClass:
    return classify_values(node.value, node.children)


def classify_tree(instance: Instance) -> dict:
    """NodeClass for every node key (leaves are flat)."""
    out = instance.cache.get("classes")
    if out is None:
        out = {k: classify_node(nd) for k, nd in instance.nodes.items()}
        instance.cache["classes"] = out
    return out


def is_truncation_induced(instance: Instance, node: Node) -> bool:
    """Type-II node that the untruncated DelayedJump family would make type I.

    True when the node sits on the plateau-forever path of some DelayedJump
    family, i.e. the infinite family supplies the constant continuation.
    """
    if classify_node(node).kind is not NodeKind.TYPE_II:
        return False
    prefix = instance.history + node.key
    g = len(prefix) - 1
    for fam in instance.families:
        if isinstance(fam, DelayedJump):
            lim = fam.limit()
            if lim.path(g) == prefix and lim.value(g + 1) == node.value:
                return True
    return False


@dataclass(frozen=True)
class NodeRow:
    node: Node
    cls: NodeClass
    truncation: bool


def node_table(instance: Instance) -> list[NodeRow]:
    """Classification of every non-leaf node, ordered by depth then prefix."""
    classes = classify_tree(instance)
    rows = []
    for nd in sorted(instance.nodes.values(), key=lambda n: (n.depth, n.key)):
        if nd.depth >= instance.depth:
            continue
        rows.append(NodeRow(nd, classes[nd.key], is_truncation_induced(instance, nd)))
    return rows


def type_ii_nodes(instance: Instance, before: int | None = None,
                  include_truncation: bool = True) -> list[Node]:
    """Type-II nodes at depth < ``before`` (all depths when None)."""
    classes = classify_tree(instance)
    out = []
    for nd in instance.nodes.values():
        if before is not None and nd.depth >= before:
            continue
        if classes[nd.key].kind is NodeKind.TYPE_II:
            if include_truncation or not is_truncation_induced(instance, nd):
                out.append(nd)
    out.sort(key=lambda n: (n.depth, n.key))
    return out


@dataclass(frozen=True)
class ReductionReport:
    n: int
    tau: tuple[int, ...]
    removed: frozenset[int]
    reduced: Instance


def stopping_time(instance: Instance, cid: int, n: int) -> int:
    """First j <= n leaving a type-I node by a strict move, else n+1."""
    classes = classify_tree(instance)
    for j in range(1, n + 1):
        if j > instance.depth:
            break
        node = instance.node_of(cid, j - 1)
        if classes[node.key].kind is NodeKind.TYPE_I and instance.value(cid, j) != instance.value(cid, j - 1):
            return j
    return n + 1


def compute_reduction(instance: Instance, n: int) -> ReductionReport:
    if n < 1:
        raise ValueError("reduction depth n must be >= 1")
    tau = tuple(stopping_time(instance, c, n) for c in range(instance.n_classes))
    removed = frozenset(c for c, t in enumerate(tau) if t <= n)
    survivors = [c for c in range(instance.n_classes) if c not in removed]
    return ReductionReport(n, tau, removed, instance.subset(survivors))


def verify_reduction_classes(instance: Instance, n: int) -> bool:
    """Check how nodes up to time n-1 re-classify after removing N_n.

    Up-down nodes must stay up-down and flat or type-I nodes must become flat.
    A surviving type-II node before depth n is reported as a violation.
    """
    rep = compute_reduction(instance, n)
    red = rep.reduced
    orig_cls = classify_tree(instance)
    red_cls = classify_tree(red)
    for new_id, old_id in enumerate(_old_ids(instance, red)):
        for i in range(min(n, instance.depth + 1)):
            o = orig_cls[instance.node_of(old_id, i).key].kind
            r = red_cls[red.node_of(new_id, i).key].kind if i <= red.depth else NodeKind.FLAT
            if o is NodeKind.UP_DOWN and r is not NodeKind.UP_DOWN:
                return False
            if o in (NodeKind.FLAT, NodeKind.TYPE_I) and r is not NodeKind.FLAT:
                return False
            if o is NodeKind.TYPE_II:
                return False
    return True


def _old_ids(instance: Instance, sub: Instance) -> list[int]:
    pos = {sid: k for k, sid in enumerate(instance.source_ids)}
    return [pos[sid] for sid in sub.source_ids]


def free_positive_portfolio(instance: Instance, include_truncation: bool = True) -> SimplePortfolio:
    """Zero-cost portfolio holding epsilon at each one-sided node below the cap.

    Type-I nodes always qualify; truncation-induced type-II nodes qualify when
    ``include_truncation`` is set, since the untruncated family makes them type I.
    """
    M = instance.regime.M
    classes = classify_tree(instance)
    holdings = {}
    for key, nd in instance.nodes.items():
        if nd.depth >= min(M, instance.depth):
            continue
        c = classes[key]
        if c.kind is NodeKind.TYPE_I or (
                include_truncation and c.kind is NodeKind.TYPE_II and is_truncation_induced(instance, nd)):
            holdings[key] = Fraction(c.direction)
    return SimplePortfolio(Fraction(0), M, holdings)


def check_value_nonnegative(instance: Instance, portfolio: SimplePortfolio) -> bool:
    """Pi_j >= 0 for every class and every j up to maturity."""
    return all(v >= 0 for cid in range(instance.n_classes) for v in value_process(instance, portfolio, cid))
