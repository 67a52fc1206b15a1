"""Payoff expressions over coordinates ``S[i]``.

Grammar: rational literals, ``S[i]``, ``+ - *``, ``abs``, ``max``, ``min`` and
``ind(<comparison>)``.  Division is only accepted between constants, so that
``1/2`` is a literal and evaluation never divides by a path value.
"""
from __future__ import annotations

import ast
import operator
from fractions import Fraction
from typing import Callable, Mapping, Sequence, Union

from .market import Instance, Trajectory


class PayoffError(ValueError):
    """Malformed payoff expression or index outside the horizon."""


_Eval = Callable[[Callable[[int], Fraction]], Fraction]

_CMP = {
    ast.Lt: operator.lt,
    ast.LtE: operator.le,
    ast.Gt: operator.gt,
    ast.GtE: operator.ge,
    ast.Eq: operator.eq,
    ast.NotEq: operator.ne,
}


class _Compiler:
    def __init__(self):
        self.indices: set[int] = set()

    def const(self, node) -> Fraction | None:
        """Fold a constant subexpression, or None if it reads the path."""
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
                and not isinstance(node.value, bool):
            return Fraction(repr(node.value)) if isinstance(node.value, float) else Fraction(node.value)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = self.const(node.operand)
            if v is None:
                return None
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and isinstance(node.op, (ast.Add, ast.Sub, ast.Mult, ast.Div)):
            a, b = self.const(node.left), self.const(node.right)
            if a is None or b is None:
                return None
            if isinstance(node.op, ast.Div):
                if b == 0:
                    raise PayoffError("division by zero in literal")
                return a / b
            return {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul}[type(node.op)](a, b)
        return None

    def expr(self, node) -> _Eval:
        c = self.const(node)
        if c is not None:
            return lambda S, c=c: c
        if isinstance(node, ast.Subscript):
            if not (isinstance(node.value, ast.Name) and node.value.id == "S"):
                raise PayoffError("only the coordinate process S can be indexed")
            idx = node.slice
            if isinstance(idx, ast.Index):  # pragma: no cover - python < 3.9
                idx = idx.value
            if not (isinstance(idx, ast.Constant) and isinstance(idx.value, int) and idx.value >= 0):
                raise PayoffError("coordinate index must be a nonnegative integer literal")
            i = idx.value
            self.indices.add(i)
            return lambda S, i=i: S(i)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            f = self.expr(node.operand)
            if isinstance(node.op, ast.USub):
                return lambda S, f=f: -f(S)
            return f
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Div):
                raise PayoffError("division is only allowed between constants")
            ops = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul}
            op = ops.get(type(node.op))
            if op is None:
                raise PayoffError(f"operator {type(node.op).__name__} not supported")
            a, b = self.expr(node.left), self.expr(node.right)
            return lambda S, a=a, b=b, op=op: op(a(S), b(S))
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and not node.keywords:
            name = node.func.id
            if name == "abs":
                if len(node.args) != 1:
                    raise PayoffError("abs takes one argument")
                f = self.expr(node.args[0])
                return lambda S, f=f: abs(f(S))
            if name in ("max", "min"):
                if len(node.args) < 2:
                    raise PayoffError(f"{name} takes at least two arguments")
                fs = [self.expr(a) for a in node.args]
                agg = max if name == "max" else min
                return lambda S, fs=fs, agg=agg: agg(f(S) for f in fs)
            if name == "ind":
                if len(node.args) != 1:
                    raise PayoffError("ind takes one comparison")
                p = self.pred(node.args[0])
                return lambda S, p=p: Fraction(1) if p(S) else Fraction(0)
            raise PayoffError(f"unknown function {name!r}")
        raise PayoffError(f"unsupported syntax: {ast.dump(node)[:60]}")

    def pred(self, node) -> Callable[[Callable[[int], Fraction]], bool]:
        if isinstance(node, ast.Compare):
            terms = [self.expr(node.left)] + [self.expr(c) for c in node.comparators]
            ops = []
            for op in node.ops:
                fn = _CMP.get(type(op))
                if fn is None:
                    raise PayoffError(f"comparison {type(op).__name__} not supported")
                ops.append(fn)

            def chain(S, terms=terms, ops=ops):
                vals = [t(S) for t in terms]
                return all(op(a, b) for op, a, b in zip(ops, vals, vals[1:]))
            return chain
        if isinstance(node, ast.BoolOp):
            parts = [self.pred(v) for v in node.values]
            if isinstance(node.op, ast.And):
                return lambda S, parts=parts: all(p(S) for p in parts)
            return lambda S, parts=parts: any(p(S) for p in parts)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.Not):
            p = self.pred(node.operand)
            return lambda S, p=p: not p(S)
        raise PayoffError("ind() expects a comparison")


class Payoff:
    """A compiled payoff expression such as ``"abs(S[1]-1)"``."""

    def __init__(self, source: str):
        self.source = source.strip()
        try:
            tree = ast.parse(self.source, mode="eval")
        except SyntaxError as exc:
            raise PayoffError(f"cannot parse payoff {source!r}: {exc.msg}") from None
        comp = _Compiler()
        self._fn = comp.expr(tree.body)
        self.indices = frozenset(comp.indices)

    @property
    def maturity(self) -> int:
        """Largest coordinate index read (0 for constants)."""
        return max(self.indices, default=0)

    def __call__(self, value_at: Callable[[int], Fraction]) -> Fraction:
        return self._fn(value_at)

    def on(self, traj: Trajectory) -> Fraction:
        return self._fn(traj.value)

    def __repr__(self) -> str:
        return f"Payoff({self.source!r})"


PayoffLike = Union[str, Payoff, Sequence[Fraction], Mapping[int, Fraction]]


def evaluate_payoff(payoff: Union[str, Payoff], instance: Instance) -> list[Fraction]:
    """Exact value of the payoff on every class of ``instance``."""
    if isinstance(payoff, str):
        payoff = Payoff(payoff)
    horizon = max(instance.depth, instance.regime.M)
    if payoff.maturity > horizon:
        raise PayoffError(f"index S[{payoff.maturity}] is beyond the horizon {horizon}")
    return [payoff(lambda t, c=cid: instance.value(c, t)) for cid in range(instance.n_classes)]


def materialize(payoff: PayoffLike, instance: Instance) -> list[Fraction]:
    """Payoff vector over classes from an expression, vector or sparse mapping."""
    if isinstance(payoff, (str, Payoff)):
        return evaluate_payoff(payoff, instance)
    if isinstance(payoff, Mapping):
        out = [Fraction(0)] * instance.n_classes
        for k, v in payoff.items():
            out[instance.class_id(k) if isinstance(k, str) else k] = Fraction(v)
        return out
    vec = [Fraction(v) for v in payoff]
    if len(vec) != instance.n_classes:
        raise PayoffError(f"payoff vector has {len(vec)} entries, instance has {instance.n_classes} classes")
    return vec


def indicator(instance: Instance, *labels: str) -> list[Fraction]:
    """Indicator vector of the named classes."""
    ids = {instance.class_id(lab) for lab in labels}
    return [Fraction(1) if c in ids else Fraction(0) for c in range(instance.n_classes)]
