"""Exact rational linear programming.

A dense two-phase tableau simplex over :class:`fractions.Fraction` using
Bland's rule, certificate checking for every outcome, and a Fourier-Motzkin
elimination oracle that shares no code with the simplex path.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

LE, EQ, GE = "<=", "==", ">="
RELATIONS = (LE, EQ, GE)

ExtendedRational = Union[Fraction, float, None]


class LPSizeError(ValueError):
    """Raised when the elimination oracle is asked to handle too many variables."""


def _frac(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


@dataclass(frozen=True)
class Constraint:
    coeffs: tuple[Fraction, ...]
    relation: str
    rhs: Fraction


@dataclass(frozen=True)
class LinearProgram:
    """``sense`` c.x subject to rows ``a.x (rel) b``.

    ``free[j]`` is True for an unrestricted variable and False for ``x_j >= 0``.
    """

    objective: tuple[Fraction, ...]
    constraints: tuple[Constraint, ...]
    free: tuple[bool, ...]
    sense: str = "min"

    @classmethod
    def build(cls, objective, constraints=(), *, sense="min", free=False) -> "LinearProgram":
        obj = tuple(_frac(c) for c in objective)
        n = len(obj)
        if isinstance(free, bool):
            free_t = (free,) * n
        else:
            free_t = tuple(bool(f) for f in free)
        rows = []
        for coeffs, rel, rhs in constraints:
            rows.append(Constraint(tuple(_frac(a) for a in coeffs), rel, _frac(rhs)))
        lp = cls(obj, tuple(rows), free_t, sense)
        lp.validate()
        return lp

    @property
    def n_vars(self) -> int:
        return len(self.objective)

    def validate(self) -> None:
        if self.sense not in ("min", "max"):
            raise ValueError(f"unknown sense {self.sense!r}")
        if len(self.free) != self.n_vars:
            raise ValueError("free flags do not match variable count")
        for i, con in enumerate(self.constraints):
            if len(con.coeffs) != self.n_vars:
                raise ValueError(f"constraint {i} has {len(con.coeffs)} coefficients, expected {self.n_vars}")
            if con.relation not in RELATIONS:
                raise ValueError(f"constraint {i}: unknown relation {con.relation!r}")

    def scaled(self, factor) -> "LinearProgram":
        """Same program with rhs and objective multiplied by ``factor``."""
        factor = _frac(factor)
        rows = tuple(Constraint(c.coeffs, c.relation, c.rhs * factor) for c in self.constraints)
        return LinearProgram(tuple(c * factor for c in self.objective), rows, self.free, self.sense)


@dataclass(frozen=True)
class Optimal:
    value: Fraction
    x: tuple[Fraction, ...]
    # dual multipliers, one per constraint, in the convention of ``lp.sense``
    y: tuple[Fraction, ...]


@dataclass(frozen=True)
class Infeasible:
    # y with sign(y_i) matching the row relation, A^T y <= 0 (== 0 on free
    # columns) and b.y > 0
    certificate: tuple[Fraction, ...]


@dataclass(frozen=True)
class Unbounded:
    x: tuple[Fraction, ...]
    ray: tuple[Fraction, ...]


LpOutcome = Union[Optimal, Infeasible, Unbounded]


def _dot(a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    return sum((p * q for p, q in zip(a, b)), Fraction(0))


# ---------------------------------------------------------------------------
# simplex


class _Tableau:
    """Canonical-form tableau ``B^-1 [A | I_art | b]`` with a basis list."""

    def __init__(self, rows: list[list[Fraction]], rhs: list[Fraction], n_cols: int):
        m = len(rows)
        self.m = m
        self.n_cols = n_cols  # structural columns (before artificials)
        self.T = []
        for i in range(m):
            art = [Fraction(0)] * m
            art[i] = Fraction(1)
            self.T.append(list(rows[i]) + art + [rhs[i]])
        self.basis = [n_cols + i for i in range(m)]

    def pivot(self, r: int, c: int) -> None:
        T = self.T
        piv = T[r][c]
        row = [v / piv if v else v for v in T[r]]
        T[r] = row
        nz = [k for k, v in enumerate(row) if v]
        for i in range(self.m):
            if i != r:
                f = T[i][c]
                if f:
                    Ti = T[i]
                    for k in nz:
                        Ti[k] -= f * row[k]
        self.basis[r] = c

    def duals(self, cost: Sequence[Fraction]) -> list[Fraction]:
        # y^T = c_B^T B^-1; B^-1 sits in the artificial block
        base = self.n_cols
        y = [Fraction(0)] * self.m
        for r, b in enumerate(self.basis):
            cb = cost[b]
            if cb:
                Tr = self.T[r]
                for i in range(self.m):
                    y[i] += cb * Tr[base + i]
        return y

    def run(self, cost: Sequence[Fraction], allowed: int):
        """Bland-rule simplex on columns ``< allowed``; returns None or an entering column with no pivot."""
        m = self.m
        T = self.T
        while True:
            cb = [cost[b] for b in self.basis]
            entering = None
            live = [i for i in range(m) if cb[i]]
            for j in range(allowed):
                rc = cost[j]
                for i in live:
                    if T[i][j]:
                        rc -= cb[i] * T[i][j]
                if rc < 0:
                    entering = j
                    break
            if entering is None:
                return None
            best = None
            for i in range(m):
                a = T[i][entering]
                if a > 0:
                    ratio = T[i][-1] / a
                    key = (ratio, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return entering
            self.pivot(best[1], entering)


def solve_lp(lp: LinearProgram) -> LpOutcome:
    """Solve ``lp`` exactly; every outcome carries a checkable certificate."""
    lp.validate()
    n = lp.n_vars
    s = 1 if lp.sense == "min" else -1
    cmin = [s * c for c in lp.objective]

    # column layout: per variable one column (nonneg) or two (free split)
    col_of: list[tuple[int, int | None]] = []
    n_cols = 0
    for j in range(n):
        if lp.free[j]:
            col_of.append((n_cols, n_cols + 1))
            n_cols += 2
        else:
            col_of.append((n_cols, None))
            n_cols += 1
    slack_of: dict[int, int] = {}
    for i, con in enumerate(lp.constraints):
        if con.relation != EQ:
            slack_of[i] = n_cols
            n_cols += 1

    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    negated: list[bool] = []
    for i, con in enumerate(lp.constraints):
        row = [Fraction(0)] * n_cols
        for j, a in enumerate(con.coeffs):
            p, q = col_of[j]
            row[p] = a
            if q is not None:
                row[q] = -a
        if con.relation == LE:
            row[slack_of[i]] = Fraction(1)
        elif con.relation == GE:
            row[slack_of[i]] = Fraction(-1)
        b = con.rhs
        neg = b < 0
        if neg:
            row = [-v for v in row]
            b = -b
        rows.append(row)
        rhs.append(b)
        negated.append(neg)

    m = len(rows)
    tab = _Tableau(rows, rhs, n_cols)
    total = n_cols + m

    def to_original_rows(yv: list[Fraction]) -> tuple[Fraction, ...]:
        return tuple(-v if negated[i] else v for i, v in enumerate(yv))

    def primal_point() -> list[Fraction]:
        z = [Fraction(0)] * total
        for r, b in enumerate(tab.basis):
            z[b] = tab.T[r][-1]
        x = []
        for p, q in col_of:
            x.append(z[p] - (z[q] if q is not None else 0))
        return x

    # phase 1
    cost1 = [Fraction(0)] * n_cols + [Fraction(1)] * m
    tab.run(cost1, total)
    w = sum((tab.T[r][-1] for r, b in enumerate(tab.basis) if b >= n_cols), Fraction(0))
    if w > 0:
        y1 = tab.duals(cost1)
        return Infeasible(to_original_rows(y1))

    # drive zero-level artificials out of the basis where possible
    for r in range(m):
        if tab.basis[r] >= n_cols:
            for j in range(n_cols):
                if tab.T[r][j] != 0:
                    tab.pivot(r, j)
                    break

    # phase 2
    cost2 = [Fraction(0)] * total
    for j in range(n):
        p, q = col_of[j]
        cost2[p] = cmin[j]
        if q is not None:
            cost2[q] = -cmin[j]
    entering = tab.run(cost2, n_cols)
    if entering is not None:
        x = primal_point()
        dz = [Fraction(0)] * total
        dz[entering] = Fraction(1)
        for r, b in enumerate(tab.basis):
            dz[b] = -tab.T[r][entering]
        ray = [dz[p] - (dz[q] if q is not None else 0) for p, q in col_of]
        return Unbounded(tuple(x), tuple(ray))

    x = primal_point()
    y = to_original_rows(tab.duals(cost2))
    value = s * _dot(cmin, x)
    return Optimal(value, tuple(x), tuple(s * v for v in y))


# ---------------------------------------------------------------------------
# certificates


def _row_sign_ok(rel: str, y: Fraction) -> bool:
    # multiplier sign for the min-form dual / Farkas system
    if rel == GE:
        return y >= 0
    if rel == LE:
        return y <= 0
    return True


def is_feasible(lp: LinearProgram, x: Sequence[Fraction]) -> bool:
    if len(x) != lp.n_vars:
        return False
    for j, f in enumerate(lp.free):
        if not f and x[j] < 0:
            return False
    for con in lp.constraints:
        lhs = _dot(con.coeffs, x)
        if con.relation == LE and not lhs <= con.rhs:
            return False
        if con.relation == GE and not lhs >= con.rhs:
            return False
        if con.relation == EQ and lhs != con.rhs:
            return False
    return True


def _columns(lp: LinearProgram, y: Sequence[Fraction]) -> list[Fraction]:
    return [sum((con.coeffs[j] * y[i] for i, con in enumerate(lp.constraints)), Fraction(0))
            for j in range(lp.n_vars)]


def verify_certificate(lp: LinearProgram, outcome: LpOutcome) -> bool:
    """Check the certificate carried by ``outcome`` exactly."""
    s = 1 if lp.sense == "min" else -1
    m = len(lp.constraints)
    if isinstance(outcome, Optimal):
        if not is_feasible(lp, outcome.x) or len(outcome.y) != m:
            return False
        y = [s * v for v in outcome.y]
        if not all(_row_sign_ok(con.relation, y[i]) for i, con in enumerate(lp.constraints)):
            return False
        aty = _columns(lp, y)
        for j in range(lp.n_vars):
            c = s * lp.objective[j]
            if lp.free[j] and aty[j] != c:
                return False
            if not lp.free[j] and aty[j] > c:
                return False
        primal = _dot(lp.objective, outcome.x)
        dual = s * sum((con.rhs * y[i] for i, con in enumerate(lp.constraints)), Fraction(0))
        return primal == dual == outcome.value
    if isinstance(outcome, Infeasible):
        y = outcome.certificate
        if len(y) != m:
            return False
        if not all(_row_sign_ok(con.relation, y[i]) for i, con in enumerate(lp.constraints)):
            return False
        aty = _columns(lp, y)
        for j in range(lp.n_vars):
            if lp.free[j] and aty[j] != 0:
                return False
            if not lp.free[j] and aty[j] > 0:
                return False
        return sum((con.rhs * y[i] for i, con in enumerate(lp.constraints)), Fraction(0)) > 0
    if isinstance(outcome, Unbounded):
        if not is_feasible(lp, outcome.x):
            return False
        d = outcome.ray
        for j, f in enumerate(lp.free):
            if not f and d[j] < 0:
                return False
        for con in lp.constraints:
            lhs = _dot(con.coeffs, d)
            if con.relation == LE and lhs > 0:
                return False
            if con.relation == GE and lhs < 0:
                return False
            if con.relation == EQ and lhs != 0:
                return False
        return s * _dot(lp.objective, d) < 0
    return False


def outcome_value(outcome: LpOutcome, sense: str = "min") -> ExtendedRational:
    """Optimal value, ``-inf``/``+inf`` for unbounded, None when infeasible."""
    if isinstance(outcome, Optimal):
        return outcome.value
    if isinstance(outcome, Unbounded):
        return -math.inf if sense == "min" else math.inf
    return None


# ---------------------------------------------------------------------------
# Fourier-Motzkin oracle

FM_MAX_VARS = 8


def _normalize(a: tuple[Fraction, ...], b: Fraction):
    scale = max((abs(v) for v in a), default=Fraction(0))
    if scale == 0:
        return a, b
    return tuple(v / scale for v in a), b / scale


def _keep(seen: dict, a, b, org) -> None:
    """Store a.z >= b, dropping exact duplicates up to positive scaling."""
    key = _normalize(a, b)
    old = seen.get(key)
    if old is None or len(org) < len(old[2]):
        seen[key] = (a, b, org)


def fm_value(lp: LinearProgram, max_vars: int = FM_MAX_VARS) -> ExtendedRational:
    """Optimal value by Fourier-Motzkin projection onto the objective.

    Returns a Fraction, ``math.inf``/``-math.inf`` for unbounded programs, or
    None when the program is infeasible.
    """
    lp.validate()
    n = lp.n_vars
    if n > max_vars:
        raise LPSizeError(f"{n} variables exceeds the elimination limit of {max_vars}")
    s = 1 if lp.sense == "min" else -1
    # coordinates: x_0..x_{n-1}, t ; rows read a.z >= b
    ineqs: list[tuple[tuple[Fraction, ...], Fraction, frozenset]] = []
    eqs: list[tuple[list[Fraction], Fraction]] = []
    tag = 0

    def add_ineq(a, b):
        nonlocal tag
        ineqs.append((tuple(a), b, frozenset([tag])))
        tag += 1

    for con in lp.constraints:
        a = list(con.coeffs) + [Fraction(0)]
        if con.relation == GE:
            add_ineq(a, con.rhs)
        elif con.relation == LE:
            add_ineq([-v for v in a], -con.rhs)
        else:
            eqs.append((a, con.rhs))
    for j in range(n):
        if not lp.free[j]:
            a = [Fraction(0)] * (n + 1)
            a[j] = Fraction(1)
            add_ineq(a, Fraction(0))
    # t - s c.x >= 0, so min t = min s c.x
    add_ineq([-s * c for c in lp.objective] + [Fraction(1)], Fraction(0))

    # substitute equalities first
    remaining = list(range(n))
    while eqs:
        a, b = eqs.pop()
        k = next((j for j in remaining if a[j] != 0), None)
        if k is None:
            if b != 0:
                return None
            continue
        remaining.remove(k)
        ak = a[k]

        def sub(row, rb):
            f = row[k] / ak
            if not f:
                return list(row), rb
            return [r - f * p for r, p in zip(row, a)], rb - f * b

        eqs = [sub(r, rb) for r, rb in eqs]
        new = []
        for r, rb, org in ineqs:
            nr, nb = sub(r, rb)
            new.append((tuple(nr), nb, org))
        ineqs = new

    eliminated = 0
    while remaining:
        # greedy order: fewest new rows first
        def cost(j):
            p = sum(1 for r in ineqs if r[0][j] > 0)
            return p * (sum(1 for r in ineqs if r[0][j] < 0) - 1) - p

        k = min(remaining, key=cost)
        remaining.remove(k)
        pos, neg, keep = [], [], []
        for row in ineqs:
            c = row[0][k]
            (pos if c > 0 else neg if c < 0 else keep).append(row)
        eliminated += 1
        seen = {}
        for a, b, org in keep:
            if not any(a):
                if b > 0:
                    return None
                continue
            _keep(seen, a, b, org)
        for ap, bp, op in pos:
            for an, bn, on in neg:
                org = op | on
                if len(org) > eliminated + 1:
                    continue  # Kohler: redundant combination
                fp, fn = -an[k], ap[k]
                a = tuple(fp * u + fn * v for u, v in zip(ap, an))
                b = fp * bp + fn * bn
                _keep(seen, a, b, org)
        ineqs = list(seen.values())

    lower = None
    for a, b, _ in ineqs:
        at = a[n]
        if at == 0:
            if b > 0:
                return None
        elif at > 0:
            bound = b / at
            if lower is None or bound > lower:
                lower = bound
        else:  # pragma: no cover - t only enters with a positive coefficient
            raise AssertionError("upper bound on objective variable")
    if lower is None:
        return -math.inf if s == 1 else math.inf
    return s * lower
