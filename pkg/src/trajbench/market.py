"""Trajectory sets, families, regimes and the compiled prefix tree."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Sequence, Union

NodeKey = tuple  # prefix (S_0, ..., S_j) of Fractions


class InstanceError(ValueError):
    """Semantic problem with a trajectory set or instance."""


def as_rational(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, float):
        raise InstanceError(f"refusing inexact float {v!r}; pass a string 'p/q'")
    if isinstance(v, bool):
        raise InstanceError(f"bad rational {v!r}")
    try:
        return Fraction(v)
    except ZeroDivisionError:
        raise InstanceError(f"zero denominator in {v!r}") from None
    except (ValueError, TypeError):
        raise InstanceError(f"bad rational {v!r}") from None


@dataclass(frozen=True)
class Trajectory:
    """Eventually constant price path stored as canonical breakpoints.

    The price at time t is the value of the last breakpoint with time <= t.
    """

    breakpoints: tuple[tuple[int, Fraction], ...]

    def __post_init__(self):
        bps = self.breakpoints
        if not bps or bps[0][0] != 0:
            raise InstanceError("first breakpoint must be at time 0")
        for (t0, v0), (t1, v1) in zip(bps, bps[1:]):
            if t1 <= t0:
                raise InstanceError("breakpoint times must increase strictly")
            if v1 == v0:
                raise InstanceError("consecutive breakpoints must change value")

    @classmethod
    def from_breakpoints(cls, pairs: Iterable[tuple[int, object]]) -> "Trajectory":
        out: list[tuple[int, Fraction]] = []
        for t, v in pairs:
            v = as_rational(v)
            if out and out[-1][1] == v:
                continue
            out.append((int(t), v))
        return cls(tuple(out))

    @classmethod
    def from_path(cls, values: Sequence) -> "Trajectory":
        """Dense values at times 0..len-1; the last one persists."""
        if not values:
            raise InstanceError("empty path")
        return cls.from_breakpoints(enumerate(values))

    @classmethod
    def constant(cls, value) -> "Trajectory":
        return cls(((0, as_rational(value)),))

    @property
    def s0(self) -> Fraction:
        return self.breakpoints[0][1]

    @property
    def stabilization(self) -> int:
        return self.breakpoints[-1][0]

    def value(self, t: int) -> Fraction:
        out = self.breakpoints[0][1]
        for bt, bv in self.breakpoints:
            if bt > t:
                break
            out = bv
        return out

    def path(self, upto: int) -> tuple[Fraction, ...]:
        """Values S_0..S_upto."""
        out = []
        k = 0
        bps = self.breakpoints
        for t in range(upto + 1):
            while k + 1 < len(bps) and bps[k + 1][0] <= t:
                k += 1
            out.append(bps[k][1])
        return tuple(out)

    def shift(self, j: int) -> "Trajectory":
        """Re-index so that time j becomes time 0."""
        pairs = [(0, self.value(j))] + [(t - j, v) for t, v in self.breakpoints if t > j]
        return Trajectory.from_breakpoints(pairs)

    def __str__(self) -> str:
        vals = ",".join(str(v) for v in self.path(self.stabilization))
        return f"({vals},...)"


@dataclass(frozen=True)
class Explicit:
    trajectories: tuple[Trajectory, ...]
    labels: tuple[str | None, ...] = ()

    def __post_init__(self):
        if self.labels and len(self.labels) != len(self.trajectories):
            raise InstanceError("labels must match trajectories")


@dataclass(frozen=True)
class DelayedJump:
    """Paths that follow ``prefix``, sit at ``plateau`` through time n and
    jump to ``jump_to`` at time n+1, for n = len(prefix), len(prefix)+1, ...

    With prefix (1,), plateau 2 and jump_to 4 member n is 1,2,...,2,4,4,...
    with the jump at time n+1.
    """

    prefix: tuple[Fraction, ...]
    plateau: Fraction
    jump_to: Fraction
    label: str = "U"

    def __post_init__(self):
        if not self.prefix:
            raise InstanceError("DelayedJump needs a nonempty prefix (at least S_0)")
        if self.plateau == self.jump_to:
            raise InstanceError("DelayedJump jump_to must differ from plateau")

    @property
    def first(self) -> int:
        return len(self.prefix)

    def member(self, n: int) -> Trajectory:
        if n < self.first:
            raise InstanceError(f"family parameter {n} below {self.first}")
        pairs = list(enumerate(self.prefix))
        pairs.append((self.first, self.plateau))
        pairs.append((n + 1, self.jump_to))
        return Trajectory.from_breakpoints(pairs)

    def limit(self) -> Trajectory:
        """The never-jumping path (plateau forever)."""
        return Trajectory.from_breakpoints(list(enumerate(self.prefix)) + [(self.first, self.plateau)])

    def parameters(self, N: int) -> range:
        """Family parameters included at truncation N (members n = 1..N for the standard prefix)."""
        return range(self.first, self.first + N)


Family = Union[Explicit, DelayedJump]


@dataclass(frozen=True)
class Regime:
    N: int
    M: int

    def __post_init__(self):
        if self.M < 1:
            raise InstanceError("maturity cap M must be >= 1")
        if self.N < 0:
            raise InstanceError("family truncation N must be >= 0")


def expand_family(family: Family, N: int) -> list[Trajectory]:
    """Members of ``family`` at truncation N, in canonical form."""
    if N < 1:
        raise InstanceError("truncation N must be >= 1")
    return [t for t, _, _ in _members(family, N, 0)]


def _members(family: Family, N: int, index: int):
    if isinstance(family, Explicit):
        for k, t in enumerate(family.trajectories):
            label = family.labels[k] if family.labels else None
            yield t, label, (index, None)
    elif isinstance(family, DelayedJump):
        for n in family.parameters(N):
            yield family.member(n), f"{family.label}{n}", (index, n)
    else:
        raise InstanceError(f"unsupported family kind {type(family).__name__}")


@dataclass(frozen=True)
class Node:
    key: NodeKey
    members: tuple[int, ...]
    children: tuple[Fraction, ...]

    @property
    def depth(self) -> int:
        return len(self.key) - 1

    @property
    def value(self) -> Fraction:
        return self.key[-1]

    @property
    def increments(self) -> tuple[Fraction, ...]:
        return tuple(c - self.value for c in self.children)

    @property
    def is_flat(self) -> bool:
        return self.children == (self.value,)

    def label(self) -> str:
        return "(" + ",".join(str(v) for v in self.key) + ")"


@dataclass(frozen=True, eq=False)
class Instance:
    """A finite trajectory set compiled to a prefix tree, plus its regime.

    ``history`` holds the prices before time 0 when the instance is a shifted
    conditional space; ``origins`` records (family index, parameter) per class.
    """

    s0: Fraction
    classes: tuple[Trajectory, ...]
    labels: tuple[str, ...]
    regime: Regime
    families: tuple[Family, ...] = ()
    origins: tuple[tuple[int, int | None], ...] = ()
    history: tuple[Fraction, ...] = ()
    source_ids: tuple[int, ...] = ()
    cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not self.classes:
            raise InstanceError("instance has no trajectories")
        for k, t in enumerate(self.classes):
            if t.s0 != self.s0:
                raise InstanceError(f"class {self.labels[k]} starts at {t.s0}, expected s0={self.s0}")
        if len(set(self.classes)) != len(self.classes):
            raise InstanceError("classes must be pairwise distinct")
        if len(set(self.labels)) != len(self.labels):
            raise InstanceError("class labels must be unique")
        if not self.source_ids:
            object.__setattr__(self, "source_ids", tuple(range(len(self.classes))))
        if not self.origins:
            object.__setattr__(self, "origins", tuple((-1, None) for _ in self.classes))

    # -- basic shape --------------------------------------------------------

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    @cached_property
    def depth(self) -> int:
        return max(t.stabilization for t in self.classes)

    @property
    def is_exact(self) -> bool:
        return self.regime.M >= self.depth

    @property
    def regime_kind(self) -> str:
        return "exact" if self.is_exact else "emulation"

    @cached_property
    def paths(self) -> tuple[tuple[Fraction, ...], ...]:
        return tuple(t.path(self.depth) for t in self.classes)

    def path(self, cid: int, upto: int) -> tuple[Fraction, ...]:
        if upto <= self.depth:
            return self.paths[cid][: upto + 1]
        return self.classes[cid].path(upto)

    def value(self, cid: int, t: int) -> Fraction:
        if t <= self.depth:
            return self.paths[cid][t]
        return self.paths[cid][-1]

    def class_id(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown class {label!r}") from None

    # -- tree ---------------------------------------------------------------

    @cached_property
    def nodes(self) -> dict[NodeKey, Node]:
        groups: dict[NodeKey, list[int]] = {}
        for cid, p in enumerate(self.paths):
            for j in range(self.depth + 1):
                groups.setdefault(p[: j + 1], []).append(cid)
        out = {}
        for key, members in groups.items():
            j = len(key) - 1
            nxt = min(j + 1, self.depth)
            children = tuple(sorted({self.paths[c][nxt] for c in members}))
            out[key] = Node(key, tuple(members), children)
        return out

    @property
    def root(self) -> Node:
        return self.nodes[(self.s0,)]

    def node_of(self, cid: int, j: int) -> Node:
        j = min(j, self.depth)
        return self.nodes[self.paths[cid][: j + 1]]

    def nodes_at(self, j: int) -> list[Node]:
        return [nd for nd in self.nodes.values() if nd.depth == j]

    def children_of(self, node: Node) -> list[Node]:
        if node.depth >= self.depth:
            return []
        return [self.nodes[node.key + (v,)] for v in node.children]

    def trade_nodes(self, maturity: int | None = None) -> list[Node]:
        """Non-flat nodes at depth < min(maturity, depth), in a fixed order."""
        cap = self.regime.M if maturity is None else maturity
        cap = min(cap, self.depth)
        nds = [nd for nd in self.nodes.values() if nd.depth < cap and not nd.is_flat]
        nds.sort(key=lambda nd: (nd.depth, nd.key))
        return nds

    # -- derived instances --------------------------------------------------

    def subset(self, ids: Iterable[int]) -> "Instance":
        ids = sorted(set(ids))
        return Instance(
            self.s0,
            tuple(self.classes[i] for i in ids),
            tuple(self.labels[i] for i in ids),
            self.regime,
            self.families,
            tuple(self.origins[i] for i in ids),
            self.history,
            tuple(self.source_ids[i] for i in ids),
        )

    def with_regime(self, regime: Regime) -> "Instance":
        return Instance(self.s0, self.classes, self.labels, regime, self.families,
                        self.origins, self.history, self.source_ids)

    def describe(self) -> str:
        lines = [f"s0={self.s0} classes={self.n_classes} depth={self.depth} "
                 f"regime=(N={self.regime.N}, M={self.regime.M}) {self.regime_kind}"]
        for lab, t in zip(self.labels, self.classes):
            lines.append(f"  {lab}: {t}")
        return "\n".join(lines)


def build_instance(s0, families: Sequence[Family], regime: Regime) -> Instance:
    """Expand families at truncation ``regime.N``, merge duplicates and compile the tree."""
    s0 = as_rational(s0)
    if not families:
        raise InstanceError("no trajectory families given")
    classes: list[Trajectory] = []
    labels: list[str] = []
    origins: list[tuple[int, int | None]] = []
    seen: set[Trajectory] = set()
    for idx, fam in enumerate(families):
        if isinstance(fam, DelayedJump) and regime.N == 0:
            continue
        for traj, label, origin in _members(fam, regime.N, idx):
            if traj.s0 != s0:
                raise InstanceError(f"trajectory {traj} does not start at s0={s0}")
            if traj in seen:
                continue
            seen.add(traj)
            classes.append(traj)
            labels.append(label)
            origins.append(origin)
    if not classes:
        raise InstanceError("family expansion is empty")
    used = {lab for lab in labels if lab is not None}
    for k, lab in enumerate(labels):
        if lab is None or labels.index(lab) != k:
            n = k
            while f"c{n}" in used:
                n += 1
            labels[k] = f"c{n}"
            used.add(labels[k])
    return Instance(s0, tuple(classes), tuple(labels), regime, tuple(families), tuple(origins))


def conditional_space(instance: Instance, cid: int, j: int) -> Instance:
    """All classes sharing the initial segment of class ``cid`` up to time j."""
    if not 0 <= cid < instance.n_classes:
        raise KeyError(f"unknown class id {cid}")
    if j == 0:
        return instance
    return instance.subset(instance.node_of(cid, j).members)


def shifted_space(instance: Instance, cid: int, j: int) -> Instance:
    """Conditional space restarted so that time j becomes time 0.

    The maturity cap of the regime is kept as configured.
    """
    if j == 0:
        if not 0 <= cid < instance.n_classes:
            raise KeyError(f"unknown class id {cid}")
        return instance
    cond = conditional_space(instance, cid, j)
    shifted = tuple(t.shift(j) for t in cond.classes)
    history = instance.history + instance.path(cid, j)[:-1]
    return Instance(shifted[0].s0, shifted, cond.labels, cond.regime, cond.families,
                    cond.origins, history, cond.source_ids)


def iter_nodes_with_class(instance: Instance) -> Iterator[tuple[int, int, Node]]:
    """(representative class, depth, node) for every node above the leaves."""
    for nd in sorted(instance.nodes.values(), key=lambda n: (n.depth, n.key)):
        if nd.depth < instance.depth:
            yield nd.members[0], nd.depth, nd


@dataclass(frozen=True)
class Completeness:
    complete: bool
    witness: Trajectory | None = None


def check_complete(families: Sequence[Family]) -> Completeness:
    """Closure under limits of splitting sequences.

    Finite explicit sets are always complete; a DelayedJump family needs its
    plateau-forever limit to be a member of some family.
    """
    for fam in families:
        if isinstance(fam, Explicit):
            continue
        if not isinstance(fam, DelayedJump):
            raise InstanceError(f"unsupported family kind {type(fam).__name__}")
        lim = fam.limit()
        if not any(_contains(other, lim) for other in families):
            return Completeness(False, lim)
    return Completeness(True)


def _contains(family: Family, traj: Trajectory) -> bool:
    if isinstance(family, Explicit):
        return traj in family.trajectories
    if isinstance(family, DelayedJump):
        # members end at jump_to; only one parameter can match a given path
        last_t, last_v = traj.breakpoints[-1]
        if last_v != family.jump_to or last_t - 1 < family.first:
            return False
        return family.member(last_t - 1) == traj
    raise InstanceError(f"unsupported family kind {type(family).__name__}")
