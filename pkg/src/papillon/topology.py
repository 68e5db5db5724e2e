"""Papillon butterfly-on-a-ring constructions and Chord baselines.

Every builder returns an immutable :class:`Topology` whose adjacency lists
hold :class:`Edge` records.  Ring families record the signed clockwise
offset of each link; the xor family records the digit value written into
the replaced position.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterator

from .errors import ParameterError, SizeError

DEFAULT_MAX_NODES = 10**6


class Family(str, Enum):
    CLOCKWISE = "clockwise"
    ABSOLUTE = "absolute"
    XOR = "xor"
    CHORD_CLOCKWISE = "chord-clockwise"
    CHORD_BIDIRECTIONAL = "chord-bidirectional"

    @property
    def is_chord(self) -> bool:
        return self in (Family.CHORD_CLOCKWISE, Family.CHORD_BIDIRECTIONAL)

    @property
    def is_butterfly_ring(self) -> bool:
        return self in (Family.CLOCKWISE, Family.ABSOLUTE)


class EdgeKind(str, Enum):
    SHORT = "short"
    LONG = "long"
    BACK = "back"
    FINGER = "finger"


# When two links land on the same node the stored edge keeps the kind that
# appears first here; Back must win so load accounting can exclude it.
_KIND_PRECEDENCE = (EdgeKind.BACK, EdgeKind.SHORT, EdgeKind.LONG, EdgeKind.FINGER)


def _is_power_of_two(x: int) -> bool:
    return x >= 1 and x & (x - 1) == 0


@dataclass(frozen=True)
class TopologyParams:
    """Family selector plus the parameters relevant to that family."""

    family: Family
    kappa: int | None = None
    k: int | None = None
    lam: int | None = None
    m: int | None = None
    b: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "family", Family(self.family))
        fam = self.family
        needed = {
            Family.CLOCKWISE: {"kappa", "m"},
            Family.ABSOLUTE: {"k", "m"},
            Family.XOR: {"lam", "m"},
            Family.CHORD_CLOCKWISE: {"b"},
            Family.CHORD_BIDIRECTIONAL: {"b"},
        }[fam]
        for name in ("kappa", "k", "lam", "m", "b"):
            value = getattr(self, name)
            if name in needed:
                if value is None:
                    raise ParameterError(f"family {fam.value} requires {name}")
                if isinstance(value, bool) or not isinstance(value, int):
                    raise ParameterError(f"{name} must be an integer")
            elif value is not None:
                raise ParameterError(f"{name} is not a parameter of family {fam.value}")
        if self.m is not None and self.m < 1:
            raise ParameterError("m must be >= 1")
        if fam is Family.CLOCKWISE and self.kappa < 2:
            raise ParameterError("kappa must be >= 2")
        if fam is Family.ABSOLUTE and self.k < 1:
            raise ParameterError("k must be >= 1")
        if fam is Family.XOR and (self.lam < 2 or not _is_power_of_two(self.lam)):
            raise ParameterError(f"lambda must be a power of two >= 2, got {self.lam}")
        if fam.is_chord and self.b < 2:
            raise ParameterError("b must be >= 2")

    @classmethod
    def clockwise(cls, kappa: int, m: int) -> TopologyParams:
        return cls(Family.CLOCKWISE, kappa=kappa, m=m)

    @classmethod
    def absolute(cls, k: int, m: int) -> TopologyParams:
        return cls(Family.ABSOLUTE, k=k, m=m)

    @classmethod
    def xor(cls, lam: int, m: int) -> TopologyParams:
        return cls(Family.XOR, lam=lam, m=m)

    @classmethod
    def chord(cls, b: int, bidirectional: bool = False) -> TopologyParams:
        fam = Family.CHORD_BIDIRECTIONAL if bidirectional else Family.CHORD_CLOCKWISE
        return cls(fam, b=b)

    @property
    def radix(self) -> int | None:
        """Digit base used by the family's routing decompositions."""
        if self.family is Family.CLOCKWISE:
            return self.kappa
        if self.family is Family.ABSOLUTE:
            return 2 * self.k + 1
        if self.family is Family.XOR:
            return self.lam
        return None

    @property
    def n(self) -> int:
        if self.family.is_chord:
            return 2**self.b
        return self.radix**self.m * self.m

    def as_dict(self) -> dict:
        out = {"family": self.family.value}
        for name in ("kappa", "k", "lam", "m", "b"):
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        return out

    def label(self) -> str:
        args = ",".join(str(v) for key, v in self.as_dict().items() if key != "family")
        return f"{self.family.value}({args})"


def level_ring(u: int, m: int) -> int:
    """Butterfly level of ``u`` in the clockwise/absolute families."""
    if m < 1:
        raise ParameterError("m must be >= 1")
    return (m - 1) - (u % m)


def level_xor(u: int, lam: int, m: int) -> int:
    """Level of ``u`` in the xor family: the block of ``lam**m`` labels it sits in."""
    block = lam**m
    if not 0 <= u < m * block:
        raise ParameterError(f"node label {u} outside [0, {m * block - 1}]")
    return u // block


@dataclass(frozen=True)
class Edge:
    """A stored directed link.

    ``offset`` is the signed ring offset for ring families and the written
    digit for the xor family.  ``kinds`` lists every role the link plays
    when several constructions rules produce the same target; ``kind`` is the
    one with highest precedence (Back first).
    """

    source: int
    target: int
    kind: EdgeKind
    offset: int
    kinds: frozenset = field(default=frozenset())

    def __post_init__(self) -> None:
        if not self.kinds:
            object.__setattr__(self, "kinds", frozenset({self.kind}))

    @property
    def pair(self) -> tuple[int, int]:
        return (self.source, self.target)


@dataclass(frozen=True, eq=False)
class Topology:
    params: TopologyParams
    n: int
    adjacency: tuple[tuple[Edge, ...], ...]
    warnings: tuple[str, ...] = ()

    @property
    def family(self) -> Family:
        return self.params.family

    @property
    def m(self) -> int | None:
        return self.params.m

    def out_edges(self, u: int) -> tuple[Edge, ...]:
        return self.adjacency[u]

    def neighbors(self, u: int) -> list[int]:
        return [e.target for e in self.adjacency[u]]

    def edges(self) -> Iterator[Edge]:
        for out in self.adjacency:
            yield from out

    @cached_property
    def _edge_index(self) -> dict[tuple[int, int], Edge]:
        return {e.pair: e for e in self.edges()}

    def edge(self, u: int, v: int) -> Edge | None:
        return self._edge_index.get((u, v))

    def has_edge(self, u: int, v: int) -> bool:
        return (u, v) in self._edge_index

    @property
    def edge_count(self) -> int:
        return len(self._edge_index)

    def level(self, u: int) -> int:
        if self.family.is_butterfly_ring:
            return level_ring(u, self.params.m)
        if self.family is Family.XOR:
            return level_xor(u, self.params.lam, self.params.m)
        raise ParameterError(f"family {self.family.value} has no levels")

    def degree_histogram(self) -> dict[int, int]:
        return dict(sorted(Counter(len(out) for out in self.adjacency).items()))

    def summary(self) -> dict:
        return {
            "params": self.params.as_dict(),
            "n": self.n,
            "edges": self.edge_count,
            "degree_histogram": {str(d): c for d, c in self.degree_histogram().items()},
            "warnings": list(self.warnings),
        }


def _check_size(n: int, max_nodes: int) -> None:
    if n > max_nodes:
        raise SizeError(f"topology would have {n} nodes, cap is {max_nodes}")


def _assemble(
    params: TopologyParams,
    n: int,
    raw: list[list[tuple[int, EdgeKind, int]]],
    warnings: list[str],
) -> Topology:
    """Merge duplicate targets, drop self-loops and freeze the adjacency."""
    self_loops = 0
    adjacency = []
    for u, links in enumerate(raw):
        by_target: dict[int, list[tuple[EdgeKind, int]]] = {}
        for target, kind, offset in links:
            if target == u:
                self_loops += 1
                continue
            by_target.setdefault(target, []).append((kind, offset))
        out = []
        for target in sorted(by_target):
            roles = by_target[target]
            kinds = frozenset(kind for kind, _ in roles)
            primary = next(kind for kind in _KIND_PRECEDENCE if kind in kinds)
            offset = next(off for kind, off in roles if kind is primary)
            out.append(Edge(u, target, primary, offset, kinds))
        adjacency.append(tuple(out))
    if self_loops:
        warnings.append(f"dropped {self_loops} self-loop link(s)")
    return Topology(params, n, tuple(adjacency), tuple(warnings))


def build_clockwise(kappa: int, m: int, max_nodes: int = DEFAULT_MAX_NODES) -> Topology:
    params = TopologyParams.clockwise(kappa, m)
    n = params.n
    _check_size(n, max_nodes)
    raw = []
    for u in range(n):
        step = m * kappa ** level_ring(u, m)
        links = []
        for i in range(kappa):
            x = 1 + i * step
            links.append(((u + x) % n, EdgeKind.SHORT if i == 0 else EdgeKind.LONG, x))
        raw.append(links)
    return _assemble(params, n, raw, [])


def build_absolute(k: int, m: int, max_nodes: int = DEFAULT_MAX_NODES) -> Topology:
    params = TopologyParams.absolute(k, m)
    n = params.n
    _check_size(n, max_nodes)
    radix = 2 * k + 1
    raw = []
    for u in range(n):
        step = m * radix ** level_ring(u, m)
        links = []
        for i in range(-k, k + 1):
            x = 1 + i * step
            links.append(((u + x) % n, EdgeKind.SHORT if i == 0 else EdgeKind.LONG, x))
        links.append(((u + 1 - m) % n, EdgeKind.BACK, 1 - m))
        raw.append(links)
    return _assemble(params, n, raw, [])


def replace_digit(y: int, position: int, digit: int, radix: int) -> int:
    """Overwrite the base-``radix`` digit of ``y`` at ``position``."""
    weight = radix**position
    old = (y // weight) % radix
    return y + (digit - old) * weight


def build_xor(lam: int, m: int, max_nodes: int = DEFAULT_MAX_NODES) -> Topology:
    """Xor Papillon under the digit-replacement reading of its link rule.

    Node ``u = level * lam**m + y`` links to the next level's block at the
    offset obtained from ``y`` by writing each digit ``0 <= i < lam`` into
    base-``lam`` position ``level``.
    """
    params = TopologyParams.xor(lam, m)
    n = params.n
    _check_size(n, max_nodes)
    block = lam**m
    raw = []
    for u in range(n):
        level, y = divmod(u, block)
        nxt = ((level + 1) % m) * block
        raw.append(
            [(nxt + replace_digit(y, level, i, lam), EdgeKind.LONG, i) for i in range(lam)]
        )
    return _assemble(params, n, raw, [])


def build_chord(b: int, bidirectional: bool = False, max_nodes: int = DEFAULT_MAX_NODES) -> Topology:
    params = TopologyParams.chord(b, bidirectional)
    n = params.n
    _check_size(n, max_nodes)
    offsets = [2**i for i in range(b)]
    if bidirectional:
        offsets += [-(2**i) for i in range(b)]
    raw = []
    for u in range(n):
        raw.append(
            [((u + x) % n, EdgeKind.SHORT if x == 1 else EdgeKind.FINGER, x) for x in offsets]
        )
    return _assemble(params, n, raw, [])


def build(params: TopologyParams, max_nodes: int = DEFAULT_MAX_NODES) -> Topology:
    """Dispatch to the builder for ``params.family``."""
    fam = params.family
    if fam is Family.CLOCKWISE:
        return build_clockwise(params.kappa, params.m, max_nodes)
    if fam is Family.ABSOLUTE:
        return build_absolute(params.k, params.m, max_nodes)
    if fam is Family.XOR:
        return build_xor(params.lam, params.m, max_nodes)
    return build_chord(params.b, fam is Family.CHORD_BIDIRECTIONAL, max_nodes)
