"""Greedy, hypercubic and congestion-free routing on Papillon topologies.

Hypercubic routing first aligns the level of the current node with the
target's level, then spends exactly ``m`` hops zeroing one radix digit of
the remaining distance per hop.  Congestion-free routing replaces the
alignment phase by uniformly random (or digit-split deterministic) hops so
that every link carries the same expected load.

Randomised strategies draw from a stream keyed by ``(seed, s, t)`` so that a
route never depends on which other pairs were routed before it.
:func:`route_branches` enumerates every random choice with its exact
probability instead of sampling.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from typing import Callable

from .errors import LevelMismatch, ParameterError, RoutingError, ShortOnly
from .ring_metrics import check_label, metric_function
from .topology import Edge, EdgeKind, Family, Topology, level_ring

DEFAULT_SEED = 20040101


class Strategy(str, Enum):
    GREEDY = "greedy"
    HYPERCUBIC = "hypercubic"
    CONGESTION_FREE_RANDOM = "cf-random"
    CONGESTION_FREE_DETERMINISTIC = "cf-deterministic"

    @property
    def is_randomized(self) -> bool:
        return self is Strategy.CONGESTION_FREE_RANDOM


_DEFAULT_METRIC = {
    Family.CLOCKWISE: "clockwise",
    Family.ABSOLUTE: "absolute",
    Family.XOR: "xor",
    Family.CHORD_CLOCKWISE: "clockwise",
    Family.CHORD_BIDIRECTIONAL: "absolute",
}

_ALLOWED_METRICS = {
    Family.CLOCKWISE: {"clockwise"},
    Family.ABSOLUTE: {"absolute", "clockwise"},
    Family.XOR: {"xor"},
    Family.CHORD_CLOCKWISE: {"clockwise"},
    Family.CHORD_BIDIRECTIONAL: {"absolute", "clockwise"},
}

_ALLOWED_STRATEGIES = {
    Family.CLOCKWISE: {Strategy.GREEDY, Strategy.HYPERCUBIC, Strategy.CONGESTION_FREE_RANDOM},
    Family.ABSOLUTE: set(Strategy),
    Family.XOR: {Strategy.GREEDY},
    Family.CHORD_CLOCKWISE: {Strategy.GREEDY},
    Family.CHORD_BIDIRECTIONAL: {Strategy.GREEDY},
}


def default_metric(family: Family) -> str:
    return _DEFAULT_METRIC[Family(family)]


@dataclass(frozen=True)
class StrategyConfig:
    strategy: Strategy = Strategy.GREEDY
    metric: str | None = None
    strict_loop: bool = False
    seed: int = DEFAULT_SEED
    max_hops: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "strategy", Strategy(self.strategy))

    def resolved_metric(self, topo: Topology) -> str:
        return self.metric or default_metric(topo.family)

    def hop_cap(self, topo: Topology) -> int:
        if self.max_hops is not None:
            return self.max_hops
        p = topo.params
        return 4 * (p.m if p.m is not None else p.b)

    def validate(self, topo: Topology) -> None:
        fam = topo.family
        if self.strategy not in _ALLOWED_STRATEGIES[fam]:
            raise ParameterError(
                f"strategy {self.strategy.value} is not defined for family {fam.value}"
            )
        metric = self.resolved_metric(topo)
        if metric not in _ALLOWED_METRICS[fam]:
            raise ParameterError(f"metric {metric} is not compatible with family {fam.value}")
        if self.strategy is not Strategy.GREEDY and metric != default_metric(fam):
            raise ParameterError("only greedy routing accepts a non-default metric")

    def as_dict(self) -> dict:
        return {
            "strategy": self.strategy.value,
            "metric": self.metric,
            "strict_loop": self.strict_loop,
            "seed": self.seed,
            "max_hops": self.max_hops,
        }


@dataclass(frozen=True)
class Hop:
    source: int
    target: int
    kind: EdgeKind
    remaining: int
    phase: str | None = None


@dataclass(frozen=True)
class Route:
    source: int
    target: int
    hops: tuple[Hop, ...] = ()

    @property
    def length(self) -> int:
        return len(self.hops)

    @property
    def nodes(self) -> list[int]:
        return [self.source] + [h.target for h in self.hops]

    @property
    def end(self) -> int:
        return self.hops[-1].target if self.hops else self.source

    def with_phases(self, labels: list[str]) -> Route:
        if len(labels) != len(self.hops):
            raise ValueError("one phase label per hop required")
        return replace(
            self, hops=tuple(replace(h, phase=p) for h, p in zip(self.hops, labels))
        )

    def check(self, topo: Topology) -> None:
        """Raise :class:`RoutingError` unless the route is a real walk to its target."""
        at = self.source
        for hop in self.hops:
            if hop.source != at:
                raise RoutingError(f"hop {hop.source}->{hop.target} does not chain from {at}")
            if not topo.has_edge(hop.source, hop.target):
                raise RoutingError(f"{hop.source}->{hop.target} is not an edge")
            at = hop.target
        if at != self.target:
            raise RoutingError(f"route ends at {at}, expected {self.target}")

    def as_dict(self) -> dict:
        return {
            "source": self.source,
            "target": self.target,
            "length": self.length,
            "hops": [
                {
                    "from": h.source,
                    "to": h.target,
                    "kind": h.kind.value,
                    "remaining": h.remaining,
                    "phase": h.phase,
                }
                for h in self.hops
            ],
        }


# ---------------------------------------------------------------- digits


@dataclass(frozen=True)
class DigitDecomposition:
    """``c`` plus per-level digits of a remaining distance.

    Ring families encode ``c + m + m * sum(radix**i * digits[i])``;
    the xor family encodes ``c * radix**m + sum(radix**i * digits[i])``.
    """

    c: int
    digits: tuple[int, ...]
    radix: int
    m: int
    balanced: bool = False
    xor: bool = False

    @property
    def digit_range(self) -> tuple[int, int]:
        if self.balanced:
            half = (self.radix - 1) // 2
            return (-half, half)
        return (0, self.radix - 1)

    def value(self) -> int:
        body = sum(d * self.radix**i for i, d in enumerate(self.digits))
        if self.xor:
            return self.c * self.radix**self.m + body
        return self.c + self.m + self.m * body


def radix_digits(q: int, radix: int, count: int) -> tuple[int, ...]:
    out = []
    for _ in range(count):
        q, d = divmod(q, radix)
        out.append(d)
    if q:
        raise ParameterError("value does not fit in the requested digit count")
    return tuple(out)


def balanced_digits(q: int, radix: int, count: int) -> tuple[int, ...]:
    """Balanced base-``radix`` digits of ``q mod radix**count``.

    ``radix`` is odd; digits lie in ``[-(radix-1)/2, (radix-1)/2]``.  The
    carry out of the top digit is dropped, which is exactly the reduction
    modulo ``radix**count``.
    """
    half = (radix - 1) // 2
    q %= radix**count
    out = []
    for _ in range(count):
        d = q % radix
        if d > half:
            d -= radix
        out.append(d)
        q = (q - d) // radix
    return tuple(out)


def decompose_clockwise(dist: int, kappa: int, m: int) -> DigitDecomposition:
    """Unique ``dist = c + m + m*sum(kappa**i d_i)``, ``0 <= c < m``, ``0 <= d_i < kappa``."""
    if dist < m:
        raise ShortOnly(f"distance {dist} < m={m}: follow short links")
    if dist > kappa**m * m + m - 1:
        raise ParameterError(f"distance {dist} too large for kappa={kappa}, m={m}")
    c = (dist - m) % m
    return DigitDecomposition(c, radix_digits((dist - m - c) // m, kappa, m), kappa, m)


def decompose_absolute(dist: int, k: int, m: int) -> DigitDecomposition:
    """``dist ≡ c + m + m*sum((2k+1)**i d_i) (mod n)`` with balanced ``d_i``."""
    radix = 2 * k + 1
    c = dist % m
    return DigitDecomposition(
        c, balanced_digits((dist - c - m) // m, radix, m), radix, m, balanced=True
    )


def decompose_balanced_absolute(D: int, k: int, m: int, n: int | None = None) -> DigitDecomposition:
    """Balanced digits for a clockwise distance between two same-level nodes."""
    if D % m:
        raise LevelMismatch(f"distance {D} is not a multiple of m={m}")
    if n is not None and not 0 <= D <= n:
        raise ParameterError(f"distance {D} outside [0, {n}]")
    return decompose_absolute(D, k, m)


def decompose_xor(x: int, lam: int, m: int) -> DigitDecomposition:
    block = lam**m
    c, low = divmod(x, block)
    return DigitDecomposition(c, radix_digits(low, lam, m), lam, m, xor=True)


def split_digit(a: int, k: int) -> tuple[int, int]:
    """Split ``a`` in ``[-k, k]`` into ``(floor((k+a)/2), -floor((k-a)/2))``."""
    if not -k <= a <= k:
        raise ParameterError(f"digit {a} outside [-{k}, {k}]")
    return (k + a) // 2, -((k - a) // 2)


# ---------------------------------------------------------------- walking


class _Walk:
    """Accumulates hops, checking each one against the topology."""

    def __init__(self, topo: Topology, s: int, t: int, dist, cap: int):
        self.topo = topo
        self.t = t
        self.at = s
        self.dist = dist
        self.cap = cap
        self.hops: list[Hop] = []

    def step(self, v: int, kind: EdgeKind | None = None, phase: str | None = None) -> None:
        edge = self.topo.edge(self.at, v)
        if edge is None:
            raise RoutingError(f"{self.at}->{v} is not an edge of {self.topo.params.label()}")
        if len(self.hops) >= self.cap:
            raise RoutingError(
                f"route to {self.t} exceeded {self.cap} hops; construction or strategy bug"
            )
        self.hops.append(
            Hop(self.at, v, kind or edge.kind, self.dist(v, self.t, self.topo.n), phase)
        )
        self.at = v

    def route(self, s: int) -> Route:
        if self.at != self.t:
            raise RoutingError(f"route from {s} stopped at {self.at}, not {self.t}")
        return Route(s, self.t, tuple(self.hops))


def _prepare(topo: Topology, config: StrategyConfig, s: int, t: int) -> _Walk:
    check_label(s, topo.n)
    check_label(t, topo.n)
    config.validate(topo)
    return _Walk(topo, s, t, metric_function(config.resolved_metric(topo)), config.hop_cap(topo))


def _require(topo: Topology, family: Family) -> None:
    if topo.family is not family:
        raise ParameterError(f"expected a {family.value} topology, got {topo.family.value}")


def greedy_route(
    topo: Topology,
    s: int,
    t: int,
    metric: str | None = None,
    max_hops: int | None = None,
) -> Route:
    """Forward to the neighbour closest to ``t``.

    Ties under a ring metric go to the neighbour with the smaller clockwise
    distance to ``t`` (the one behind the target), then to the smaller label.
    Xor ties go straight to the smaller label.
    """
    config = StrategyConfig(Strategy.GREEDY, metric=metric, max_hops=max_hops)
    walk = _prepare(topo, config, s, t)
    dist = walk.dist
    n = topo.n
    if config.resolved_metric(topo) == "xor":
        def key(v: int) -> tuple:
            return (dist(v, t, n), v)
    else:
        def key(v: int) -> tuple:
            return (dist(v, t, n), (t - v) % n, v)
    while walk.at != t:
        walk.step(min(topo.neighbors(walk.at), key=key))
    return walk.route(s)


def xor_greedy(topo: Topology, s: int, t: int, max_hops: int | None = None) -> Route:
    _require(topo, Family.XOR)
    return greedy_route(topo, s, t, "xor", max_hops)


def _long_step(u: int, digit: int, topo: Topology) -> int:
    """Target of the link at ``u`` that covers ``1 + digit * radix**level(u) * m``."""
    p = topo.params
    return (u + 1 + digit * p.radix ** level_ring(u, p.m) * p.m) % topo.n


def _digit_kind(digit: int) -> EdgeKind:
    return EdgeKind.SHORT if digit == 0 else EdgeKind.LONG


def _fix_digits(walk: _Walk, digits: tuple[int, ...], phase: str = "II") -> None:
    """Spend exactly ``m`` hops, zeroing the digit of the current level each time."""
    topo = walk.topo
    m = topo.params.m
    for _ in range(m):
        d = digits[level_ring(walk.at, m)]
        walk.step(_long_step(walk.at, d, topo), _digit_kind(d), phase)


def _phase_two(walk: _Walk, strict_loop: bool) -> None:
    """Hypercubic Phase II from a node on the target's level."""
    topo = walk.topo
    p = topo.params
    dist = (walk.t - walk.at) % topo.n
    if dist % p.m:
        raise RoutingError(f"phase II started off the target level at {walk.at}")
    if dist == 0:
        if not strict_loop:
            return
        dist = topo.n
    if p.family is Family.CLOCKWISE:
        dec = decompose_clockwise(dist, p.kappa, p.m)
    else:
        dec = decompose_balanced_absolute(dist, p.k, p.m, topo.n)
    _fix_digits(walk, dec.digits)


def hypercubic_clockwise(topo: Topology, s: int, t: int, max_hops: int | None = None) -> Route:
    _require(topo, Family.CLOCKWISE)
    walk = _prepare(topo, StrategyConfig(Strategy.HYPERCUBIC, max_hops=max_hops), s, t)
    m = topo.params.m
    dist = (t - s) % topo.n
    if dist == 0:
        return walk.route(s)
    if dist < m:
        for _ in range(dist):
            walk.step((walk.at + 1) % topo.n, EdgeKind.SHORT, "I")
        return walk.route(s)
    dec = decompose_clockwise(dist, topo.params.kappa, m)
    for _ in range(dec.c):
        walk.step((walk.at + 1) % topo.n, EdgeKind.SHORT, "I")
    _fix_digits(walk, dec.digits)
    return walk.route(s)


def hypercubic_absolute(topo: Topology, s: int, t: int, max_hops: int | None = None) -> Route:
    _require(topo, Family.ABSOLUTE)
    walk = _prepare(topo, StrategyConfig(Strategy.HYPERCUBIC, max_hops=max_hops), s, t)
    if s == t:
        return walk.route(s)
    for _ in range((t - s) % topo.params.m):
        walk.step((walk.at + 1) % topo.n, EdgeKind.SHORT, "I")
    _phase_two(walk, strict_loop=False)
    return walk.route(s)


# ---------------------------------------------------------------- congestion-free


def phase_one_choices(topo: Topology, u: int) -> list[tuple[int, EdgeKind]]:
    """Links eligible for a uniformly random Phase I hop out of ``u``.

    Back links are ignored; a stored link merged with a Back link still counts
    once in its short/long role.
    """
    out = []
    for e in topo.out_edges(u):
        roles = e.kinds - {EdgeKind.BACK}
        if roles:
            role = EdgeKind.SHORT if EdgeKind.SHORT in roles else EdgeKind.LONG
            out.append((e.target, role))
    return out


def level_gap(topo: Topology, s: int, t: int) -> int:
    m = topo.params.m
    return (t + m - s) % m


def _cf_prepare(topo: Topology, s: int, t: int, config: StrategyConfig) -> _Walk:
    if topo.family not in (Family.CLOCKWISE, Family.ABSOLUTE):
        raise ParameterError("congestion-free routing needs a clockwise or absolute topology")
    return _prepare(topo, config, s, t)


def _random_branches(
    topo: Topology,
    s: int,
    t: int,
    config: StrategyConfig,
    pick: Callable[[list], tuple[int, EdgeKind]] | None,
) -> list[tuple[Fraction, Route]]:
    """Enumerate (or sample, when ``pick`` is given) the random Phase I."""
    c = level_gap(topo, s, t)
    results: list[tuple[Fraction, Route]] = []

    def extend(walk: _Walk, remaining: int, weight: Fraction) -> None:
        if remaining == 0:
            if walk.at != t or config.strict_loop:
                _phase_two(walk, config.strict_loop)
            results.append((weight, walk.route(s)))
            return
        choices = phase_one_choices(topo, walk.at)
        if pick is not None:
            choices = [pick(choices)]
            share = weight
        else:
            share = weight / len(choices)
        for v, role in choices:
            branch = _Walk(topo, t, t, walk.dist, walk.cap)
            branch.at, branch.hops = walk.at, list(walk.hops)
            branch.step(v, role, "I")
            # Phase I moves strictly between levels other than the target's.
            if branch.at == t and remaining > 1:
                raise RoutingError(f"phase I reached {t} before aligning levels")
            extend(branch, remaining - 1, share)

    extend(_cf_prepare(topo, s, t, config), c, Fraction(1))
    return results


def pair_rng(seed: int, s: int, t: int) -> random.Random:
    """Independent random stream for the ordered pair ``(s, t)``."""
    return random.Random(f"papillon:{seed}:{s}:{t}")


def _deterministic_absolute(topo: Topology, s: int, t: int, config: StrategyConfig) -> Route:
    walk = _cf_prepare(topo, s, t, config)
    p = topo.params
    dist = (t - s) % topo.n
    if dist == 0:
        if not config.strict_loop:
            return walk.route(s)
        dist = topo.n
    dec = decompose_absolute(dist, p.k, p.m)
    residual = list(dec.digits)
    for _ in range(dec.c):
        lvl = level_ring(walk.at, p.m)
        first, second = split_digit(dec.digits[lvl], p.k)
        residual[lvl] = second
        walk.step(_long_step(walk.at, first, topo), _digit_kind(first), "I")
    if walk.at == t and not config.strict_loop:
        return walk.route(s)
    _fix_digits(walk, tuple(residual))
    return walk.route(s)


def congestion_free_clockwise(
    topo: Topology,
    s: int,
    t: int,
    seed: int = DEFAULT_SEED,
    strict_loop: bool = False,
    max_hops: int | None = None,
) -> Route:
    _require(topo, Family.CLOCKWISE)
    config = StrategyConfig(Strategy.CONGESTION_FREE_RANDOM, strict_loop=strict_loop, seed=seed, max_hops=max_hops)
    return route(topo, config, s, t)


def congestion_free_absolute(
    topo: Topology,
    s: int,
    t: int,
    mode: str = "random",
    seed: int = DEFAULT_SEED,
    strict_loop: bool = False,
    max_hops: int | None = None,
) -> Route:
    _require(topo, Family.ABSOLUTE)
    if mode == "random":
        strategy = Strategy.CONGESTION_FREE_RANDOM
    elif mode == "deterministic":
        strategy = Strategy.CONGESTION_FREE_DETERMINISTIC
    else:
        raise ParameterError(f"mode must be 'random' or 'deterministic', got {mode!r}")
    config = StrategyConfig(strategy, strict_loop=strict_loop, seed=seed, max_hops=max_hops)
    return route(topo, config, s, t)


def route(topo: Topology, config: StrategyConfig, s: int, t: int) -> Route:
    """Route ``s -> t`` with the strategy named in ``config``."""
    config.validate(topo)
    strategy = config.strategy
    if strategy is Strategy.GREEDY:
        return greedy_route(topo, s, t, config.metric, config.max_hops)
    if strategy is Strategy.HYPERCUBIC:
        if topo.family is Family.CLOCKWISE:
            return hypercubic_clockwise(topo, s, t, config.max_hops)
        return hypercubic_absolute(topo, s, t, config.max_hops)
    if strategy is Strategy.CONGESTION_FREE_DETERMINISTIC:
        return _deterministic_absolute(topo, s, t, config)
    rng = pair_rng(config.seed, s, t)
    [(_, chosen)] = _random_branches(topo, s, t, config, rng.choice)
    return chosen


def route_branches(topo: Topology, config: StrategyConfig, s: int, t: int) -> list[tuple[Fraction, Route]]:
    """Every route the strategy can produce for ``(s, t)`` with its exact probability."""
    if config.strategy.is_randomized:
        config.validate(topo)
        return _random_branches(topo, s, t, config, None)
    return [(Fraction(1), route(topo, config, s, t))]


def edge_of(topo: Topology, hop: Hop) -> Edge:
    edge = topo.edge(hop.source, hop.target)
    if edge is None:
        raise RoutingError(f"{hop.source}->{hop.target} is not an edge")
    return edge
