"""Exhaustive all-pairs analysis: hop statistics, edge loads and phase checks.

Randomised strategies are not sampled.  Every Phase I branch is enumerated
with its exact probability and accumulated as a :class:`~fractions.Fraction`,
so a congestion ratio of one is an equality rather than a tolerance.

Work is split by source node.  Partial results are merged in source order,
which makes the output identical for any worker count.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict, deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import BudgetExceeded, InvariantViolation, ParameterError
from .ring_metrics import delta_absolute, delta_clockwise
from .routing import Route, Strategy, StrategyConfig, greedy_route, route_branches
from .topology import EdgeKind, Family, Topology, TopologyParams, build, level_ring

DEFAULT_BUDGET = 20_000_000
PHASES = ("I", "II", "III")


# ---------------------------------------------------------------- SPAN and phases


def _balanced_fits(q: int, radix: int, count: int) -> bool:
    """True when ``q`` has a balanced base-``radix`` expansion in ``count`` digits."""
    half = (radix - 1) // 2
    for _ in range(count):
        d = q % radix
        if d > half:
            d -= radix
        q = (q - d) // radix
    return q == 0


def span_contains(u: int, v: int, params: TopologyParams) -> bool:
    """Whether ``v`` lies in SPAN(u), the greedy phase boundary set."""
    fam = params.family
    n, m = params.n, params.m
    lvl = level_ring(u, m)
    if fam is Family.CLOCKWISE:
        return delta_clockwise(u, v, n) < m * params.kappa ** (lvl + 1)
    if fam is Family.ABSOLUTE:
        dist = delta_absolute(u, v, n)
        radix = 2 * params.k + 1
        for signed in (dist, -dist):
            c = signed % m
            if _balanced_fits((signed - c) // m, radix, lvl + 1):
                return True
        return False
    raise ParameterError(f"SPAN is defined for clockwise/absolute families, not {fam.value}")


def phase_labels(route: Route, params: TopologyParams) -> list[str]:
    """Phase of each hop origin, without enforcing the phase invariants."""
    fam = params.family
    if not fam.is_butterfly_ring:
        raise ParameterError(f"phases are defined for clockwise/absolute families, not {fam.value}")
    n, m, t = params.n, params.m, route.target
    dist = delta_clockwise if fam is Family.CLOCKWISE else delta_absolute
    labels = []
    for hop in route.hops:
        u = hop.source
        if not span_contains(u, t, params):
            labels.append("I")
        elif dist(u, t, n) >= m:
            labels.append("II")
        else:
            labels.append("III")
    return labels


def phase_problem(labels: list[str], m: int) -> str | None:
    """Describe the first broken phase invariant, or return ``None``."""
    order = [PHASES.index(p) for p in labels]
    if order != sorted(order):
        return f"labels not monotone: {labels}"
    counts = Counter(labels)
    for phase, cap in zip(PHASES, (m - 1, m, m - 1)):
        if counts[phase] > cap:
            return f"phase {phase} took {counts[phase]} hops (cap {cap})"
    return None


def classify_phases(route: Route, params: TopologyParams) -> list[str]:
    """Label the origin of every greedy hop with phase I, II or III.

    Raises :class:`InvariantViolation` if labels go backwards or a phase
    exceeds its hop cap (m-1, m, m-1).
    """
    labels = phase_labels(route, params)
    problem = phase_problem(labels, params.m)
    if problem:
        raise InvariantViolation(f"{route.source}->{route.target}: {problem}")
    return labels


def route_phases(route: Route, params: TopologyParams) -> list[str | None]:
    """Phase labels for any route: greedy ones are classified, others carry their own."""
    if route.hops and route.hops[0].phase is None and params.family.is_butterfly_ring:
        return phase_labels(route, params)
    return [h.phase for h in route.hops]


# ---------------------------------------------------------------- summaries


@dataclass(frozen=True)
class StatsSummary:
    worst: int
    mean: Fraction
    histogram: dict[int, Fraction]
    per_phase_max: dict[str, int]
    pairs: int
    longest: tuple[int, int] | None = None
    phase_violations: int = 0
    phase_witness: tuple[int, int] | None = None

    @property
    def mass(self) -> Fraction:
        return sum(self.histogram.values(), Fraction(0))

    def as_dict(self) -> dict:
        return {
            "worst": self.worst,
            "mean": str(self.mean),
            "mean_float": float(self.mean),
            "pairs": self.pairs,
            "histogram": {str(h): str(w) for h, w in sorted(self.histogram.items())},
            "per_phase_max": dict(sorted(self.per_phase_max.items())),
            "longest": list(self.longest) if self.longest else None,
            "phase_violations": self.phase_violations,
            "phase_witness": list(self.phase_witness) if self.phase_witness else None,
        }


@dataclass(frozen=True)
class LoadProfile:
    loads: dict[tuple[int, int], Fraction]
    pi: Fraction | None
    excluded: frozenset = field(default_factory=frozenset)
    include_self_pairs: bool = False
    zero_load: tuple[tuple[int, int], ...] = ()

    @property
    def total(self) -> Fraction:
        return sum(self.loads.values(), Fraction(0))

    def eligible(self) -> dict[tuple[int, int], Fraction]:
        return {e: w for e, w in self.loads.items() if e not in self.excluded}

    def digest(self) -> dict:
        eligible = self.eligible()
        return {
            "pi": str(self.pi) if self.pi is not None else None,
            "pi_float": float(self.pi) if self.pi is not None else None,
            "min_load": str(min(eligible.values())) if eligible else None,
            "max_load": str(max(eligible.values())) if eligible else None,
            "total_load": str(self.total),
            "eligible_edges": len(eligible),
            "excluded_edges": [list(e) for e in sorted(self.excluded)],
            "zero_load_edges": [list(e) for e in self.zero_load],
            "include_self_pairs": self.include_self_pairs,
        }


# ---------------------------------------------------------------- sweep


def estimate_work(topo: Topology, config: StrategyConfig) -> int:
    """Upper bound on hops walked by an exhaustive sweep."""
    n = topo.n
    p = topo.params
    depth = p.m if p.m is not None else p.b
    branches = 1
    if config.strategy.is_randomized:
        degree = max(len(out) for out in topo.adjacency)
        branches = degree ** (depth - 1)
    return n * n * branches * 4 * depth


def route_loads(weighted_routes) -> dict[tuple[int, int], Fraction]:
    """Edge traversal counts of ``(weight, route)`` pairs."""
    loads: defaultdict = defaultdict(Fraction)
    for weight, r in weighted_routes:
        for hop in r.hops:
            loads[(hop.source, hop.target)] += weight
    return dict(loads)


@dataclass
class _Partial:
    histogram: Counter = field(default_factory=Counter)
    phase_max: dict = field(default_factory=dict)
    loads: defaultdict = field(default_factory=lambda: defaultdict(Fraction))
    worst: int = 0
    longest: tuple[int, int] | None = None
    phase_violations: int = 0
    phase_witness: tuple[int, int] | None = None

    def merge(self, other: _Partial) -> None:
        self.histogram.update(other.histogram)
        for phase, hops in other.phase_max.items():
            self.phase_max[phase] = max(self.phase_max.get(phase, 0), hops)
        for edge, w in other.loads.items():
            self.loads[edge] += w
        if other.worst > self.worst:
            self.worst, self.longest = other.worst, other.longest
        if other.phase_violations and not self.phase_violations:
            self.phase_witness = other.phase_witness
        self.phase_violations += other.phase_violations


def _sweep_sources(
    params: TopologyParams,
    config: StrategyConfig,
    sources: range,
    include_self: bool,
    topo: Topology | None = None,
) -> _Partial:
    topo = topo or build(params)
    n = topo.n
    part = _Partial()
    classify = config.strategy is Strategy.GREEDY and params.family.is_butterfly_ring
    for s in sources:
        for t in range(n):
            if s == t and not include_self:
                continue
            for weight, r in route_branches(topo, config, s, t):
                r.check(topo)
                for hop in r.hops:
                    part.loads[(hop.source, hop.target)] += weight
                if s == t:
                    continue
                part.histogram[r.length] += weight
                if r.length > part.worst:
                    part.worst, part.longest = r.length, (s, t)
                if classify:
                    labels = phase_labels(r, params)
                    if phase_problem(labels, params.m):
                        if not part.phase_violations:
                            part.phase_witness = (s, t)
                        part.phase_violations += 1
                else:
                    labels = [h.phase for h in r.hops]
                for phase, hops in Counter(labels).items():
                    if phase is not None:
                        part.phase_max[phase] = max(part.phase_max.get(phase, 0), hops)
    return part


def _chunks(n: int, parts: int) -> list[range]:
    size = max(1, math.ceil(n / parts))
    return [range(i, min(n, i + size)) for i in range(0, n, size)]


def sweep(
    topo: Topology,
    config: StrategyConfig,
    workers: int = 1,
    include_self: bool | None = None,
    budget: int = DEFAULT_BUDGET,
) -> _Partial:
    """Route every ordered pair (and every random branch) once."""
    config.validate(topo)
    work = estimate_work(topo, config)
    if work > budget:
        raise BudgetExceeded(
            f"exhaustive sweep needs ~{work} hop evaluations (budget {budget}); "
            "use a smaller instance or a Monte Carlo run with an explicit sample count and seed"
        )
    if include_self is None:
        include_self = config.strict_loop
    n = topo.n
    if workers <= 1:
        return _sweep_sources(topo.params, config, range(n), include_self, topo)
    chunks = _chunks(n, workers * 4)
    total = _Partial()
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(_sweep_sources, topo.params, config, chunk, include_self)
            for chunk in chunks
        ]
        for fut in futures:
            total.merge(fut.result())
    return total


def _summary(part: _Partial, n: int) -> StatsSummary:
    pairs = n * (n - 1)
    hist = {h: Fraction(w) for h, w in sorted(part.histogram.items())}
    mass = sum(hist.values(), Fraction(0))
    if mass != pairs:
        raise InvariantViolation(f"histogram mass {mass} != {pairs} ordered pairs")
    mean = sum((h * w for h, w in hist.items()), Fraction(0)) / pairs if pairs else Fraction(0)
    worst = max(hist) if hist else 0
    return StatsSummary(
        worst,
        mean,
        hist,
        dict(sorted(part.phase_max.items())),
        pairs,
        part.longest,
        part.phase_violations,
        part.phase_witness,
    )


def excluded_edges(topo: Topology) -> frozenset:
    """Edges left out of the congestion ratio (Back links of the absolute family)."""
    if topo.family is not Family.ABSOLUTE:
        return frozenset()
    return frozenset(e.pair for e in topo.edges() if EdgeKind.BACK in e.kinds)


def _profile(part: _Partial, topo: Topology, include_self: bool, allow_zero: bool) -> LoadProfile:
    excluded = excluded_edges(topo)
    loads = {e.pair: part.loads.get(e.pair, Fraction(0)) for e in topo.edges()}
    eligible = [w for e, w in loads.items() if e not in excluded]
    zero = tuple(sorted(e for e, w in loads.items() if e not in excluded and w == 0))
    if zero and not allow_zero:
        raise InvariantViolation(
            f"congestion ratio undefined: {len(zero)} eligible edge(s) carry no load, e.g. {zero[0]}"
        )
    pi = None if zero or not eligible else max(eligible) / min(eligible)
    return LoadProfile(loads, pi, excluded, include_self, zero)


def all_pairs_stats(
    topo: Topology, config: StrategyConfig, workers: int = 1, budget: int = DEFAULT_BUDGET
) -> StatsSummary:
    """Hop statistics over all ordered pairs ``s != t``."""
    return _summary(sweep(topo, config, workers, include_self=False, budget=budget), topo.n)


def edge_load_profile(
    topo: Topology,
    config: StrategyConfig,
    workers: int = 1,
    include_self: bool | None = None,
    allow_zero: bool = False,
    budget: int = DEFAULT_BUDGET,
) -> LoadProfile:
    """Exact expected load per edge.

    The pair universe is every ordered pair with ``s != t``; under
    ``strict_loop`` it also includes ``s == t``, whose route is the full
    m-hop loop back to the source.
    """
    if include_self is None:
        include_self = config.strict_loop
    part = sweep(topo, config, workers, include_self=include_self, budget=budget)
    return _profile(part, topo, include_self, allow_zero)


def analyze(
    topo: Topology, config: StrategyConfig, workers: int = 1, budget: int = DEFAULT_BUDGET
) -> tuple[StatsSummary, LoadProfile]:
    """Stats and loads from a single sweep."""
    include_self = config.strict_loop
    part = sweep(topo, config, workers, include_self=include_self, budget=budget)
    return _summary(part, topo.n), _profile(part, topo, include_self, allow_zero=True)


# ---------------------------------------------------------------- bound checks


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


def bound_checks(
    topo: Topology, config: StrategyConfig, stats: StatsSummary, load: LoadProfile | None = None
) -> list[Check]:
    """The hop-count and congestion claims that apply to ``(topo, config)``."""
    p = topo.params
    fam, strategy = p.family, config.strategy
    checks: list[Check] = []
    if p.m is not None:
        m = p.m
        if strategy is Strategy.GREEDY and fam.is_butterfly_ring:
            worst_cap, mean_ok, mean_txt = 3 * m - 2, stats.mean < 2 * m - 1, f"< {2 * m - 1}"
        else:
            worst_cap, mean_ok, mean_txt = (
                2 * m - 1,
                stats.mean <= Fraction(3 * m, 2),
                f"<= {Fraction(3 * m, 2)}",
            )
        checks.append(Check("worst", stats.worst <= worst_cap, f"{stats.worst} <= {worst_cap}"))
        checks.append(Check("mean", mean_ok, f"{stats.mean} {mean_txt}"))
        if strategy is Strategy.GREEDY and fam.is_butterfly_ring:
            checks.append(
                Check(
                    "phases",
                    stats.phase_violations == 0,
                    f"{stats.phase_violations} route(s) break monotone phases or caps m-1/m/m-1",
                )
            )
    elif fam is Family.CHORD_BIDIRECTIONAL and config.resolved_metric(topo) == "absolute":
        expected = p.b // 2
        checks.append(Check("worst", stats.worst == expected, f"{stats.worst} == {expected}"))
    if (
        load is not None
        and strategy is Strategy.CONGESTION_FREE_RANDOM
        and config.strict_loop
    ):
        checks.append(Check("pi", load.pi == 1, f"pi = {load.pi}"))
    return checks


# ---------------------------------------------------------------- shortest paths


def bfs_shortest_paths(topo: Topology, s: int) -> list[float]:
    """Hop distance from ``s`` to every node; unreachable nodes get ``inf``."""
    dist: list[float] = [math.inf] * topo.n
    dist[s] = 0
    queue = deque([s])
    while queue:
        u = queue.popleft()
        for v in topo.neighbors(u):
            if dist[v] == math.inf:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def greedy_excess_witnesses(topo: Topology, metric: str | None = None, limit: int | None = None) -> list[dict]:
    """Ordered pairs whose greedy route is longer than the BFS distance."""
    found = []
    for s in range(topo.n):
        bfs = bfs_shortest_paths(topo, s)
        for t in range(topo.n):
            if s == t:
                continue
            r = greedy_route(topo, s, t, metric)
            if r.length > bfs[t]:
                found.append({"source": s, "target": t, "greedy": r.length, "shortest": int(bfs[t]),
                              "route": r.nodes})
                if limit is not None and len(found) >= limit:
                    return found
    return found


def compare_strategies(
    topo: Topology,
    configs: list[StrategyConfig],
    workers: int = 1,
    witness_limit: int = 5,
    budget: int = DEFAULT_BUDGET,
) -> dict:
    """Side-by-side stats and load digests, plus greedy-vs-BFS witnesses."""
    rows = []
    for config in configs:
        stats, load = analyze(topo, config, workers, budget)
        rows.append(
            {
                "config": config.as_dict(),
                "stats": stats.as_dict(),
                "load": load.digest(),
                "checks": [c.as_dict() for c in bound_checks(topo, config, stats, load)],
            }
        )
    witnesses: list[dict] = []
    greedy = [c for c in configs if c.strategy is Strategy.GREEDY]
    if greedy:
        witnesses = greedy_excess_witnesses(topo, greedy[0].metric, witness_limit)
    return {"strategies": rows, "greedy_longer_than_shortest": witnesses}
