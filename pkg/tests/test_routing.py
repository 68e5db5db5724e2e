import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from papillon.errors import LevelMismatch, ParameterError, RoutingError, ShortOnly
from papillon.ring_metrics import delta_absolute, delta_clockwise, delta_xor
from papillon.routing import (
    Strategy,
    StrategyConfig,
    balanced_digits,
    congestion_free_absolute,
    congestion_free_clockwise,
    decompose_absolute,
    decompose_balanced_absolute,
    decompose_clockwise,
    decompose_xor,
    greedy_route,
    hypercubic_absolute,
    hypercubic_clockwise,
    level_gap,
    route,
    route_branches,
    split_digit,
    xor_greedy,
)
from papillon.topology import EdgeKind, build_absolute, build_chord, build_clockwise, build_xor, level_ring

from .oracles import balanced_representations, clockwise_representations, naive_greedy

CW = {(2, 2): build_clockwise(2, 2), (3, 2): build_clockwise(3, 2), (2, 3): build_clockwise(2, 3)}
ABS = {(1, 2): build_absolute(1, 2), (2, 2): build_absolute(2, 2)}
XOR = {(2, 2): build_xor(2, 2), (4, 2): build_xor(4, 2), (2, 3): build_xor(2, 3)}


def pairs(topo):
    return ((s, t) for s in range(topo.n) for t in range(topo.n))


# ---------------------------------------------------------------- greedy


def test_greedy_clockwise_example():
    r = greedy_route(CW[2, 2], 0, 7)
    assert r.nodes == [0, 5, 6, 7]
    assert r.length == 3


def test_greedy_absolute_example_breaks_tie_toward_8():
    r = greedy_route(ABS[1, 2], 0, 9)
    assert r.nodes == [0, 7, 8, 9]


@pytest.mark.parametrize("topo", [CW[2, 2], ABS[1, 2], XOR[2, 2], build_chord(4, True)])
def test_greedy_identity(topo):
    r = greedy_route(topo, 3, 3)
    assert r.hops == () and r.length == 0


def test_xor_greedy_examples():
    assert xor_greedy(XOR[2, 2], 0, 7).nodes == [0, 5, 3, 7]
    assert xor_greedy(XOR[2, 2], 0, 4).nodes == [0, 4]
    assert xor_greedy(XOR[2, 2], 6, 6).length == 0


@pytest.mark.parametrize("topo", list(CW.values()) + list(ABS.values()) + [build_chord(5, True), build_chord(4)])
def test_greedy_matches_naive_oracle_on_ring_metrics(topo):
    n = topo.n
    absolute = topo.family.value in ("absolute", "chord-bidirectional")

    def rank(v, t):
        d = min((t - v) % n, (v - t) % n) if absolute else (t - v) % n
        return (d, (t - v) % n, v)

    for s, t in pairs(topo):
        expected = naive_greedy(topo.neighbors, rank, s, t, 100)
        assert greedy_route(topo, s, t).nodes == expected


@pytest.mark.parametrize("topo", list(XOR.values()))
def test_xor_greedy_matches_naive_oracle(topo):
    for s, t in pairs(topo):
        expected = naive_greedy(topo.neighbors, lambda v, t: (bin(v ^ t).count("1"), v), s, t, 100)
        assert xor_greedy(topo, s, t).nodes == expected


@pytest.mark.parametrize("topo", list(CW.values()))
def test_clockwise_greedy_strictly_decreases_distance(topo):
    for s, t in pairs(topo):
        r = greedy_route(topo, s, t)
        dists = [delta_clockwise(u, t, topo.n) for u in r.nodes]
        assert all(a > b for a, b in zip(dists, dists[1:]))


@pytest.mark.parametrize("topo", list(ABS.values()))
def test_absolute_greedy_terminates_within_cap(topo):
    m = topo.params.m
    for s, t in pairs(topo):
        r = greedy_route(topo, s, t)
        r.check(topo)
        assert r.length <= 3 * m - 2


def test_absolute_greedy_is_not_monotone():
    topo = build_absolute(1, 3)
    found = False
    for s, t in pairs(topo):
        r = greedy_route(topo, s, t)
        d = [delta_absolute(u, t, topo.n) for u in r.nodes]
        found |= any(b >= a for a, b in zip(d, d[1:]))
    assert found


def test_hop_cap_raises():
    with pytest.raises(RoutingError):
        greedy_route(CW[2, 2], 0, 7, max_hops=2)


def test_hop_annotations():
    r = greedy_route(CW[2, 2], 0, 7)
    assert [h.remaining for h in r.hops] == [2, 1, 0]
    assert [h.kind for h in r.hops] == [EdgeKind.LONG, EdgeKind.SHORT, EdgeKind.SHORT]


# ---------------------------------------------------------------- decompositions


def test_decompose_clockwise_examples():
    d = decompose_clockwise(7, 2, 2)
    assert (d.c, d.digits) == (1, (0, 1))
    d = decompose_clockwise(2, 2, 2)
    assert (d.c, d.digits) == (0, (0, 0))
    d = decompose_clockwise(8, 2, 2)
    assert (d.c, d.digits) == (0, (1, 1))
    d = decompose_clockwise(81, 3, 3)
    assert (d.c, d.digits) == (0, (2, 2, 2))


def test_decompose_clockwise_errors():
    with pytest.raises(ShortOnly):
        decompose_clockwise(1, 2, 2)
    with pytest.raises(ParameterError):
        decompose_clockwise(10, 2, 2)


@pytest.mark.parametrize("kappa, m", [(2, 2), (3, 2), (2, 3), (4, 2), (3, 3)])
def test_decompose_clockwise_matches_enumeration(kappa, m):
    n = kappa**m * m
    for dist in range(m, n + m):
        [(c, digits)] = clockwise_representations(dist, kappa, m)
        d = decompose_clockwise(dist, kappa, m)
        assert (d.c, d.digits) == (c, digits)
        assert d.value() == dist


def test_decompose_balanced_examples():
    assert decompose_balanced_absolute(4, 1, 2).digits == (1, 0)
    assert decompose_balanced_absolute(16, 1, 2, 18).digits == (1, -1)
    assert decompose_balanced_absolute(2, 1, 2).digits == (0, 0)
    with pytest.raises(LevelMismatch):
        decompose_balanced_absolute(3, 1, 2)


@pytest.mark.parametrize("k, m", [(1, 2), (2, 2), (1, 3), (3, 2)])
def test_decompose_balanced_matches_enumeration(k, m):
    n = (2 * k + 1) ** m * m
    for D in range(0, n + 1, m):
        [digits] = balanced_representations(D, k, m, n)
        d = decompose_balanced_absolute(D, k, m, n)
        assert d.digits == digits
        assert (d.value() - D) % n == 0
        lo, hi = d.digit_range
        assert all(lo <= x <= hi for x in d.digits)


@settings(max_examples=300)
@given(st.integers(2, 6), st.integers(1, 5), st.data())
def test_clockwise_round_trip(kappa, m, data):
    n = kappa**m * m
    dist = data.draw(st.integers(m, n))
    d = decompose_clockwise(dist, kappa, m)
    assert d.value() == dist
    assert 0 <= d.c < m and all(0 <= x < kappa for x in d.digits)


@settings(max_examples=300)
@given(st.integers(1, 4), st.integers(1, 5), st.data())
def test_absolute_round_trip(k, m, data):
    n = (2 * k + 1) ** m * m
    dist = data.draw(st.integers(0, n))
    d = decompose_absolute(dist, k, m)
    assert d.c == dist % m
    assert (d.value() - dist) % n == 0
    assert all(-k <= x <= k for x in d.digits)


@given(st.sampled_from([2, 4, 8]), st.integers(1, 4), st.data())
def test_xor_round_trip(lam, m, data):
    n = m * lam**m
    x = data.draw(st.integers(0, 2 * n))
    d = decompose_xor(x, lam, m)
    assert d.value() == x


def test_balanced_digits_drops_carry():
    assert balanced_digits(8, 3, 2) == (-1, 0)


# ---------------------------------------------------------------- hypercubic


def test_hypercubic_clockwise_examples():
    topo = CW[2, 2]
    assert hypercubic_clockwise(topo, 0, 7).nodes == [0, 1, 2, 7]
    assert hypercubic_clockwise(topo, 4, 4).length == 0
    r = hypercubic_clockwise(topo, 4, 5)
    assert r.nodes == [4, 5] and r.hops[0].kind is EdgeKind.SHORT


def test_hypercubic_absolute_examples():
    topo = ABS[1, 2]
    assert hypercubic_absolute(topo, 0, 4).nodes == [0, 1, 4]
    assert hypercubic_absolute(topo, 0, 16).nodes == [0, 13, 16]
    assert hypercubic_absolute(topo, 5, 5).length == 0


@pytest.mark.parametrize("topo", list(CW.values()) + list(ABS.values()))
def test_hypercubic_routes_valid_and_phase_two_steps_levels(topo):
    m = topo.params.m
    hyper = hypercubic_clockwise if topo.family.value == "clockwise" else hypercubic_absolute
    for s, t in pairs(topo):
        r = hyper(topo, s, t)
        r.check(topo)
        assert r.length <= 2 * m - 1
        phases = [h.phase for h in r.hops]
        assert phases == sorted(phases)
        for h in r.hops:
            assert h.kind is not EdgeKind.BACK
            if h.phase == "II":
                assert level_ring(h.target, m) == (level_ring(h.source, m) - 1) % m
        if "II" in phases:
            assert phases.count("II") == m


# ---------------------------------------------------------------- congestion-free


def test_cf_clockwise_enumerates_both_branches():
    branches = route_branches(CW[2, 2], StrategyConfig(Strategy.CONGESTION_FREE_RANDOM), 0, 7)
    assert sorted(r.nodes[1] for _, r in branches) == [1, 5]
    assert all(w == Fraction(1, 2) and r.length == 3 and r.end == 7 for w, r in branches)


def test_cf_zero_gap_is_pure_phase_two():
    topo = CW[2, 3]
    config = StrategyConfig(Strategy.CONGESTION_FREE_RANDOM)
    for s, t in pairs(topo):
        if s != t and level_gap(topo, s, t) == 0:
            [(w, r)] = route_branches(topo, config, s, t)
            assert w == 1 and all(h.phase == "II" for h in r.hops)
            assert r.length == 3


def test_cf_strict_loop_returns_via_maximal_long_links():
    topo = CW[2, 2]
    r = congestion_free_clockwise(topo, 0, 0, strict_loop=True)
    assert r.length == 2 and r.end == 0
    assert all(h.kind is EdgeKind.LONG for h in r.hops)
    for h in r.hops:
        lvl = level_ring(h.source, 2)
        assert (h.target - h.source) % topo.n == 1 + (2 - 1) * 2**lvl * 2
    assert congestion_free_clockwise(topo, 0, 0).length == 0


def test_cf_strict_loop_after_phase_one_lands_on_target():
    topo = CW[2, 2]
    strict = StrategyConfig(Strategy.CONGESTION_FREE_RANDOM, strict_loop=True)
    loose = StrategyConfig(Strategy.CONGESTION_FREE_RANDOM)
    strict_lengths = sorted(r.length for _, r in route_branches(topo, strict, 6, 7))
    loose_lengths = sorted(r.length for _, r in route_branches(topo, loose, 6, 7))
    assert strict_lengths == [3, 3]
    assert loose_lengths == [1, 3]


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
def test_split_digit(k):
    for a in range(-k, k + 1):
        first, second = split_digit(a, k)
        assert first + second == a
        assert -k <= first <= k and -k <= second <= k
    if k == 1:
        assert [split_digit(a, 1) for a in (1, 0, -1)] == [(1, 0), (0, 0), (0, -1)]


def test_split_digit_range():
    with pytest.raises(ParameterError):
        split_digit(2, 1)


@pytest.mark.parametrize("topo", list(ABS.values()))
def test_deterministic_equals_hypercubic_when_levels_match(topo):
    for s, t in pairs(topo):
        if s != t and level_gap(topo, s, t) == 0:
            det = congestion_free_absolute(topo, s, t, mode="deterministic")
            assert det.nodes == hypercubic_absolute(topo, s, t).nodes


def test_cf_absolute_random_branches():
    topo = ABS[1, 2]
    config = StrategyConfig(Strategy.CONGESTION_FREE_RANDOM)
    for s, t in pairs(topo):
        if level_gap(topo, s, t) == 1:
            branches = route_branches(topo, config, s, t)
            assert len(branches) == 3
            assert sum(w for w, _ in branches) == 1
            for _, r in branches:
                r.check(topo)
                assert r.length <= 3
                assert all(h.kind is not EdgeKind.BACK for h in r.hops)


@pytest.mark.parametrize(
    "topo, strategy",
    [(t, Strategy.CONGESTION_FREE_RANDOM) for t in CW.values()]
    + [(t, s) for t in ABS.values() for s in (Strategy.CONGESTION_FREE_RANDOM, Strategy.CONGESTION_FREE_DETERMINISTIC)],
)
@pytest.mark.parametrize("strict", [False, True])
def test_cf_routes_valid(topo, strategy, strict):
    m = topo.params.m
    config = StrategyConfig(strategy, strict_loop=strict)
    for s, t in pairs(topo):
        branches = route_branches(topo, config, s, t)
        assert sum(w for w, _ in branches) == 1
        for _, r in branches:
            r.check(topo)
            assert r.length <= 2 * m - 1
            if strict:
                assert r.length == level_gap(topo, s, t) + m


def test_seeded_routes_are_reproducible():
    topo = CW[2, 3]
    config = StrategyConfig(Strategy.CONGESTION_FREE_RANDOM, seed=7)
    forward = [route(topo, config, s, t).nodes for s, t in pairs(topo)]
    backward = [route(topo, config, s, t).nodes for s, t in reversed(list(pairs(topo)))]
    assert forward == backward[::-1]
    other = StrategyConfig(Strategy.CONGESTION_FREE_RANDOM, seed=8)
    assert forward != [route(topo, other, s, t).nodes for s, t in pairs(topo)]


def test_sampled_route_is_one_of_the_branches():
    topo = ABS[2, 2]
    config = StrategyConfig(Strategy.CONGESTION_FREE_RANDOM, seed=3)
    for s, t in itertools.islice(pairs(topo), 0, topo.n * topo.n, 7):
        sampled = route(topo, config, s, t).nodes
        assert sampled in [r.nodes for _, r in route_branches(topo, config, s, t)]


@pytest.mark.parametrize(
    "topo, config",
    [
        (XOR[2, 2], StrategyConfig(Strategy.HYPERCUBIC)),
        (build_chord(4), StrategyConfig(Strategy.CONGESTION_FREE_RANDOM)),
        (CW[2, 2], StrategyConfig(Strategy.CONGESTION_FREE_DETERMINISTIC)),
        (CW[2, 2], StrategyConfig(Strategy.GREEDY, metric="xor")),
        (XOR[2, 2], StrategyConfig(Strategy.GREEDY, metric="absolute")),
    ],
)
def test_incompatible_configs_rejected(topo, config):
    with pytest.raises(ParameterError):
        route(topo, config, 0, 1)


def test_family_specific_entry_points_check_family():
    with pytest.raises(ParameterError):
        hypercubic_clockwise(ABS[1, 2], 0, 1)
    with pytest.raises(ParameterError):
        congestion_free_absolute(CW[2, 2], 0, 1)
    with pytest.raises(ParameterError):
        xor_greedy(CW[2, 2], 0, 1)
    with pytest.raises(ParameterError):
        congestion_free_absolute(ABS[1, 2], 0, 1, mode="sideways")


def test_xor_greedy_bound_small():
    for (lam, m), topo in XOR.items():
        for s, t in pairs(topo):
            r = xor_greedy(topo, s, t)
            r.check(topo)
            assert r.length <= 2 * m - 1
            assert r.hops[-1].remaining == 0 if r.hops else s == t
            assert all(h.remaining == delta_xor(h.target, t) for h in r.hops)
