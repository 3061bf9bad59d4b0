import itertools

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st
from networkx.algorithms.isomorphism import GraphMatcher

from enriques_k3 import dynkin as D
from enriques_k3 import exactlat as L
from enriques_k3 import quotient


def graph(n, edges, effective=None):
    m = [[0] * n for _ in range(n)]
    for i, j, *k in edges:
        m[i][j] = m[j][i] = k[0] if k else 1
    eff = effective or (True,) * n
    return D.WeightedGraph(tuple(f"v{i}" for i in range(n)), tuple(eff), tuple(map(tuple, m)))


def cycle(n):
    return graph(n, [(i, (i + 1) % n) for i in range(n)])


def e10():
    # T_{2,3,7}: arms of 1, 2 and 6 vertices around a center
    return graph(10, [(0, 1), (0, 2), (2, 3), (0, 4), (4, 5), (5, 6), (6, 7), (7, 8), (8, 9)])


@pytest.mark.parametrize(
    "g, expected",
    [
        (graph(2, [(0, 1, 2)]), "~A1"),
        (cycle(3), "~A2"),
        (cycle(6), "~A5"),
        (graph(5, [(0, 1), (0, 2), (0, 3), (0, 4)]), "~D4"),
        (graph(6, [(0, 1), (0, 2), (0, 3), (3, 4), (3, 5)]), "~D5"),
        (graph(7, [(0, 1), (1, 2), (0, 3), (3, 4), (0, 5), (5, 6)]), "~E6"),
        (graph(9, [(0, 1), (0, 2), (2, 3), (0, 4), (4, 5), (5, 6), (6, 7), (7, 8)]), "~E8"),
    ],
)
def test_parabolic_types(g, expected):
    assert str(D.parabolic_type(g, range(g.n))) == expected


def test_elliptic_types():
    assert D.elliptic_type(graph(3, [(0, 1), (1, 2)]), range(3)) == "A3"
    assert D.elliptic_type(graph(4, [(0, 1), (0, 2), (0, 3)]), range(4)) == "D4"
    assert D.elliptic_type(cycle(3), range(3)) is None


@st.composite
def small_graphs(draw):
    n = draw(st.integers(2, 7))
    pairs = list(itertools.combinations(range(n), 2))
    mult = draw(st.lists(st.sampled_from([0, 0, 1, 1, 2]), min_size=len(pairs), max_size=len(pairs)))
    return graph(n, [(i, j, k) for (i, j), k in zip(pairs, mult) if k])


@settings(max_examples=300)
@given(small_graphs())
def test_shape_agrees_with_spectrum(g):
    """Independent cross-check: a connected set is parabolic iff it has an affine shape."""
    if not g.is_connected(range(g.n)):
        return
    pos, neg, zero = L.signature(g.gram())
    spectral = pos == 0 and zero == 1
    assert spectral == (D.shape_type(g, range(g.n)) is not None)


@settings(max_examples=100)
@given(small_graphs())
def test_parabolic_enumeration_is_exhaustive(g):
    found = {p.vertices for p in D.enumerate_parabolics(g)}
    brute = set()
    for k in range(2, g.n + 1):
        for vs in itertools.combinations(range(g.n), k):
            if g.is_connected(vs):
                pos, neg, zero = L.signature(g.gram(vs))
                if pos == 0 and zero == 1:
                    brute.add(frozenset(vs))
    assert found == brute


def test_triple_edges_unsupported():
    g = graph(2, [(0, 1, 3)])
    assert not g.triple_edge_free
    with pytest.raises(D.UnsupportedGraphError):
        D.enumerate_parabolics(g)


def test_disconnected_input_rejected():
    with pytest.raises(D.GraphError):
        D.parabolic_type(graph(4, [(0, 1, 2), (2, 3, 2)]), range(4))


def test_vinberg_e10():
    rep = D.vinberg_check(e10(), 9)
    assert rep.nondegenerate and rep.verdict and rep.span_signature == (1, 9, 0)
    decs = D.maximal_decompositions(e10())
    assert {d.types for d in decs} == {("~E8",)}


def test_vinberg_degenerate():
    g = cycle(4)
    rep = D.vinberg_check(g, 9)
    assert not rep.nondegenerate and not rep.verdict
    with pytest.raises(D.DegenerateGraphError):
        D.vinberg_check(g, 9, strict=True)


def test_vinberg_failure_reports_the_parabolic():
    # three mutually doubly-joined vertices plus one pendant: every ~A1 is
    # stranded, since nothing disjoint from it is parabolic
    g = graph(4, [(0, 2), (1, 2, 2), (1, 3, 2), (2, 3, 2)])
    assert L.signature(g.gram()) == (1, 3, 0)
    rep = D.vinberg_check(g, 3)
    assert not rep.verdict
    assert sorted(rep.failures) == [(1, 2), (1, 3), (2, 3)]


def test_json_round_trip_and_dot():
    g = graph(3, [(0, 1, 2), (1, 2)], (True, False, True))
    assert D.WeightedGraph.from_json(g.to_json()) == g
    dot = g.to_dot()
    assert dot.count("--") == 3 and "dashed" in dot


def to_nx(g, flags):
    h = nx.Graph()
    for v in range(g.n):
        h.add_node(v, eff=g.effective[v] if flags else True)
    for i in range(g.n):
        for j in range(i + 1, g.n):
            if g.m[i][j]:
                h.add_edge(i, j, m=g.m[i][j])
    return h


def vf2_count(g, flags):
    h = to_nx(g, flags)
    gm = GraphMatcher(h, h, node_match=lambda a, b: a["eff"] == b["eff"], edge_match=lambda a, b: a["m"] == b["m"])
    return sum(1 for _ in gm.isomorphisms_iter())


@pytest.mark.parametrize("g", [cycle(6), e10(), graph(5, [(0, 1), (0, 2), (0, 3), (0, 4)]),
                               graph(4, [(0, 1, 2), (2, 3, 2)], (True, False, True, True))])
def test_automorphisms_match_vf2(g):
    for flags in (True, False):
        perms = D.automorphisms(g, flags)
        assert len(perms) == vf2_count(g, flags)
        assert len(set(perms)) == len(perms)


def test_vii_automorphisms_match_vf2():
    g = quotient.build_surface("vii").graph()
    assert D.automorphism_count(g)[0] == vf2_count(g, True) == 120


def test_generating_set_generates():
    perms = D.automorphisms(cycle(5))
    gens = D.generating_set(perms)
    assert len(perms) == 10 and 1 <= len(gens) <= 2


def test_find_isomorphism():
    a, b = cycle(5), graph(5, [(0, 2), (2, 4), (4, 1), (1, 3), (3, 0)])
    perm = D.find_isomorphism(a, b)
    assert perm is not None
    assert all(a.m[i][j] == b.m[perm[i]][perm[j]] for i in range(5) for j in range(5))
    assert D.find_isomorphism(cycle(5), graph(5, [(0, 1), (1, 2), (2, 3), (3, 4)])) is None
