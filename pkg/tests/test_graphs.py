import itertools
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from homcompile.errors import FormatError
from homcompile.graphs import (
    LOOP,
    HostGraph,
    PatternGraph,
    VertexPartition,
    are_isomorphic,
    automorphism_count,
    canonical_form,
    canonical_graph,
    clique,
    connected_graphs,
    cycle,
    format_graph,
    generate_family,
    is_homomorphism,
    loopfree_partitions,
    mobius_coefficient,
    parse_graph,
    path,
    quotient,
    set_partitions,
    spider,
    supergraphs_same_vertices,
)


def naive_automorphisms(H):
    return sum(
        1
        for perm in itertools.permutations(range(1, H.n + 1))
        if {tuple(sorted((perm[i - 1], perm[j - 1]))) for i, j in H.edges} == set(H.edges)
    )


@st.composite
def small_graphs(draw, max_n=6):
    n = draw(st.integers(1, max_n))
    pairs = list(itertools.combinations(range(1, n + 1), 2))
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return PatternGraph(n, frozenset(chosen))


def test_edges_are_normalized_and_validated():
    G = PatternGraph(3, [(2, 1), (3, 2)])
    assert G.sorted_edges() == [(1, 2), (2, 3)]
    with pytest.raises(ValueError):
        PatternGraph(3, [(1, 1)])
    with pytest.raises(ValueError):
        PatternGraph(3, [(1, 4)])
    with pytest.raises(ValueError):
        PatternGraph(17, [])
    assert HostGraph(40, [(1, 40)]).m == 1


def test_homomorphism_check():
    P3, K3 = path(3), clique(3)
    assert is_homomorphism(P3, K3, [1, 2, 1])
    assert not is_homomorphism(P3, K3, [1, 1, 2])
    assert is_homomorphism(P3, K3, {1: 3, 2: 1, 3: 2})
    with pytest.raises(ValueError):
        is_homomorphism(P3, K3, [1, 2, 4])


@pytest.mark.parametrize("H,expected", [(cycle(4), 8), (path(3), 2), (clique(4), 24), (PatternGraph(10, []), math.factorial(10))])
def test_automorphism_examples(H, expected):
    assert automorphism_count(H) == expected


def test_spider_automorphisms():
    assert automorphism_count(spider(2)) == 6 * 6**3


@settings(max_examples=60, deadline=None)
@given(small_graphs())
def test_automorphisms_match_permutation_count(H):
    assert automorphism_count(H) == naive_automorphisms(H)


@settings(max_examples=60, deadline=None)
@given(small_graphs(), st.randoms())
def test_canonical_form_is_isomorphism_invariant(H, rnd):
    perm = list(range(1, H.n + 1))
    rnd.shuffle(perm)
    G = H.relabel(perm)
    assert canonical_form(G) == canonical_form(H)
    assert are_isomorphic(G, H)
    assert are_isomorphic(canonical_graph(H), H)


def test_canonical_form_separates_classes():
    forms = {canonical_form(H) for k in range(1, 7) for H in connected_graphs(k)}
    assert len(forms) == 1 + 1 + 2 + 6 + 21 + 112


@pytest.mark.parametrize("k,count", [(1, 1), (2, 1), (3, 2), (4, 6), (5, 21), (6, 112)])
def test_connected_graph_catalogue(k, count):
    graphs = connected_graphs(k)
    assert len(graphs) == count
    assert all(G.is_connected() and G.n == k for G in graphs)


@pytest.mark.parametrize("k,bell", [(1, 1), (2, 2), (3, 5), (4, 15), (5, 52), (6, 203)])
def test_set_partitions_are_bell_numbers(k, bell):
    parts = list(set_partitions(k))
    assert len(parts) == bell
    assert len({p.blocks for p in parts}) == bell


def test_mobius_sums_to_zero():
    # sum over the partition lattice of mu(bottom, rho) is 0 for k >= 2
    for k in range(2, 7):
        assert sum(mobius_coefficient(p) for p in set_partitions(k)) == 0


def test_quotient_and_loops():
    C4 = cycle(4)
    assert quotient(C4, VertexPartition([[1, 2], [3], [4]])) is LOOP
    Q = quotient(C4, VertexPartition([[1, 3], [2], [4]]))
    assert Q.n == 3 and Q.m == 2
    lf = loopfree_partitions(C4)
    # independent-set partitions of C4: singletons, {1,3}, {2,4}, both
    assert len(lf) == 4
    assert all(q is not LOOP for _, q in lf)


def test_loopfree_partitions_match_filter():
    for H in connected_graphs(5)[:8]:
        expected = [p for p in set_partitions(5) if quotient(H, p) is not LOOP]
        assert len(loopfree_partitions(H)) == len(expected)


def test_supergraph_enumeration_size():
    H = path(4)
    sups = supergraphs_same_vertices(H)
    assert len(sups) == 2 ** (6 - 3)
    assert all(H.edges <= F.edges for F in sups)


@pytest.mark.parametrize("p,n", [(1, 4), (2, 13), (3, 40)])
def test_spider_sizes(p, n):
    G = generate_family("spider", p, host=True)
    assert G.n == n and G.is_tree()


def test_families():
    assert path(5).m == 4 and cycle(5).m == 5 and clique(5).m == 10
    with pytest.raises(ValueError):
        generate_family("cycle", 2)
    with pytest.raises(ValueError):
        generate_family("star", 3)


@settings(max_examples=40, deadline=None)
@given(small_graphs())
def test_graph_text_round_trip(H):
    assert parse_graph(format_graph(H)) == H


@pytest.mark.parametrize(
    "text",
    [
        "e 1 2\n",
        "p 3 1\ne 2 1\n",
        "p 3 2\ne 1 2\n",
        "p 3 1\ne 1 4\n",
        "p 3 1\nx 1 2\n",
        "p 3 2\ne 1 2\ne 1 2\n",
    ],
)
def test_graph_format_errors(text):
    with pytest.raises(FormatError):
        parse_graph(text)


def test_comments_are_skipped():
    G = parse_graph("# a triangle\np 3 3\ne 1 2\n# middle\ne 2 3\ne 1 3\n")
    assert G == clique(3)


def test_induced_subgraph_relabels():
    G = HostGraph(5, [(1, 3), (3, 5), (2, 4)])
    S = G.induced_subgraph([5, 3, 1])
    assert S.n == 3 and S.sorted_edges() == [(1, 2), (2, 3)]


def test_random_graph_is_seeded():
    from homcompile.graphs import random_graph

    a = random_graph(8, 0.5, random.Random(3))
    b = random_graph(8, 0.5, random.Random(3))
    assert a == b
