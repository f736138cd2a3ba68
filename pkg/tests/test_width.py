import itertools
import math
from functools import lru_cache

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from homcompile.errors import DisconnectedPatternError, FormatError, StructureError
from homcompile.graphs import PatternGraph, clique, connected_graphs, cycle, path, spider
from homcompile.width import (
    EliminationTree,
    PathDecomposition,
    TreeDecomposition,
    elimination_order_width,
    format_elimination_tree,
    format_tree_decomposition,
    parse_elimination_tree,
    parse_tree_decomposition,
    path_from_tree,
    pathwidth_exact,
    treedepth_exact,
    treewidth_exact,
    validate_elimination_tree,
    validate_path_decomposition,
    validate_tree_decomposition,
    vertex_separation,
)

# naive oracles: minimize over every vertex ordering


def naive_treewidth(H):
    if H.n <= 1:
        return 0
    return min(elimination_order_width(H, order) for order in itertools.permutations(H.vertices()))


def naive_pathwidth(H):
    if H.n <= 1:
        return 0
    return min(vertex_separation(H, order) for order in itertools.permutations(H.vertices()))


def naive_treedepth(H):
    adj = H.adjacency

    @lru_cache(maxsize=None)
    def td(S):
        if not S:
            return 0
        # components of S
        left = set(S)
        comps = []
        while left:
            stack = [left.pop()]
            comp = set(stack)
            while stack:
                v = stack.pop()
                for w in adj[v]:
                    if w in left:
                        left.discard(w)
                        comp.add(w)
                        stack.append(w)
            comps.append(frozenset(comp))
        if len(comps) > 1:
            return max(td(c) for c in comps)
        return 1 + min(td(S - {v}) for v in S)

    return td(frozenset(H.vertices()))


SMALL = [G for k in range(1, 6) for G in connected_graphs(k)] + connected_graphs(6)[::7]


@pytest.mark.parametrize("H", SMALL, ids=lambda G: f"k{G.n}m{G.m}_{hash(G.edges) % 997}")
def test_exact_widths_match_naive_search(H):
    tw, T = treewidth_exact(H)
    pw, P = pathwidth_exact(H)
    td, E = treedepth_exact(H)
    assert tw == naive_treewidth(H)
    assert pw == naive_pathwidth(H)
    assert td == naive_treedepth(H)
    assert validate_tree_decomposition(H, T) and T.width == tw
    assert validate_path_decomposition(H, P) and P.width == pw
    assert validate_elimination_tree(H, E) and E.depth == td


@pytest.mark.parametrize("k", range(1, 7))
def test_clique_widths(k):
    assert treewidth_exact(clique(k))[0] == k - 1
    assert treedepth_exact(clique(k))[0] == k


@pytest.mark.parametrize("k", range(2, 16))
def test_path_widths(k):
    assert treewidth_exact(path(k))[0] == 1
    assert pathwidth_exact(path(k))[0] == 1
    assert treedepth_exact(path(k))[0] == math.ceil(math.log2(k + 1))


def test_cycle_and_spider():
    assert treewidth_exact(cycle(4))[0] == 2
    assert pathwidth_exact(cycle(4))[0] == 2
    assert treedepth_exact(cycle(4))[0] == 3
    S = spider(2)
    assert treewidth_exact(S)[0] == 1
    pw, P = pathwidth_exact(S)
    assert pw == 2 and validate_path_decomposition(S, P)


def test_large_tree_pathwidth():
    from homcompile.graphs import generate_family

    T = generate_family("spider", 3, host=True)
    pw, P = pathwidth_exact(T)
    assert pw == 3
    assert validate_path_decomposition(T, P)


def test_treedepth_rejects_disconnected():
    with pytest.raises(DisconnectedPatternError):
        treedepth_exact(PatternGraph(3, [(1, 2)]))


def test_tree_decomposition_validator_examples():
    K2, P3 = path(2), path(3)
    assert validate_tree_decomposition(K2, TreeDecomposition([{1, 2}], []))
    assert validate_tree_decomposition(P3, TreeDecomposition([{1, 2}, {2, 3}], [(0, 1)]))
    rep = validate_tree_decomposition(P3, TreeDecomposition([{1, 2}, {3}], [(0, 1)]))
    assert not rep and any("23" in v for v in rep.violations)


def test_tree_decomposition_connectivity_violation():
    P3 = path(3)
    T = TreeDecomposition([{1, 2}, {3}, {2, 3}], [(0, 1), (1, 2)])
    rep = validate_tree_decomposition(P3, T)
    assert not rep and any("vertex 2" in v for v in rep.violations)


def test_tree_decomposition_structural_errors():
    P3 = path(3)
    with pytest.raises(StructureError):
        validate_tree_decomposition(P3, TreeDecomposition([{1, 2}, {2, 3}], []))
    with pytest.raises(StructureError):
        validate_tree_decomposition(P3, TreeDecomposition([{1, 2}, {2, 3}, {3}], [(0, 1), (1, 0)]))


def test_elimination_tree_validator_examples():
    P3, K3 = path(3), clique(3)
    E = EliminationTree({2: None, 1: 2, 3: 2}, 2)
    assert validate_elimination_tree(P3, E) and E.depth == 2
    chain = EliminationTree({1: None, 2: 1, 3: 2}, 1)
    assert validate_elimination_tree(K3, chain) and chain.depth == 3
    star = EliminationTree({1: None, 2: 1, 3: 1}, 1)
    assert not validate_elimination_tree(P3, star)
    with pytest.raises(StructureError):
        validate_elimination_tree(P3, EliminationTree({1: None, 2: 1}, 1))


def test_width_relations_over_connected_graphs():
    for k in range(1, 7):
        for H in connected_graphs(k):
            tw, pw, td = treewidth_exact(H)[0], pathwidth_exact(H)[0], treedepth_exact(H)[0]
            assert tw <= pw <= td - 1
            if H.m < k * (k - 1) // 2:
                assert td <= k - 1


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([G for k in range(2, 7) for G in connected_graphs(k)]))
def test_certificate_text_round_trip(H):
    _, T = treewidth_exact(H)
    _, P = pathwidth_exact(H)
    _, E = treedepth_exact(H)
    T2 = parse_tree_decomposition(format_tree_decomposition(T))
    assert T2.bags == T.bags and set(map(frozenset, T2.tree_edges)) == set(map(frozenset, T.tree_edges))
    P2 = path_from_tree(parse_tree_decomposition(format_tree_decomposition(P)))
    assert P2.bags == P.bags
    E2 = parse_elimination_tree(format_elimination_tree(E))
    assert E2 == E
    assert validate_tree_decomposition(H, T2) and validate_elimination_tree(H, E2)


@pytest.mark.parametrize("text", ["b 1 1 2\n", "td 2\nb 1 1\n", "td 1\nb 0 1\n", "td 1\nb 1 x\n"])
def test_decomposition_format_errors(text):
    with pytest.raises(FormatError):
        parse_tree_decomposition(text)


def test_elimination_tree_format_errors():
    with pytest.raises(FormatError):
        parse_elimination_tree("c 1 2\n")
    with pytest.raises(FormatError):
        parse_elimination_tree("et 1\nc 1\n")


def test_path_from_tree_rejects_branching():
    T = TreeDecomposition([{1, 2}, {2, 3}, {2, 4}, {2, 5}], [(0, 1), (0, 2), (0, 3)])
    with pytest.raises(StructureError):
        path_from_tree(T)


def test_pathdecomposition_as_tree():
    P = PathDecomposition([{1, 2}, {2, 3}, {3, 4}])
    assert validate_tree_decomposition(path(4), P.as_tree())
