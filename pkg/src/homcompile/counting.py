"""Homomorphism, subgraph and induced-subgraph counting on top of the compilers.

Subgraph counts go through the spasm: injective homomorphisms are a signed
combination of homomorphism counts from loop-free quotients, divided by
aut(H).  Induced counts invert the supergraph relation
Sub(H, G) = sum_F Sub(H, F) Ind(F, G) over k-vertex graphs F.
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .circuit import HostIndicator
from .compilers import compile_pattern
from .errors import DEFAULT_ENUM_BUDGET, ConsistencyError, ResourceError, guard_value
from .graphs import (
    CANONICAL_LIMIT,
    Graph,
    PatternGraph,
    are_isomorphic,
    automorphism_count,
    canonical_form,
    canonical_graph,
    clique,
    loopfree_partitions,
    mobius_coefficient,
    path,
    supergraphs_same_vertices,
)

HOM_MODES = ("circuit", "abp", "formula", "brute")


@dataclass(frozen=True)
class SpasmTerm:
    quotient: PatternGraph
    coefficient: int


@dataclass(frozen=True)
class InducedExpansion:
    terms: tuple  # of (PatternGraph class representative, coefficient)
    clique_coefficient: int

    def coefficient(self, F: Graph) -> int:
        key = canonical_form(F)
        for rep, c in self.terms:
            if canonical_form(rep) == key:
                return c
        return 0


# ---------------------------------------------------------------------------
# homomorphisms


def _key(H: Graph):
    """Isomorphism-invariant cache key when cheap, else the labelled graph."""
    return canonical_form(H) if H.n <= CANONICAL_LIMIT else (H.n, H.edges)


@lru_cache(maxsize=512)
def _compiled(key, H: PatternGraph, model: str, n: int):
    return compile_pattern(H, model, n, "hom")


def _component_patterns(H: Graph) -> list[PatternGraph]:
    out = []
    for comp in H.components():
        index = {v: t + 1 for t, v in enumerate(comp)}
        out.append(PatternGraph(len(comp), [(index[i], index[j]) for i, j in H.edges if i in index]))
    return out


def count_hom(H: Graph, G: Graph, mode: str = "circuit") -> int:
    """Number of homomorphisms H -> G, by a compiled backend or brute force.

    Disconnected patterns are handled component by component.
    """
    if mode not in HOM_MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "brute":
        return count_hom_bruteforce(H, G)
    if H.n == 0:
        return 1
    if G.n == 0:
        return 0
    if not H.is_connected():
        return math.prod(count_hom(P, G, mode) for P in _component_patterns(H))
    P = canonical_graph(H) if H.n <= CANONICAL_LIMIT else PatternGraph(H.n, H.edges)
    C = _compiled(_key(P), P, mode, G.n)
    return C.evaluate_vectorized(HostIndicator(G), machine_ints=G.n**H.n < 2**62)


class _HomTable:
    """Per-host memo of Hom(F, G) keyed by the class of F."""

    def __init__(self, G: Graph, mode: str):
        self.G, self.mode, self.memo = G, mode, {}

    def __call__(self, F: Graph) -> int:
        k = _key(F)
        if k not in self.memo:
            self.memo[k] = count_hom(F, self.G, self.mode)
        return self.memo[k]


# ---------------------------------------------------------------------------
# subgraphs via the spasm


def spasm(H: Graph) -> list[SpasmTerm]:
    """Loop-free quotients with Moebius coefficients, merged by isomorphism class."""
    merged: dict = {}
    for rho, Q in loopfree_partitions(H):
        k = _key(Q)
        rep, c = merged.get(k, (Q, 0))
        merged[k] = (rep, c + mobius_coefficient(rho))
    return [SpasmTerm(Q, c) for Q, c in merged.values() if c]


def count_sub(H: Graph, G: Graph, mode: str = "circuit", _homs=None) -> int:
    """Number of subgraphs of G isomorphic to H (k <= 10)."""
    if mode == "brute":
        return count_sub_bruteforce(H, G)
    homs = _homs or _HomTable(G, mode)
    inj = sum(t.coefficient * homs(t.quotient) for t in _spasm_cached(_key(H), H))
    aut = automorphism_count(H)
    if inj % aut:
        raise ConsistencyError(f"injective count {inj} not divisible by aut(H) = {aut}")
    return inj // aut


@lru_cache(maxsize=256)
def _spasm_cached(key, H):
    return tuple(spasm(H))


# ---------------------------------------------------------------------------
# induced subgraphs


@lru_cache(maxsize=128)
def _supergraph_terms(key, H: PatternGraph) -> tuple:
    """(class representative, coefficient) over all supergraphs of H on V(H)."""
    aut_h = automorphism_count(H)
    counts: dict = {}
    for F in supergraphs_same_vertices(H):
        k = canonical_form(F)
        rep, c = counts.get(k, (F, 0))
        counts[k] = (rep, c + 1)
    terms = []
    for k, (F, labelled) in sorted(counts.items()):
        # Sub(H, F) = (#labelled supergraphs of H isomorphic to F) * aut(F) / aut(H)
        sub_hf = labelled * automorphism_count(F) // aut_h
        sign = -1 if (F.m - H.m) % 2 else 1
        terms.append((canonical_graph(F), sign * sub_hf))
    return tuple(terms)


def _as_pattern(H: Graph) -> PatternGraph:
    return H if isinstance(H, PatternGraph) else PatternGraph(H.n, H.edges)


def induced_expansion(H: Graph) -> InducedExpansion:
    """Ind(H, .) as a signed combination of Sub(F, .) over supergraph classes F."""
    H = _as_pattern(H)
    k = H.n
    if H.m == k * (k - 1) // 2:
        raise ValueError("induced expansion of a complete pattern is degenerate")
    terms = _supergraph_terms(_key(H), H)
    kk = canonical_form(clique(k))
    cc = next(c for F, c in terms if canonical_form(F) == kk)
    if abs(cc) < 2:
        warnings.warn(
            f"clique coefficient {cc} of pattern with edges {H.sorted_edges()} has magnitude < 2; "
            "no prime removes the clique term",
            RuntimeWarning,
            stacklevel=2,
        )
    return InducedExpansion(terms, cc)


def count_induced(H: Graph, G: Graph, mode: str = "circuit") -> int:
    """Number of induced subgraphs of G isomorphic to H (k <= 8)."""
    if mode == "brute":
        return count_induced_bruteforce(H, G)
    H = _as_pattern(H)
    if H.n > G.n:
        return 0
    homs = _HomTable(G, mode)
    return sum(c * count_sub(F, G, mode, homs) for F, c in _supergraph_terms(_key(H), H))


def smallest_prime_factor(m: int) -> int:
    m = abs(m)
    if m < 2:
        raise ValueError(f"{m} has no prime factor")
    p = 2
    while p * p <= m:
        if m % p == 0:
            return p
        p += 1
    return m


def count_induced_mod_p(H: Graph, G: Graph, mode: str = "circuit", expansion=None):
    """(Ind(H, G) mod p, p) where p divides the clique coefficient.

    The clique term is never evaluated.  If no such prime exists (the clique
    coefficient is +-1) a warning is issued and ``(Ind(H, G), None)`` is
    returned from the full expansion instead.
    """
    exp = expansion or induced_expansion(H)
    cc = exp.clique_coefficient
    if abs(cc) < 2:
        return count_induced(H, G, mode), None
    p = smallest_prime_factor(cc)
    if H.n > G.n:
        return 0, p
    kk = canonical_form(clique(H.n))
    homs = _HomTable(G, mode)
    total = 0
    for F, c in exp.terms:
        if c % p == 0 or canonical_form(F) == kk:
            continue
        total += c * count_sub(F, G, mode, homs)
    return total % p, p


def detect_induced(H: Graph, G: Graph, rounds: int = 64, seed: int = 0, mode: str = "circuit") -> bool:
    """Randomized induced-subgraph detection; ``True`` answers are always correct.

    Tries G itself, then ``rounds`` random induced subgraphs keeping each
    vertex with probability 1/2, and reports whether any of them has a
    non-zero residue mod p.
    """
    H = _as_pattern(H)
    exp = induced_expansion(H)
    if H.n > G.n:
        return False

    def hit(S: Graph) -> bool:
        if S.n < H.n:
            return False
        r, _ = count_induced_mod_p(H, S, mode, exp)
        return r != 0

    if hit(G):
        return True
    for r in range(rounds):
        rng = np.random.default_rng([seed, r])
        keep = [v for v, flag in zip(G.vertices(), rng.random(G.n) < 0.5) if flag]
        if hit(G.induced_subgraph(keep)):
            return True
    return False


def clique_count_via_oracle(k: int, G: Graph, induced_oracle, H: Graph | None = None, mode: str = "circuit") -> int:
    """Sub(K_k, G) from an exact induced-count oracle for a non-clique k-vertex H."""
    H = _as_pattern(H) if H is not None else path(k)
    if H.n != k:
        raise ValueError("oracle pattern must have k vertices")
    exp = induced_expansion(H)
    kk = canonical_form(clique(k))
    homs = _HomTable(G, mode)
    rest = sum(c * count_sub(F, G, mode, homs) for F, c in exp.terms if canonical_form(F) != kk)
    num = induced_oracle(H, G) - rest
    q, r = divmod(num, exp.clique_coefficient)
    if r or q < 0:
        raise ConsistencyError(f"{num} is not a non-negative multiple of {exp.clique_coefficient}")
    return q


# ---------------------------------------------------------------------------
# brute-force oracles


def _check_budget(cost: int, what: str):
    budget = guard_value(DEFAULT_ENUM_BUDGET)
    if cost > budget:
        raise ResourceError(f"{what} enumeration needs {cost} steps, budget {budget}")


def _search_order(H: Graph) -> list[int]:
    """Vertices ordered so each (after the first of its component) has an earlier neighbour."""
    order, seen = [], set()
    for start in H.vertices():
        if start in seen:
            continue
        queue = [start]
        seen.add(start)
        for v in queue:
            order.append(v)
            for w in sorted(H.adjacency[v]):
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
    return order


def _homomorphisms(H: Graph, G: Graph, injective: bool):
    order = _search_order(H)
    back = [[order.index(w) for w in H.adjacency[v] if order.index(w) < t] for t, v in enumerate(order)]
    gadj = G.adjacency
    image = [0] * len(order)
    allv = list(G.vertices())

    def rec(t):
        if t == len(order):
            yield image
            return
        if back[t]:
            cand = set(gadj[image[back[t][0]]])
            for s in back[t][1:]:
                cand &= gadj[image[s]]
        else:
            cand = allv
        used = set(image[:t]) if injective else ()
        for a in sorted(cand):
            if a in used:
                continue
            image[t] = a
            yield from rec(t + 1)

    for img in rec(0):
        yield {v: img[t] for t, v in enumerate(order)}


def count_hom_bruteforce(H: Graph, G: Graph) -> int:
    _check_budget(G.n**H.n, "homomorphism")
    return sum(1 for _ in _homomorphisms(H, G, injective=False))


def count_sub_bruteforce(H: Graph, G: Graph) -> int:
    _check_budget(math.perm(G.n, H.n) if G.n >= H.n else 0, "subgraph")
    if H.n > G.n:
        return 0
    seen = set()
    for phi in _homomorphisms(H, G, injective=True):
        verts = frozenset(phi.values())
        edges = frozenset(frozenset((phi[i], phi[j])) for i, j in H.edges)
        seen.add((verts, edges))
    return len(seen)


def count_induced_bruteforce(H: Graph, G: Graph) -> int:
    if H.n > G.n:
        return 0
    _check_budget(math.perm(G.n, H.n), "induced subgraph")
    hdeg = sorted(H.degree(v) for v in H.vertices())
    count = 0
    for S in itertools.combinations(G.vertices(), H.n):
        F = G.induced_subgraph(S)
        if F.m != H.m or sorted(F.degree(v) for v in F.vertices()) != hdeg:
            continue
        if are_isomorphic(F, H):
            count += 1
    return count


def detect_induced_bruteforce(H: Graph, G: Graph) -> bool:
    return count_induced_bruteforce(H, G) > 0
