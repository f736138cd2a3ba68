"""Lower-bound witnesses: decompositions read off parse trees, gate censuses,
separating sets and an addition-gate matching diagnostic.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import networkx as nx

from .circuit import (
    ADD,
    CONST,
    INPUT,
    MUL,
    Circuit,
    ColoredEdge,
    DivisorSpace,
    Monomial,
    ParseNode,
    producible,
)
from .compilers import compile_pattern, fitted_exponent
from .errors import StructureError
from .graphs import Graph
from .width import EliminationTree, PathDecomposition, TreeDecomposition


# ---------------------------------------------------------------------------
# parse-tree helpers


def _coliso_edges(C: Circuit, T: ParseNode, H: Graph) -> None:
    """Raise unless the parse tree's leaf product is a ColIso monomial of H."""
    colour: dict[int, int] = {}
    seen = set()
    for node in T.nodes():
        op, var, _ = C.gates[node.gate]
        if op != INPUT:
            continue
        if not isinstance(var, ColoredEdge):
            raise StructureError(f"leaf {var!r} is not a coloured edge variable")
        e = (var.i, var.j)
        if e in seen:
            raise StructureError(f"pattern edge {e} occurs twice")
        if not H.has_edge(*e):
            raise StructureError(f"{e} is not an edge of the pattern")
        seen.add(e)
        for i, u in ((var.i, var.u), (var.j, var.v)):
            if colour.setdefault(i, u) != u:
                raise StructureError(f"colour class {i} used with two host vertices")
    if seen != set(H.edges):
        raise StructureError("parse tree misses some pattern edges")


def _leaf_edge(C: Circuit, node: ParseNode):
    op, var, _ = C.gates[node.gate]
    return (var.i, var.j) if op == INPUT else None


def _complete(H: Graph, edges: set, candidates) -> list[int]:
    return sorted(v for v in candidates if all((min(v, w), max(v, w)) in edges for w in H.adjacency[v]))


# ---------------------------------------------------------------------------
# extractors


def extract_treedec(C: Circuit, T: ParseNode, H: Graph) -> TreeDecomposition:
    """Tree decomposition of H from a parse tree of a ColIso monomial.

    Leaves give bags {i, j}; a multiplication joins the two root bags into
    A u B and then forgets the vertices all of whose edges lie below.
    """
    _coliso_edges(C, T, H)
    bags: list[frozenset] = []
    tree: list[tuple[int, int]] = []
    # per occurrence: (root bag index or None, edges below)
    result: dict[int, tuple] = {}

    def forget(top: int, edges: set) -> int:
        rest = bags[top] - set(_complete(H, edges, bags[top]))
        if rest and rest != bags[top]:
            bags.append(frozenset(rest))
            tree.append((top, len(bags) - 1))
            return len(bags) - 1
        return top

    for node in T.nodes():
        op = C.gates[node.gate][0]
        if op == INPUT:
            e = _leaf_edge(C, node)
            bags.append(frozenset(e))
            result[id(node)] = (forget(len(bags) - 1, {e}), {e})
        elif op == CONST:
            result[id(node)] = (None, set())
        elif op == ADD:
            result[id(node)] = result.pop(id(node.children[0]))
        else:
            (ra, ea), (rb, eb) = (result.pop(id(c)) for c in node.children)
            edges = ea | eb
            if ra is None or rb is None:
                result[id(node)] = (rb if ra is None else ra, edges)
                continue
            bags.append(bags[ra] | bags[rb])
            top = len(bags) - 1
            tree += [(ra, top), (rb, top)]
            result[id(node)] = (forget(top, edges), edges)
    if not bags:
        bags = [frozenset(H.vertices())]
    return TreeDecomposition(tuple(bags), tuple(tree))


def _is_leaf(C: Circuit, node: ParseNode) -> bool:
    return C.gates[node.gate][0] in (INPUT, CONST)


def extract_pathdec(C: Circuit, T: ParseNode, H: Graph) -> PathDecomposition:
    """Path decomposition of H from a parse tree of a skew circuit.

    Starting from the deepest input, each multiplication by an input x[(i,u),(j,v)]
    appends root + {i, j} and then a bag without the completed vertices.
    """
    _coliso_edges(C, T, H)
    hanging = []
    node = T
    while not _is_leaf(C, node):
        op = C.gates[node.gate][0]
        if op == ADD:
            node = node.children[0]
            continue
        l, r = node.children
        if _is_leaf(C, r):
            hanging.append(r)
            node = l
        elif _is_leaf(C, l):
            hanging.append(l)
            node = r
        else:
            raise StructureError(f"gate {node.gate} multiplies two non-leaf subtrees; not a skew parse tree")
    hanging.append(node)
    bags: list[frozenset] = []
    root: frozenset = frozenset()
    edges: set = set()
    for leaf in reversed(hanging):
        e = _leaf_edge(C, leaf)
        if e is None:
            continue
        edges.add(e)
        root = root | set(e)
        if not bags or bags[-1] != root:
            bags.append(root)
        rest = root - set(_complete(H, edges, root))
        if rest and rest != root:
            bags.append(frozenset(rest))
            root = frozenset(rest)
    if not bags:
        bags = [frozenset(H.vertices())]
    return PathDecomposition(tuple(bags))


def extract_elimtree(F: Circuit, T: ParseNode, H: Graph) -> EliminationTree:
    """Elimination tree of H from a formula parse tree.

    At the lowest gate where vertices i_1 < ... < i_r become complete they
    are chained above the current roots: i_1 adopts the roots, i_{j+1} adopts i_j.
    """
    _coliso_edges(F, T, H)
    parent: dict[int, Optional[int]] = {}
    result: dict[int, tuple] = {}
    for node in T.nodes():
        op = F.gates[node.gate][0]
        if op == CONST:
            result[id(node)] = ([], set(), set())
            continue
        if op == INPUT:
            e = _leaf_edge(F, node)
            roots, edges, touched = [], {e}, set(e)
        else:
            roots, edges, touched = [], set(), set()
            for c in node.children:
                r, ed, to = result.pop(id(c))
                roots += r
                edges |= ed
                touched |= to
        new = [v for v in _complete(H, edges, touched) if v not in parent]
        for v in new:
            for r in roots:
                parent[r] = v
            roots = [v]
        result[id(node)] = (roots, edges, touched)
    roots, _, _ = result[id(T)]
    if not parent:
        return EliminationTree({v: None for v in H.vertices()}, 1)
    for r in roots:
        parent[r] = None
    return EliminationTree(parent, roots[0])


# ---------------------------------------------------------------------------
# census


def parse_tree_gates(C: Circuit, m: Monomial) -> list[bool]:
    """For each gate: does some parse tree of ``m`` pass through it?

    Up-pass: the divisors of m each gate can produce.  Down-pass (parents
    first): the divisors each gate is asked to produce by some parse tree of m.
    """
    space = DivisorSpace(m)
    S = producible(C, space)
    need: list[set] = [set() for _ in C.gates]
    if space.full in S[C.output]:
        need[C.output].add(space.full)
    for g in range(len(C.gates) - 1, -1, -1):
        if not need[g]:
            continue
        op, a, b = C.gates[g]
        if op == ADD:
            for c in (a, b):
                need[c] |= need[g] & S[c]
        elif op == MUL:
            for code in need[g]:
                for x in S[a]:
                    y = code - x
                    if y in S[b] and space.combine(x, y) == code:
                        need[a].add(x)
                        need[b].add(y)
    return [bool(s) for s in need]


@dataclass
class GateCensus:
    counts: list[int]
    total: int

    def __getitem__(self, g):
        return self.counts[g]

    def lines(self) -> list[str]:
        return [f"gate {g} {c}" for g, c in enumerate(self.counts)]


def gate_census(C: Circuit, monomials) -> GateCensus:
    """Per gate, how many of ``monomials`` have a parse tree through it."""
    counts = [0] * len(C.gates)
    monomials = list(monomials)
    for m in monomials:
        for g, hit in enumerate(parse_tree_gates(C, m)):
            if hit:
                counts[g] += 1
    return GateCensus(counts, len(monomials))


def census_witness(census: GateCensus, T: ParseNode) -> tuple[int, int]:
    """(gate, census) of the least-populated gate on a parse tree."""
    return min(((census[g], g) for g in T.gates()), key=lambda t: (t[0], t[1]))[::-1]


# ---------------------------------------------------------------------------
# separating sets


def _divisor_multisets(prod: Monomial, degrees: Optional[set]):
    items = list(prod)
    ranges = [range(e + 1) for _, e in items]
    for exps in itertools.product(*ranges):
        if degrees is not None and sum(exps) not in degrees:
            continue
        yield tuple.__new__(Monomial, [(v, e) for (v, _), e in zip(items, exps) if e])


def conflict_pairs(poly_monomials, candidates=None) -> set[tuple[int, int]]:
    """Index pairs (a, b) of ``candidates`` with some other polynomial monomial dividing their product."""
    poly = set(poly_monomials)
    cand = list(poly_monomials if candidates is None else candidates)
    degrees = {m.degree for m in poly}
    out = set()
    for a in range(len(cand)):
        s = cand[a]
        for b in range(a + 1, len(cand)):
            t = cand[b]
            for d in _divisor_multisets(s * t, degrees):
                if d in poly and d != s and d != t:
                    out.add((a, b))
                    break
    return out


def is_separating_set(poly_monomials, B) -> bool:
    """No pair s != t in B has a polynomial monomial other than s, t dividing s*t."""
    B = list(dict.fromkeys(B))
    return not conflict_pairs(poly_monomials, B)


@dataclass
class SeparatingResult:
    size: int
    witness: list
    exact: bool
    conflicts: int = 0


EXACT_LIMIT = 2000


def max_clique(masks: list[int]) -> list[int]:
    """Maximum clique of a graph given as neighbour bitmasks.

    Branch and bound with greedy colouring bounds; vertices are renumbered by
    decreasing degree first, which keeps the colour classes tight.
    """
    n = len(masks)
    order = sorted(range(n), key=lambda v: (-bin(masks[v]).count("1"), v))
    pos = {v: t for t, v in enumerate(order)}
    adj = [0] * n
    for v in range(n):
        m, out = masks[v], 0
        while m:
            low = m & -m
            out |= 1 << pos[low.bit_length() - 1]
            m ^= low
        adj[pos[v]] = out
    best: list[int] = []

    def colour(P: int):
        vs, bounds, c = [], [], 0
        while P:
            c += 1
            Q = P
            while Q:
                low = Q & -Q
                v = low.bit_length() - 1
                Q &= ~adj[v] & ~low
                P &= ~low
                vs.append(v)
                bounds.append(c)
        return vs, bounds

    def expand(R: list, P: int):
        nonlocal best
        vs, bounds = colour(P)
        for t in range(len(vs) - 1, -1, -1):
            if len(R) + bounds[t] <= len(best):
                return
            v = vs[t]
            NP = P & adj[v]
            if NP:
                expand(R + [v], NP)
            elif len(R) + 1 > len(best):
                best = R + [v]
            P &= ~(1 << v)

    if n:
        expand([], (1 << n) - 1)
    return sorted(order[v] for v in best)


def max_separating_set(poly_monomials, exact_limit: int = EXACT_LIMIT) -> SeparatingResult:
    """Largest separating subset of the polynomial's monomials.

    Exact (a maximum clique in the compatibility graph) up to ``exact_limit``
    monomials, otherwise a greedy lower bound with ``exact=False``.
    """
    mons = sorted(set(poly_monomials))
    conf = conflict_pairs(mons)
    n = len(mons)
    if n <= exact_limit:
        full = (1 << n) - 1
        compat = [full & ~(1 << v) for v in range(n)]
        for a, b in conf:
            compat[a] &= ~(1 << b)
            compat[b] &= ~(1 << a)
        clique = max_clique(compat)
        return SeparatingResult(len(clique), [mons[i] for i in clique], True, len(conf))
    adj: dict[int, set] = {i: set() for i in range(n)}
    for a, b in conf:
        adj[a].add(b)
        adj[b].add(a)
    chosen, banned = [], set()
    for i in sorted(adj, key=lambda i: (len(adj[i]), i)):
        if i not in banned:
            chosen.append(i)
            banned |= adj[i] | {i}
    return SeparatingResult(len(chosen), [mons[i] for i in chosen], False, len(conf))


# ---------------------------------------------------------------------------
# addition-gate matching


@dataclass
class MatchingReport:
    matching: int
    add_gates: int
    monomials: int
    unmatched: list = field(default_factory=list)

    @property
    def deficiency(self) -> int:
        return self.add_gates - self.matching


def addition_gate_matching(C: Circuit, guard: Optional[int] = None) -> MatchingReport:
    """Maximum matching between addition gates and monomials through them.

    A deficiency (fewer matched than addition gates) shows the circuit is not
    addition-optimal.
    """
    table = C.expand(guard)
    adds = [g for g, (op, _, _) in enumerate(C.gates) if op == ADD]
    G = nx.Graph()
    G.add_nodes_from(("g", g) for g in adds)
    mons = sorted(table)
    G.add_nodes_from(("m", t) for t in range(len(mons)))
    for t, m in enumerate(mons):
        hits = parse_tree_gates(C, m)
        for g in adds:
            if hits[g]:
                G.add_edge(("g", g), ("m", t))
    match = nx.bipartite.hopcroft_karp_matching(G, top_nodes=[("g", g) for g in adds])
    matched = [g for g in adds if ("g", g) in match]
    return MatchingReport(len(matched), len(adds), len(mons), sorted(set(adds) - set(matched)))


# ---------------------------------------------------------------------------
# scaling


@dataclass
class ScalingResult:
    rows: list  # (n, size)
    exponent: float

    def lines(self) -> list[str]:
        return [f"n {n} size {s}" for n, s in self.rows] + [f"exponent {self.exponent:.4f}"]


def scaling_experiment(H: Graph, model: str, n_list, poly: str = "hom") -> ScalingResult:
    ns = list(n_list)
    if len(ns) < 2 or ns != sorted(ns):
        raise ValueError("need at least two ascending host sizes")
    rows = [(n, compile_pattern(H, model, n, poly).size()) for n in ns]
    return ScalingResult(rows, fitted_exponent([r[0] for r in rows], [r[1] for r in rows]))
