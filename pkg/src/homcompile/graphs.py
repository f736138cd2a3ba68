"""Pattern and host graphs, partitions, quotients and graph families.

Vertices are the contiguous integers ``1..n``.  Edges are stored as sorted
pairs ``(i, j)`` with ``i < j``.
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable, Iterator, Mapping, Sequence, Union

from .errors import FormatError

MAX_PATTERN_SIZE = 16
CANONICAL_LIMIT = 8


def _norm_edge(e) -> tuple[int, int]:
    i, j = e
    i, j = int(i), int(j)
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class Graph:
    """A simple undirected graph on vertices ``1..n``."""

    n: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("vertex count must be non-negative")
        edges = frozenset(_norm_edge(e) for e in self.edges)
        for i, j in edges:
            if i == j:
                raise ValueError(f"loop at vertex {i}")
            if i < 1 or j > self.n:
                raise ValueError(f"edge {(i, j)} out of range 1..{self.n}")
        object.__setattr__(self, "edges", edges)

    @property
    def m(self) -> int:
        return len(self.edges)

    def vertices(self) -> range:
        return range(1, self.n + 1)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    @cached_property
    def adjacency(self) -> dict[int, frozenset]:
        adj: dict[int, set] = {v: set() for v in self.vertices()}
        for i, j in self.edges:
            adj[i].add(j)
            adj[j].add(i)
        return {v: frozenset(s) for v, s in adj.items()}

    @cached_property
    def adjacency_masks(self) -> list[int]:
        """Neighbourhoods as bitmasks, index ``v - 1`` holds bit ``u - 1``."""
        masks = [0] * self.n
        for i, j in self.edges:
            masks[i - 1] |= 1 << (j - 1)
            masks[j - 1] |= 1 << (i - 1)
        return masks

    def has_edge(self, u: int, v: int) -> bool:
        return _norm_edge((u, v)) in self.edges

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def components(self) -> list[list[int]]:
        seen: set[int] = set()
        comps = []
        for s in self.vertices():
            if s in seen:
                continue
            stack, comp = [s], []
            seen.add(s)
            while stack:
                v = stack.pop()
                comp.append(v)
                for w in self.adjacency[v]:
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
            comps.append(sorted(comp))
        return comps

    def is_connected(self) -> bool:
        return self.n <= 1 or len(self.components()) == 1

    def is_tree(self) -> bool:
        return self.n >= 1 and self.m == self.n - 1 and self.is_connected()

    def relabel(self, perm: Mapping[int, int] | Sequence[int]):
        """Apply ``v -> perm[v]`` (mapping) or ``v -> perm[v - 1]`` (sequence)."""
        if isinstance(perm, Mapping):
            f = perm.__getitem__
        else:
            f = lambda v: perm[v - 1]  # noqa: E731
        return type(self)(self.n, frozenset((f(i), f(j)) for i, j in self.edges))

    def induced_subgraph(self, vertices: Iterable[int]) -> "HostGraph":
        """The subgraph induced on ``vertices``, relabelled ``1..s`` in sorted order."""
        vs = sorted(set(vertices))
        index = {v: t + 1 for t, v in enumerate(vs)}
        edges = [(index[i], index[j]) for i, j in self.edges if i in index and j in index]
        return HostGraph(len(vs), frozenset(edges))

    def __str__(self) -> str:
        return f"{type(self).__name__}(n={self.n}, edges={self.sorted_edges()})"


@dataclass(frozen=True)
class PatternGraph(Graph):
    """A pattern on vertices ``1..k`` with ``k <= 16``."""

    def __post_init__(self):
        super().__post_init__()
        if self.n > MAX_PATTERN_SIZE:
            raise ValueError(f"patterns are limited to {MAX_PATTERN_SIZE} vertices, got {self.n}")

    @property
    def k(self) -> int:
        return self.n


@dataclass(frozen=True)
class HostGraph(Graph):
    """A host graph; no size limit."""


def pattern(k: int, edges: Iterable) -> PatternGraph:
    return PatternGraph(k, frozenset(edges))


def host(n: int, edges: Iterable) -> HostGraph:
    return HostGraph(n, frozenset(edges))


# ---------------------------------------------------------------------------
# homomorphisms and automorphisms


def is_homomorphism(H: Graph, G: Graph, phi: Mapping[int, int] | Sequence[int]) -> bool:
    """True iff ``phi`` maps every edge of ``H`` onto an edge of ``G``.

    ``phi`` is either a mapping ``{i: phi(i)}`` or a sequence whose entry
    ``i - 1`` is the image of pattern vertex ``i``.
    """
    if isinstance(phi, Mapping):
        images = [phi.get(i) for i in H.vertices()]
    else:
        images = list(phi)
        if len(images) != H.n:
            raise ValueError(f"vertex map must be total on 1..{H.n}")
    for i, img in enumerate(images, start=1):
        if img is None:
            raise ValueError(f"vertex map is undefined on {i}")
        if not 1 <= img <= G.n:
            raise ValueError(f"image {img} of vertex {i} is outside 1..{G.n}")
    return all(G.has_edge(images[i - 1], images[j - 1]) for i, j in H.edges)


def _isomorphism_extends(G: Graph, H: Graph, partial: dict[int, int]) -> bool:
    """Is there an isomorphism G -> H extending ``partial``?"""
    if G.n != H.n or G.m != H.m:
        return False
    adj_g, adj_h = G.adjacency, H.adjacency
    for a, b in partial.items():
        if len(adj_g[a]) != len(adj_h[b]):
            return False
    for a, b in partial.items():
        for c, d in partial.items():
            if (c in adj_g[a]) != (d in adj_h[b]):
                return False
    # assign remaining vertices, most constrained first
    order = [v for v in G.vertices() if v not in partial]
    order.sort(key=lambda v: (-len(adj_g[v] & partial.keys()), -len(adj_g[v]), v))
    used = set(partial.values())
    assign = dict(partial)

    def rec(t: int) -> bool:
        if t == len(order):
            return True
        v = order[t]
        nv = adj_g[v]
        for w in H.vertices():
            if w in used or len(adj_h[w]) != len(nv):
                continue
            nw = adj_h[w]
            if all((u in nv) == (assign[u] in nw) for u in assign):
                assign[v] = w
                used.add(w)
                if rec(t + 1):
                    return True
                del assign[v]
                used.discard(w)
        return False

    return rec(0)


def automorphism_count(H: Graph) -> int:
    """Number of edge-preserving permutations of the vertex set.

    Uses orbit-stabilizer: individualize vertices one at a time and multiply
    the orbit sizes under the pointwise stabilizer of the earlier ones.
    """
    fixed: dict[int, int] = {}
    total = 1
    for v in H.vertices():
        orbit = sum(
            1
            for w in H.vertices()
            if w not in fixed.values() and _isomorphism_extends(H, H, {**fixed, v: w})
        )
        total *= orbit
        fixed[v] = v
    return total


def are_isomorphic(G: Graph, H: Graph) -> bool:
    return _isomorphism_extends(G, H, {})


# ---------------------------------------------------------------------------
# partitions and quotients


@dataclass(frozen=True)
class VertexPartition:
    """A set partition of ``1..k``; blocks are kept sorted by least element."""

    blocks: tuple

    def __post_init__(self):
        blocks = tuple(sorted((tuple(sorted(set(b))) for b in self.blocks), key=lambda b: b[0] if b else 0))
        if any(len(b) == 0 for b in blocks):
            raise ValueError("partition blocks must be non-empty")
        flat = [v for b in blocks for v in b]
        if sorted(flat) != list(range(1, len(flat) + 1)):
            raise ValueError("blocks must be disjoint and cover 1..k")
        object.__setattr__(self, "blocks", blocks)

    @property
    def k(self) -> int:
        return sum(len(b) for b in self.blocks)

    @classmethod
    def singletons(cls, k: int) -> "VertexPartition":
        return cls(tuple((v,) for v in range(1, k + 1)))

    def block_index(self) -> dict[int, int]:
        """Map each element to the 1-based index of its block."""
        return {v: t for t, b in enumerate(self.blocks, start=1) for v in b}


class _LoopFlag:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "LOOP"

    def __bool__(self):
        return False


LOOP = _LoopFlag()


def quotient(H: Graph, rho: VertexPartition) -> Union[PatternGraph, _LoopFlag]:
    """Contract every block of ``rho`` to a single vertex.

    Returns ``LOOP`` when some edge of ``H`` lies inside a block.
    """
    if rho.k != H.n:
        raise ValueError(f"partition of 1..{rho.k} does not match a graph on {H.n} vertices")
    idx = rho.block_index()
    edges = set()
    for i, j in H.edges:
        a, b = idx[i], idx[j]
        if a == b:
            return LOOP
        edges.add((a, b))
    return PatternGraph(len(rho.blocks), frozenset(edges))


def set_partitions(k: int) -> Iterator[VertexPartition]:
    """All set partitions of ``1..k`` (Bell(k) of them)."""

    def rec(v: int, blocks: list[list[int]]):
        if v > k:
            yield VertexPartition(tuple(tuple(b) for b in blocks))
            return
        for b in blocks:
            b.append(v)
            yield from rec(v + 1, blocks)
            b.pop()
        blocks.append([v])
        yield from rec(v + 1, blocks)
        blocks.pop()

    if k == 0:
        return
    yield from rec(1, [])


def mobius_coefficient(rho: VertexPartition) -> int:
    """Moebius value mu(bottom, rho) in the partition lattice."""
    out = 1
    for b in rho.blocks:
        s = len(b)
        out *= (-1) ** (s - 1) * math.factorial(s - 1)
    return out


def loopfree_partitions(H: Graph) -> list[tuple[VertexPartition, PatternGraph]]:
    """Partitions of V(H) whose quotient has no loop, paired with the quotient."""
    if H.n > 10:
        raise ValueError("loopfree_partitions supports at most 10 vertices")
    adj = H.adjacency
    out = []

    # only merge vertices that are pairwise non-adjacent
    def rec(v: int, blocks: list[list[int]]):
        if v > H.n:
            rho = VertexPartition(tuple(tuple(b) for b in blocks))
            out.append((rho, quotient(H, rho)))
            return
        for b in blocks:
            if adj[v].isdisjoint(b):
                b.append(v)
                rec(v + 1, blocks)
                b.pop()
        blocks.append([v])
        rec(v + 1, blocks)
        blocks.pop()

    if H.n:
        rec(1, [])
    return out


def supergraphs_same_vertices(H: Graph) -> list[PatternGraph]:
    """All graphs on ``1..k`` whose edge set contains ``E(H)``."""
    if H.n > 8:
        raise ValueError("supergraph enumeration supports at most 8 vertices")
    missing = [e for e in itertools.combinations(H.vertices(), 2) if e not in H.edges]
    out = []
    for r in range(len(missing) + 1):
        for extra in itertools.combinations(missing, r):
            out.append(PatternGraph(H.n, H.edges | frozenset(extra)))
    return out


# ---------------------------------------------------------------------------
# canonical forms


@lru_cache(maxsize=4096)
def _canonical_code(n: int, edges: frozenset) -> int:
    pair_bit = {}
    for t, (i, j) in enumerate(itertools.combinations(range(1, n + 1), 2)):
        pair_bit[(i, j)] = t
    # the most significant bit belongs to the lexicographically first pair,
    # so minimizing the code minimizes the sorted edge list
    top = len(pair_bit) - 1
    weight = {p: 1 << (top - t) for p, t in pair_bit.items()}
    elist = list(edges)
    best = None
    for perm in itertools.permutations(range(1, n + 1)):
        code = 0
        for i, j in elist:
            a, b = perm[i - 1], perm[j - 1]
            code += weight[(a, b) if a < b else (b, a)]
        if best is None or code < best:
            best = code
    return 0 if best is None else best


def canonical_form(H: Graph) -> tuple[int, int, int]:
    """Isomorphism-invariant key ``(k, m, code)``.

    ``code`` is the minimum, over all relabellings, of the edge set encoded as
    a bitmask over the lexicographically ordered vertex pairs.
    """
    if H.n > CANONICAL_LIMIT:
        raise ValueError(f"canonical_form supports at most {CANONICAL_LIMIT} vertices")
    return (H.n, H.m, _canonical_code(H.n, H.edges))


def canonical_graph(H: Graph) -> PatternGraph:
    """The representative of ``H``'s class whose encoding is ``canonical_form``."""
    n, _, code = canonical_form(H)
    pairs = list(itertools.combinations(range(1, n + 1), 2))
    top = len(pairs) - 1
    edges = [p for t, p in enumerate(pairs) if code >> (top - t) & 1]
    return PatternGraph(n, frozenset(edges))


# ---------------------------------------------------------------------------
# families and generators


def _spider_edges(p: int) -> tuple[list[tuple[int, int]], int]:
    # T_0 is one vertex; T_p is a root joined to the roots of three T_{p-1}
    if p == 0:
        return [], 1
    sub, size = _spider_edges(p - 1)
    edges, nxt = [], 2
    for _ in range(3):
        edges.append((1, nxt))
        edges.extend((i + nxt - 1, j + nxt - 1) for i, j in sub)
        nxt += size
    return edges, nxt - 1


FAMILIES = ("path", "cycle", "clique", "spider")


def generate_family(name: str, parameter: int, host: bool = False) -> Graph:
    """Build ``path(k)``, ``cycle(k)``, ``clique(k)`` or ``spider(p)``.

    ``spider(p)`` is the tree joining a root to three copies of
    ``spider(p - 1)``; it has ``(3**(p+1) - 1) / 2`` vertices and pathwidth
    ``p``.  Pass ``host=True`` to get an uncapped ``HostGraph`` (needed for
    families with more than 16 vertices).
    """
    if parameter < 1:
        raise ValueError("family parameter must be >= 1")
    k = parameter
    if name == "path":
        n, edges = k, [(i, i + 1) for i in range(1, k)]
    elif name == "cycle":
        if k < 3:
            raise ValueError("cycles need at least 3 vertices")
        n, edges = k, [(i, i + 1) for i in range(1, k)] + [(1, k)]
    elif name == "clique":
        n, edges = k, list(itertools.combinations(range(1, k + 1), 2))
    elif name == "spider":
        edges, n = _spider_edges(k)
    else:
        raise ValueError(f"unknown family {name!r}")
    cls = HostGraph if host else PatternGraph
    return cls(n, frozenset(edges))


def path(k: int) -> PatternGraph:
    return generate_family("path", k)


def cycle(k: int) -> PatternGraph:
    return generate_family("cycle", k)


def clique(k: int) -> PatternGraph:
    return generate_family("clique", k)


def spider(p: int) -> PatternGraph:
    return generate_family("spider", p)


def random_graph(n: int, p: float, rng: random.Random) -> HostGraph:
    """Erdos-Renyi G(n, p) host drawn from ``rng``."""
    edges = [e for e in itertools.combinations(range(1, n + 1), 2) if rng.random() < p]
    return HostGraph(n, frozenset(edges))


def connected_graphs(k: int) -> list[PatternGraph]:
    """One representative per isomorphism class of connected graphs on k <= 7 vertices."""
    import networkx as nx

    if not 1 <= k <= 7:
        raise ValueError("connected_graphs covers 1 <= k <= 7")
    out = []
    for g in nx.graph_atlas_g():
        if g.number_of_nodes() == k and nx.is_connected(g):
            out.append(PatternGraph(k, frozenset((a + 1, b + 1) for a, b in g.edges())))
    return out


# ---------------------------------------------------------------------------
# text format


def format_graph(G: Graph) -> str:
    lines = [f"p {G.n} {G.m}"]
    lines += [f"e {i} {j}" for i, j in G.sorted_edges()]
    return "\n".join(lines) + "\n"


def parse_graph(text: str, kind: type = PatternGraph) -> Graph:
    """Parse ``p <n> <m>`` / ``e <i> <j>`` lines; ``#`` lines are comments."""
    header = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            if parts[0] == "p" and len(parts) == 3:
                if header is not None:
                    raise FormatError(f"line {lineno}: duplicate header")
                header = (int(parts[1]), int(parts[2]))
            elif parts[0] == "e" and len(parts) == 3:
                if header is None:
                    raise FormatError(f"line {lineno}: edge before header")
                i, j = int(parts[1]), int(parts[2])
                if not i < j:
                    raise FormatError(f"line {lineno}: edge endpoints must satisfy i < j")
                edges.append((i, j))
            else:
                raise FormatError(f"line {lineno}: unrecognized line {line!r}")
        except ValueError as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"line {lineno}: {exc}") from None
    if header is None:
        raise FormatError("missing 'p' header")
    n, m = header
    if len(edges) != m:
        raise FormatError(f"header declares {m} edges, found {len(edges)}")
    if len(set(edges)) != len(edges):
        raise FormatError("duplicate edge")
    try:
        return kind(n, frozenset(edges))
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def read_graph(path: str, kind: type = PatternGraph) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return parse_graph(fh.read(), kind)
