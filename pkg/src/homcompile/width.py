"""Exact treewidth, pathwidth and treedepth with certificates.

All three solvers work on vertex bitmasks (bit ``v - 1`` is vertex ``v``):

* treewidth: subset DP over elimination orderings,
* pathwidth: subset DP over vertex-separation orderings (plus a path-spine
  recursion for trees with more than 16 vertices),
* treedepth: memoized recursion over connected vertex subsets.

Ties are broken towards the smallest vertex label so outputs are stable.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from functools import lru_cache

from .errors import DisconnectedPatternError, FormatError, StructureError
from .graphs import Graph, MAX_PATTERN_SIZE

TREE_PATHWIDTH_LIMIT = 50


@dataclass(frozen=True)
class TreeDecomposition:
    bags: tuple  # of frozensets
    tree_edges: tuple  # of (a, b) bag indices, 0-based

    def __post_init__(self):
        object.__setattr__(self, "bags", tuple(frozenset(b) for b in self.bags))
        object.__setattr__(self, "tree_edges", tuple((int(a), int(b)) for a, b in self.tree_edges))

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags), default=0) - 1

    @property
    def max_bag(self) -> int:
        return max((len(b) for b in self.bags), default=0)


@dataclass(frozen=True)
class PathDecomposition:
    bags: tuple  # ordered

    def __post_init__(self):
        object.__setattr__(self, "bags", tuple(frozenset(b) for b in self.bags))

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags), default=0) - 1

    @property
    def max_bag(self) -> int:
        return max((len(b) for b in self.bags), default=0)

    def as_tree(self) -> TreeDecomposition:
        return TreeDecomposition(self.bags, tuple((t, t + 1) for t in range(len(self.bags) - 1)))


@dataclass(frozen=True)
class EliminationTree:
    parent: dict  # vertex -> parent vertex, or None for the root
    root: int

    @property
    def vertices(self) -> list[int]:
        return sorted(self.parent)

    def children(self) -> dict[int, list[int]]:
        ch = defaultdict(list)
        for v, p in sorted(self.parent.items()):
            if p is not None:
                ch[p].append(v)
        return dict(ch)

    def ancestors(self, v: int) -> list[int]:
        """Proper ancestors of ``v`` from the root downwards."""
        out = []
        p = self.parent[v]
        while p is not None:
            out.append(p)
            p = self.parent[p]
        return out[::-1]

    def node_depth(self, v: int) -> int:
        return len(self.ancestors(v)) + 1

    @property
    def depth(self) -> int:
        return max((self.node_depth(v) for v in self.parent), default=0)

    def __hash__(self):
        return hash((self.root, tuple(sorted(self.parent.items()))))


@dataclass
class ValidationReport:
    ok: bool
    violations: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


# ---------------------------------------------------------------------------
# validators


def _check_tree(num_nodes: int, edges) -> None:
    if num_nodes == 0:
        raise StructureError("decomposition has no bags")
    if len(edges) != num_nodes - 1:
        raise StructureError(f"{len(edges)} tree edges for {num_nodes} bags; a tree needs {num_nodes - 1}")
    adj = defaultdict(list)
    for a, b in edges:
        if not (0 <= a < num_nodes and 0 <= b < num_nodes) or a == b:
            raise StructureError(f"bad tree edge {(a, b)}")
        adj[a].append(b)
        adj[b].append(a)
    seen = {0}
    stack = [0]
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    if len(seen) != num_nodes:
        raise StructureError("tree edges do not connect all bags")


def validate_tree_decomposition(H: Graph, T: TreeDecomposition) -> ValidationReport:
    """Check edge coverage and per-vertex subtree connectivity.

    Raises ``StructureError`` when the tree edges do not form a tree or a bag
    mentions a vertex outside ``1..k``.
    """
    _check_tree(len(T.bags), T.tree_edges)
    for t, bag in enumerate(T.bags):
        bad = [v for v in bag if not 1 <= v <= H.n]
        if bad:
            raise StructureError(f"bag {t} contains vertices {bad} outside 1..{H.n}")
    violations = []
    for i, j in sorted(H.edges):
        if not any(i in b and j in b for b in T.bags):
            violations.append(f"edge {i}{j} uncovered")
    adj = defaultdict(list)
    for a, b in T.tree_edges:
        adj[a].append(b)
        adj[b].append(a)
    for v in H.vertices():
        holders = {t for t, b in enumerate(T.bags) if v in b}
        if not holders:
            violations.append(f"vertex {v} in no bag")
            continue
        start = min(holders)
        seen = {start}
        stack = [start]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y in holders and y not in seen:
                    seen.add(y)
                    stack.append(y)
        if seen != holders:
            violations.append(f"bags containing vertex {v} are not connected")
    return ValidationReport(not violations, violations)


def validate_path_decomposition(H: Graph, P: PathDecomposition) -> ValidationReport:
    return validate_tree_decomposition(H, P.as_tree())


def validate_elimination_tree(H: Graph, T: EliminationTree) -> ValidationReport:
    """True iff ``T`` is a rooted tree on V(H) with every edge ancestor-descendant.

    Raises ``StructureError`` if the labelling is not a bijection onto V(H) or
    the parent pointers do not form a single rooted tree.
    """
    if sorted(T.parent) != list(H.vertices()):
        raise StructureError("elimination tree labels are not a bijection onto V(H)")
    if T.root not in T.parent or T.parent[T.root] is not None:
        raise StructureError("root must be a vertex with no parent")
    roots = [v for v, p in T.parent.items() if p is None]
    if roots != [T.root]:
        raise StructureError(f"expected a single root, found {roots}")
    for v, p in T.parent.items():
        if p is not None and p not in T.parent:
            raise StructureError(f"parent {p} of {v} is not a vertex")
    # every vertex must reach the root without cycling
    for v in T.parent:
        seen = set()
        x = v
        while x is not None:
            if x in seen:
                raise StructureError(f"parent pointers cycle through {x}")
            seen.add(x)
            x = T.parent[x]
    violations = []
    anc = {v: set(T.ancestors(v)) for v in T.parent}
    for i, j in sorted(H.edges):
        if i not in anc[j] and j not in anc[i]:
            violations.append(f"edge {i}{j} joins incomparable vertices")
    return ValidationReport(not violations, violations)


# ---------------------------------------------------------------------------
# treewidth


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _reach_outside(adj: list[int], S: int, v: int) -> int:
    """Vertices outside S + {v} reachable from v through paths inside S."""
    visited = 1 << v
    frontier = 1 << v
    out = 0
    while frontier:
        nxt = 0
        for x in _bits(frontier):
            nb = adj[x] & ~visited
            visited |= nb
            nxt |= nb & S
            out |= nb & ~S
        frontier = nxt
    return out


def _check_size(H: Graph):
    if H.n > MAX_PATTERN_SIZE:
        raise ValueError(f"exact solvers support at most {MAX_PATTERN_SIZE} vertices")


def treewidth_exact(H: Graph) -> tuple[int, TreeDecomposition]:
    """Minimum width and a witness tree decomposition."""
    _check_size(H)
    k = H.n
    if k == 0:
        return -1, TreeDecomposition((frozenset(),), ())
    adj = H.adjacency_masks
    full = (1 << k) - 1
    best = [0] * (1 << k)
    choice = [0] * (1 << k)
    best[0] = -1
    for S in range(1, full + 1):
        b, c = None, -1
        for v in _bits(S):
            rest = S & ~(1 << v)
            q = bin(_reach_outside(adj, rest, v)).count("1")
            val = best[rest] if best[rest] > q else q
            if b is None or val < b:
                b, c = val, v
        best[S], choice[S] = b, c
    order = []
    S = full
    while S:
        v = choice[S]
        order.append(v)
        S &= ~(1 << v)
    order.reverse()
    return best[full], _decomposition_from_order(adj, order)


def _decomposition_from_order(adj: list[int], order: list[int]) -> TreeDecomposition:
    pos = {v: t for t, v in enumerate(order)}
    bags, nbrs = [], []
    S = 0
    for v in order:
        q = _reach_outside(adj, S, v)
        bags.append(frozenset([v + 1] + [u + 1 for u in _bits(q)]))
        nbrs.append(list(_bits(q)))
        S |= 1 << v
    edges = []
    for t, v in enumerate(order):
        if t == len(order) - 1:
            break
        if nbrs[t]:
            edges.append((t, min(pos[u] for u in nbrs[t])))
        else:
            edges.append((t, t + 1))
    return TreeDecomposition(tuple(bags), tuple(edges))


def elimination_order_width(H: Graph, order) -> int:
    """Width of the decomposition induced by eliminating vertices in ``order``."""
    adj = H.adjacency_masks
    S, w = 0, -1
    for v in order:
        q = _reach_outside(adj, S, v - 1)
        w = max(w, bin(q).count("1"))
        S |= 1 << (v - 1)
    return w


# ---------------------------------------------------------------------------
# pathwidth


def pathwidth_exact(H: Graph) -> tuple[int, PathDecomposition]:
    """Minimum width and a witness path decomposition.

    Graphs with at most 16 vertices use the vertex-separation DP; larger trees
    (up to 50 vertices) use the spine recursion in ``_tree_pathwidth``.
    """
    if H.n > MAX_PATTERN_SIZE:
        if H.is_tree() and H.n <= TREE_PATHWIDTH_LIMIT:
            return _tree_pathwidth(H)
        raise ValueError(
            f"pathwidth_exact supports {MAX_PATTERN_SIZE} vertices, or trees up to {TREE_PATHWIDTH_LIMIT}"
        )
    k = H.n
    if k == 0:
        return -1, PathDecomposition((frozenset(),))
    adj = H.adjacency_masks
    full = (1 << k) - 1
    best = [0] * (1 << k)
    choice = [0] * (1 << k)
    for S in range(1, full + 1):
        boundary = 0
        for u in _bits(S):
            if adj[u] & ~S:
                boundary += 1
        b, c = None, -1
        for v in _bits(S):
            val = best[S & ~(1 << v)]
            if b is None or val < b:
                b, c = val, v
        best[S] = max(b, boundary)
        choice[S] = c
    order = []
    S = full
    while S:
        v = choice[S]
        order.append(v)
        S &= ~(1 << v)
    order.reverse()
    bags = []
    prefix = 0
    for v in order:
        live = [u for u in _bits(prefix) if adj[u] & ~prefix]
        bags.append(frozenset([v + 1] + [u + 1 for u in live]))
        prefix |= 1 << v
    P = PathDecomposition(tuple(bags))
    return P.width, P


def vertex_separation(H: Graph, order) -> int:
    """Vertex separation number of a linear ordering (equals its path width)."""
    adj = H.adjacency
    placed: set[int] = set()
    worst = 0
    for v in order:
        placed.add(v)
        worst = max(worst, sum(1 for u in placed if not adj[u] <= placed))
    return worst


def _tree_pathwidth(T: Graph) -> tuple[int, PathDecomposition]:
    adj = T.adjacency

    def components(C: frozenset, removed: set) -> list[frozenset]:
        out, seen = [], set()
        for s in sorted(C):
            if s in removed or s in seen:
                continue
            comp, stack = {s}, [s]
            seen.add(s)
            while stack:
                x = stack.pop()
                for y in adj[x]:
                    if y in C and y not in removed and y not in seen:
                        seen.add(y)
                        comp.add(y)
                        stack.append(y)
            out.append(frozenset(comp))
        return out

    def tree_path(C: frozenset, a: int, b: int) -> list[int]:
        prev = {a: None}
        stack = [a]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y in C and y not in prev:
                    prev[y] = x
                    stack.append(y)
        out = [b]
        while out[-1] != a:
            out.append(prev[out[-1]])
        return out[::-1]

    @lru_cache(maxsize=None)
    def spine(C: frozenset, k: int):
        """A path in C whose removal leaves components of pathwidth <= k - 1."""
        if len(C) == 1:
            return (next(iter(C)),)
        if k == 0:
            return None
        leaves = sorted(v for v in C if len(adj[v] & C) <= 1)
        for x in range(len(leaves)):
            for y in range(x + 1, len(leaves)):
                P = tree_path(C, leaves[x], leaves[y])
                if all(spine(comp, k - 1) is not None for comp in components(C, set(P))):
                    return tuple(P)
        return None

    def build(C: frozenset, k: int) -> list[frozenset]:
        P = spine(C, k)
        if len(P) == 1 and len(C) == 1:
            return [frozenset(P)]
        onpath = set(P)
        comps = components(C, onpath)
        bags = []
        for t, p in enumerate(P):
            attached = [c for c in comps if adj[p] & c]
            for comp in attached:
                bags += [b | {p} for b in build(comp, k - 1)]
            if t + 1 < len(P):
                bags.append(frozenset((p, P[t + 1])))
            elif not attached and not bags:
                bags.append(frozenset((p,)))
        return bags

    V = frozenset(T.vertices())
    k = 0
    while spine(V, k) is None:
        k += 1
    P = PathDecomposition(tuple(build(V, k)))
    return P.width, P


# ---------------------------------------------------------------------------
# treedepth


def treedepth_exact(H: Graph) -> tuple[int, EliminationTree]:
    """Minimum depth and a witness elimination tree of a connected graph."""
    _check_size(H)
    if H.n == 0:
        raise ValueError("treedepth of the empty graph is undefined here")
    if not H.is_connected():
        raise DisconnectedPatternError(
            "treedepth_exact needs a connected graph; solve each component separately "
            "(the treedepth of a disjoint union is the maximum over components)"
        )
    adj = H.adjacency_masks

    def comps(S: int) -> list[int]:
        out = []
        while S:
            seed = S & -S
            comp = seed
            frontier = seed
            while frontier:
                nb = 0
                for x in _bits(frontier):
                    nb |= adj[x]
                nb &= S & ~comp
                comp |= nb
                frontier = nb
            out.append(comp)
            S &= ~comp
        return out

    memo: dict[int, tuple[int, int]] = {}

    def td(S: int) -> int:
        hit = memo.get(S)
        if hit is not None:
            return hit[0]
        if S & (S - 1) == 0:
            memo[S] = (1, S.bit_length() - 1)
            return 1
        best, arg = None, -1
        for v in _bits(S):
            val = 1 + max((td(c) for c in comps(S & ~(1 << v))), default=0)
            if best is None or val < best:
                best, arg = val, v
        memo[S] = (best, arg)
        return best

    full = (1 << H.n) - 1
    depth = td(full)
    parent: dict[int, int | None] = {}

    def build(S: int, par):
        td(S)
        v = memo[S][1]
        parent[v + 1] = par
        for c in comps(S & ~(1 << v)):
            build(c, v + 1)

    build(full, None)
    root = memo[full][1] + 1
    return depth, EliminationTree(parent, root)


# ---------------------------------------------------------------------------
# text formats


def format_tree_decomposition(T: TreeDecomposition | PathDecomposition) -> str:
    if isinstance(T, PathDecomposition):
        T = T.as_tree()
    lines = [f"td {len(T.bags)}"]
    for t, bag in enumerate(T.bags, start=1):
        lines.append(" ".join(["b", str(t)] + [str(v) for v in sorted(bag)]))
    for a, b in T.tree_edges:
        lines.append(f"t {a + 1} {b + 1}")
    return "\n".join(lines) + "\n"


def parse_tree_decomposition(text: str) -> TreeDecomposition:
    """Parse ``td`` / ``b`` / ``t`` lines; bag ids in the file are 1-based."""
    count = None
    bags: dict[int, frozenset] = {}
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            if parts[0] == "td" and len(parts) == 2:
                count = int(parts[1])
            elif parts[0] == "b" and len(parts) >= 2:
                bid = int(parts[1])
                if bid in bags:
                    raise FormatError(f"line {lineno}: duplicate bag {bid}")
                bags[bid] = frozenset(int(x) for x in parts[2:])
            elif parts[0] == "t" and len(parts) == 3:
                edges.append((int(parts[1]) - 1, int(parts[2]) - 1))
            else:
                raise FormatError(f"line {lineno}: unrecognized line {line!r}")
        except ValueError as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"line {lineno}: {exc}") from None
    if count is None:
        raise FormatError("missing 'td' header")
    if sorted(bags) != list(range(1, count + 1)):
        raise FormatError(f"expected bags 1..{count}")
    return TreeDecomposition(tuple(bags[t] for t in range(1, count + 1)), tuple(edges))


def path_from_tree(T: TreeDecomposition) -> PathDecomposition:
    """Read a path-shaped tree decomposition back as an ordered path."""
    n = len(T.bags)
    if n == 1:
        return PathDecomposition(T.bags)
    adj = defaultdict(list)
    for a, b in T.tree_edges:
        adj[a].append(b)
        adj[b].append(a)
    ends = [t for t in range(n) if len(adj[t]) == 1]
    if len(T.tree_edges) != n - 1 or len(ends) != 2 or any(len(adj[t]) > 2 for t in range(n)):
        raise StructureError("decomposition tree is not a path")
    order, prev, cur = [], None, min(ends)
    while cur is not None:
        order.append(cur)
        nxt = [y for y in adj[cur] if y != prev]
        prev, cur = cur, (nxt[0] if nxt else None)
    return PathDecomposition(tuple(T.bags[t] for t in order))


def format_elimination_tree(T: EliminationTree) -> str:
    lines = [f"et {T.root}"]
    for v, p in sorted(T.parent.items(), key=lambda kv: (kv[1] or 0, kv[0])):
        if p is not None:
            lines.append(f"c {p} {v}")
    return "\n".join(lines) + "\n"


def parse_elimination_tree(text: str) -> EliminationTree:
    root = None
    parent: dict[int, int | None] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            if parts[0] == "et" and len(parts) == 2:
                root = int(parts[1])
            elif parts[0] == "c" and len(parts) == 3:
                p, c = int(parts[1]), int(parts[2])
                if c in parent:
                    raise FormatError(f"line {lineno}: vertex {c} has two parents")
                parent[c] = p
            else:
                raise FormatError(f"line {lineno}: unrecognized line {line!r}")
        except ValueError as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"line {lineno}: {exc}") from None
    if root is None:
        raise FormatError("missing 'et' header")
    if root in parent:
        raise FormatError("root has a parent")
    parent[root] = None
    for p in list(parent.values()):
        if p is not None and p not in parent:
            raise FormatError(f"vertex {p} appears only as a parent")
    return EliminationTree(parent, root)
