"""Compilers from pattern graphs to monotone circuits, skew circuits and formulas.

Two target polynomials over the complete host on ``[n]``:

* ``hom``: sum over homomorphisms ``phi: H -> K_n`` of prod_{ij in E(H)} x[phi(i),phi(j)]
* ``coliso``: sum over tuples ``(u_1..u_k)`` of prod_{ij in E(H)} x[(i,u_i),(j,u_j)]

Backends: decomposition DP over a tree decomposition (circuit), the same DP
over a path decomposition (skew circuit / ABP) and the recursive
elimination-tree formula.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .circuit import (
    Aux,
    Circuit,
    CircuitBuilder,
    ColoredEdge,
    HostEdge,
    Monomial,
    PolynomialTable,
    copy_into,
    partial_derivative,
    partial_derivative_formula,
    substitute,
)
from .errors import DisconnectedPatternError, StructureError
from .graphs import Graph, automorphism_count
from .width import (
    EliminationTree,
    PathDecomposition,
    TreeDecomposition,
    pathwidth_exact,
    treedepth_exact,
    treewidth_exact,
    validate_elimination_tree,
    validate_path_decomposition,
    validate_tree_decomposition,
)

MODELS = ("circuit", "abp", "formula")
POLYS = ("hom", "coliso")


@dataclass(frozen=True)
class CompileTarget:
    model: str
    polynomial: str
    n: int

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        if self.polynomial not in POLYS:
            raise ValueError(f"unknown polynomial {self.polynomial!r}")
        if self.n < 1:
            raise ValueError("host size n must be at least 1")


def _edge_var(poly: str, i: int, a: int, j: int, b: int):
    """Variable for pattern edge ij with i -> a, j -> b; None when the term dies."""
    if poly == "coliso":
        return ColoredEdge(i, a, j, b)
    if a == b:
        return None
    return HostEdge(a, b)


def _check_poly(poly, n):
    if poly not in POLYS:
        raise ValueError(f"unknown polynomial {poly!r}")
    if n < 1:
        raise ValueError("host size n must be at least 1")


# ---------------------------------------------------------------------------
# decomposition DP


def _dp(H: Graph, T: TreeDecomposition, n: int, poly: str, builder: CircuitBuilder) -> int:
    """Bottom-up DP over ``T`` rooted at bag 0.

    A table maps assignments of a bag (in sorted vertex order) to gates; a
    missing key means the zero polynomial.  On every child-to-parent step the
    child's private vertices are forgotten in ascending order and the edges
    from each forgotten vertex to the remaining bag are multiplied in.
    """
    adj = {v: set() for v in range(len(T.bags))}
    for a, b in T.tree_edges:
        adj[a].add(b)
        adj[b].add(a)
    parent = {0: None}
    order = [0]
    for t in order:
        for c in sorted(adj[t]):
            if c not in parent:
                parent[c] = t
                order.append(c)
    children = {t: [] for t in order}
    for t in order[1:]:
        children[parent[t]].append(t)

    one = builder.one()
    tables: dict[int, tuple] = {}

    def forget(table, verts, v):
        pos = verts.index(v)
        rest = verts[:pos] + verts[pos + 1:]
        nbrs = [(q, y) for q, y in enumerate(rest) if H.has_edge(v, y)]
        groups: dict[tuple, list] = {}
        for key, g in table.items():
            a = key[pos]
            akey = key[:pos] + key[pos + 1:]
            factors = [g]
            for q, y in nbrs:
                var = _edge_var(poly, v, a, y, akey[q])
                if var is None:
                    break
                factors.append(builder.input(var))
            else:
                groups.setdefault(akey, []).append(builder.chain_product(factors))
        return {k: builder.sum(ts) for k, ts in groups.items()}, rest

    for t in reversed(order):
        verts = tuple(sorted(T.bags[t]))
        parts = []
        for c in children[t]:
            table, cverts = tables.pop(c)
            for v in sorted(set(cverts) - T.bags[t]):
                table, cverts = forget(table, cverts, v)
            parts.append((table, [verts.index(v) for v in cverts]))
        table = {}
        for key in itertools.product(range(1, n + 1), repeat=len(verts)):
            g = one
            for ctable, idx in parts:
                h = ctable.get(tuple(key[q] for q in idx))
                if h is None:
                    break
                g = builder.mul(g, h)
            else:
                table[key] = g
        tables[t] = (table, verts)

    table, verts = tables.pop(0)
    for v in verts:
        table, verts = forget(table, verts, v)
    return table.get((), builder.zero())


def compile_circuit(H: Graph, T: TreeDecomposition, n: int, poly: str = "hom") -> Circuit:
    """Monotone circuit of size O(n^(width(T)+1)) for Hom or ColIso of ``H``."""
    _check_poly(poly, n)
    report = validate_tree_decomposition(H, T)
    if not report:
        raise StructureError("invalid tree decomposition: " + "; ".join(report.violations))
    builder = CircuitBuilder(share=True)
    out = _dp(H, T, n, poly, builder)
    return builder.build(out)


def compile_abp(H: Graph, P: PathDecomposition, n: int, poly: str = "hom") -> Circuit:
    """Skew monotone circuit (an ABP) of size O(n^(width(P)+1))."""
    _check_poly(poly, n)
    report = validate_path_decomposition(H, P)
    if not report:
        raise StructureError("invalid path decomposition: " + "; ".join(report.violations))
    builder = CircuitBuilder(share=True)
    out = _dp(H, P.as_tree(), n, poly, builder)
    C = builder.build(out)
    assert C.validate("skew"), "path DP produced a non-skew multiplication"
    return C


def compile_formula(H: Graph, T: EliminationTree, n: int, poly: str = "hom") -> Circuit:
    """Monotone formula of size O(n^depth(T)) following the elimination tree.

    f_i^ctx = sum_u (prod of edge variables to H-neighbouring ancestors)
              * prod_{children l} f_l^(ctx + (i,u))
    """
    _check_poly(poly, n)
    report = validate_elimination_tree(H, T)
    if not report:
        raise StructureError("invalid elimination tree: " + "; ".join(report.violations))
    children = T.children()
    builder = CircuitBuilder(share=False)

    def f(i: int, ctx: tuple) -> int:
        terms = []
        for u in range(1, n + 1):
            factors = []
            for j, uj in ctx:
                if H.has_edge(i, j):
                    var = _edge_var(poly, j, uj, i, u)
                    if var is None:
                        break
                    factors.append(builder.input(var))
            else:
                sub = ctx + ((i, u),)
                factors.extend(f(c, sub) for c in children.get(i, []))
                terms.append(builder.product(factors))
        return builder.sum(terms)

    return builder.build(f(T.root, ()))


# ---------------------------------------------------------------------------
# Hom <-> ColIso


def host_index(i: int, u: int, n: int) -> int:
    """Vertex (i, u) of [k] x [n] as a host index in 1..k*n."""
    return (i - 1) * n + u


def hom_to_coliso(C: Circuit, H: Graph, n: int) -> Circuit:
    """Turn a Hom circuit over host ``[k] x [n]`` into a ColIso circuit for ``H``.

    Each host edge between colour classes i and j is replaced by
    x[(i,u),(j,v)] * w[i,j] (or 0 when ij is not a pattern edge); the result
    is differentiated once by every w_e, and each w_e is zeroed right after
    its derivative.  Surviving terms come from automorphisms of ``H``, so a
    final factor 1/aut(H) normalizes every coefficient to one.
    """
    k = H.n

    def rule(var):
        if not isinstance(var, HostEdge):
            raise ValueError(f"expected a Hom circuit, found variable {var!r}")
        if var.v > k * n:
            raise ValueError(f"host vertex {var.v} outside [k]x[n] = 1..{k * n}")
        i, u = divmod(var.u - 1, n)
        j, v = divmod(var.v - 1, n)
        i, u, j, v = i + 1, u + 1, j + 1, v + 1
        if i == j or not H.has_edge(i, j):
            return 0
        return (ColoredEdge(i, u, j, v), Aux(i, j))

    formula = C.is_formula()
    D = substitute(C, rule)
    for i, j in H.sorted_edges():
        w = Aux(i, j)
        D = partial_derivative_formula(D, w) if formula else partial_derivative(D, w)
        D = substitute(D, {w: 0})
    builder = CircuitBuilder(share=not formula)
    ids = copy_into(builder, D)
    out = builder.mul(ids[D.output], builder.const(Fraction(1, automorphism_count(H))))
    return builder.build(out)


def coliso_to_hom(C: Circuit) -> Circuit:
    """Replace x[(i,u),(j,v)] by x[u,v] (or 0 when u = v); keeps every circuit flavour."""

    def rule(var):
        if isinstance(var, ColoredEdge):
            return 0 if var.u == var.v else HostEdge(var.u, var.v)
        return None

    return substitute(C, rule)


# ---------------------------------------------------------------------------
# definition-level oracles


def hom_polynomial_table(H: Graph, n: int) -> PolynomialTable:
    """Hom polynomial by enumerating all n^k vertex maps."""
    edges = H.sorted_edges()
    out = PolynomialTable()
    for phi in itertools.product(range(1, n + 1), repeat=H.n):
        if any(phi[i - 1] == phi[j - 1] for i, j in edges):
            continue
        out.add_term(Monomial.of(*(HostEdge(phi[i - 1], phi[j - 1]) for i, j in edges)), 1)
    return out


def coliso_polynomial_table(H: Graph, n: int) -> PolynomialTable:
    """ColIso polynomial by enumerating all n^k colour-class tuples."""
    edges = H.sorted_edges()
    out = PolynomialTable()
    for u in itertools.product(range(1, n + 1), repeat=H.n):
        out.add_term(Monomial.of(*(ColoredEdge(i, u[i - 1], j, u[j - 1]) for i, j in edges)), 1)
    return out


def polynomial_table(H: Graph, n: int, poly: str) -> PolynomialTable:
    return hom_polynomial_table(H, n) if poly == "hom" else coliso_polynomial_table(H, n)


# ---------------------------------------------------------------------------
# convenience front end


@dataclass
class CompileReport:
    model: str
    poly: str
    n: int
    size: int
    depth: int
    width_name: str
    width: int
    bound: str

    def lines(self) -> list[str]:
        return [
            f"model {self.model}",
            f"poly {self.poly}",
            f"n {self.n}",
            f"size {self.size}",
            f"depth {self.depth}",
            f"{self.width_name} {self.width}",
            f"bound {self.bound}",
        ]


def optimal_certificate(H: Graph, model: str):
    """(width value, certificate) for the backend's governing parameter."""
    if model == "circuit":
        return treewidth_exact(H)
    if model == "abp":
        return pathwidth_exact(H)
    if model == "formula":
        return treedepth_exact(H)
    raise ValueError(f"unknown model {model!r}")


def compile_pattern(H: Graph, model: str, n: int, poly: str = "hom", certificate=None) -> Circuit:
    """Compile ``H`` with an optimal (or supplied) certificate."""
    if not H.is_connected():
        raise DisconnectedPatternError("compilers need a connected pattern")
    if certificate is None:
        _, certificate = optimal_certificate(H, model)
    if model == "circuit":
        return compile_circuit(H, certificate, n, poly)
    if model == "abp":
        return compile_abp(H, certificate, n, poly)
    if model == "formula":
        return compile_formula(H, certificate, n, poly)
    raise ValueError(f"unknown model {model!r}")


def compile_with_report(H: Graph, model: str, n: int, poly: str = "hom"):
    width, cert = optimal_certificate(H, model)
    C = compile_pattern(H, model, n, poly, cert)
    if model == "circuit":
        name, bound = "tw", f"n^{width + 1}"
    elif model == "abp":
        name, bound = "pw", f"n^{width + 1}"
    else:
        name, bound = "td", f"n^{width}"
    return C, CompileReport(model, poly, n, C.size(), C.depth(), name, width, bound)


def fitted_exponent(ns, sizes) -> float:
    """log(size2/size1) / log(n2/n1) over the last two points."""
    (n1, s1), (n2, s2) = list(zip(ns, sizes))[-2:]
    return math.log(s2 / s1) / math.log(n2 / n1)
