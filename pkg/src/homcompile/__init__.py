"""Compile graph patterns into monotone circuits, ABPs and formulas, and use
them to count homomorphisms, subgraphs and induced subgraphs."""

from .circuit import (
    Aux,
    Circuit,
    CircuitBuilder,
    ColoredEdge,
    HostEdge,
    HostIndicator,
    Monomial,
    ParseNode,
    PolynomialTable,
    evaluate_formula_streaming,
    find_parse_tree,
    partial_derivative,
    partial_derivative_formula,
    substitute,
)
from .compilers import (
    coliso_polynomial_table,
    coliso_to_hom,
    compile_abp,
    compile_circuit,
    compile_formula,
    compile_pattern,
    hom_polynomial_table,
    hom_to_coliso,
)
from .counting import (
    clique_count_via_oracle,
    count_hom,
    count_induced,
    count_induced_mod_p,
    count_sub,
    detect_induced,
    induced_expansion,
)
from .graphs import HostGraph, PatternGraph, generate_family
from .width import pathwidth_exact, treedepth_exact, treewidth_exact

__version__ = "0.1.0"
