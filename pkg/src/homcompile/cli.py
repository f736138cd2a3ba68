"""Command-line front end.

    homcompile width   <pattern> [--out-dir DIR]
    homcompile compile <pattern> --model M --n N [--poly hom|coliso] [-o FILE]
    homcompile eval    <circuit> <host> [--exact | --mod P]
    homcompile count   <pattern> <host> --what hom|sub|induced [--mode MODE]
    homcompile detect  <pattern> <host> [--rounds R] [--seed S]
    homcompile analyze <pattern> --task extract|census|separating|matching --model M --n N
    homcompile bench   <pattern> --model M --n a,b,c

Patterns and hosts are graph files; ``family:param`` (e.g. ``path:7``) is
accepted wherever a graph file is expected.  Exit codes: 0 ok, 1 usage,
2 bad input, 3 resource guard, 4 internal consistency failure.
"""
from __future__ import annotations

import argparse
import os
import sys

from .analysis import (
    addition_gate_matching,
    census_witness,
    extract_elimtree,
    extract_pathdec,
    extract_treedec,
    gate_census,
    max_separating_set,
    scaling_experiment,
)
from .circuit import Circuit, HostIndicator, find_parse_tree
from .compilers import MODELS, POLYS, compile_pattern, compile_with_report, hom_polynomial_table
from .counting import HOM_MODES, count_hom, count_induced, count_sub, detect_induced
from .errors import ConsistencyError, ResourceError
from .graphs import FAMILIES, HostGraph, PatternGraph, generate_family, parse_graph
from .width import (
    format_elimination_tree,
    format_tree_decomposition,
    pathwidth_exact,
    treedepth_exact,
    treewidth_exact,
    validate_elimination_tree,
    validate_path_decomposition,
    validate_tree_decomposition,
)

EXIT_OK, EXIT_USAGE, EXIT_FORMAT, EXIT_RESOURCE, EXIT_CONSISTENCY = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def load_graph(source: str, kind=PatternGraph):
    if not os.path.exists(source) and ":" in source:
        name, _, param = source.partition(":")
        if name in FAMILIES:
            return generate_family(name, int(param), host=kind is HostGraph)
    with open(source, encoding="utf-8") as fh:
        return parse_graph(fh.read(), kind)


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="homcompile", description="Compile graph patterns into arithmetic circuits.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    w = sub.add_parser("width", help="exact treewidth, pathwidth, treedepth")
    w.add_argument("pattern")
    w.add_argument("--out-dir", help="write tw.td, pw.td and td.et certificates here")

    c = sub.add_parser("compile", help="compile a pattern to a circuit")
    c.add_argument("pattern")
    c.add_argument("--model", choices=MODELS, required=True)
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--poly", choices=POLYS, default="hom")
    c.add_argument("-o", "--output", help="write the circuit here and print the report")

    e = sub.add_parser("eval", help="evaluate a circuit on a host graph")
    e.add_argument("circuit")
    e.add_argument("host")
    g = e.add_mutually_exclusive_group()
    g.add_argument("--exact", action="store_true")
    g.add_argument("--mod", type=int)

    n = sub.add_parser("count", help="count hom / sub / induced copies")
    n.add_argument("pattern")
    n.add_argument("host")
    n.add_argument("--what", choices=("hom", "sub", "induced"), required=True)
    n.add_argument("--mode", choices=HOM_MODES, default="circuit")

    d = sub.add_parser("detect", help="randomized induced-subgraph detection")
    d.add_argument("pattern")
    d.add_argument("host")
    d.add_argument("--rounds", type=int, default=64)
    d.add_argument("--seed", type=int, default=0)

    a = sub.add_parser("analyze", help="lower-bound witnesses on compiled ColIso objects")
    a.add_argument("pattern")
    a.add_argument("--task", choices=("extract", "census", "separating", "matching"), required=True)
    a.add_argument("--model", choices=MODELS, default="circuit")
    a.add_argument("--n", type=int, default=2)
    a.add_argument("--circuit", help="analyze this circuit file instead of compiling")

    b = sub.add_parser("bench", help="size scaling table")
    b.add_argument("pattern")
    b.add_argument("--model", choices=MODELS, required=True)
    b.add_argument("--n", type=_int_list, required=True)
    b.add_argument("--poly", choices=POLYS, default="hom")
    return p


# ---------------------------------------------------------------------------
# subcommands


def cmd_width(args, out):
    H = load_graph(args.pattern)
    tw, T = treewidth_exact(H)
    pw, P = pathwidth_exact(H)
    td, E = treedepth_exact(H)
    out.write(f"tw={tw} pw={pw} td={td}\n")
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        for name, text in (("tw.td", format_tree_decomposition(T)), ("pw.td", format_tree_decomposition(P)),
                           ("td.et", format_elimination_tree(E))):
            with open(os.path.join(args.out_dir, name), "w", encoding="utf-8") as fh:
                fh.write(text)


def cmd_compile(args, out):
    H = load_graph(args.pattern)
    C, report = compile_with_report(H, args.model, args.n, args.poly)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(C.to_text())
        out.write("\n".join(report.lines()) + "\n")
    else:
        out.write(C.to_text())


def cmd_eval(args, out):
    with open(args.circuit, encoding="utf-8") as fh:
        C = Circuit.from_text(fh.read())
    G = load_graph(args.host, HostGraph)
    value = C.evaluate(HostIndicator(G), modulus=args.mod)
    out.write(f"{value}\n")


def cmd_count(args, out):
    H = load_graph(args.pattern)
    G = load_graph(args.host, HostGraph)
    if args.what == "hom":
        value = count_hom(H, G, args.mode)
    elif args.what == "sub":
        value = count_sub(H, G, args.mode)
    else:
        value = count_induced(H, G, args.mode)
    out.write(f"count={value}\n")


def cmd_detect(args, out):
    H = load_graph(args.pattern)
    G = load_graph(args.host, HostGraph)
    found = detect_induced(H, G, rounds=args.rounds, seed=args.seed)
    out.write(f"found={int(found)}\n")


def cmd_analyze(args, out):
    H = load_graph(args.pattern)
    if args.task == "separating":
        mons = sorted(hom_polynomial_table(H, args.n))
        res = max_separating_set(mons)
        out.write(f"monomials {len(mons)}\nsize {res.size}\nexact {int(res.exact)}\n")
        return
    if args.circuit:
        with open(args.circuit, encoding="utf-8") as fh:
            C = Circuit.from_text(fh.read())
    else:
        C = compile_pattern(H, args.model, args.n, "coliso")
    if args.task == "matching":
        rep = addition_gate_matching(C)
        out.write(f"matching {rep.matching}\nadd_gates {rep.add_gates}\ndeficiency {rep.deficiency}\n")
        return
    mons = sorted(C.expand())
    census = gate_census(C, mons) if args.task == "census" else None
    valid, worst, ok_bound = 0, 0, 0
    for m in mons:
        T = find_parse_tree(C, m)
        if args.model == "circuit":
            D = extract_treedec(C, T, H)
            good, measure = validate_tree_decomposition(H, D).ok, D.max_bag
            bound = args.n ** (H.n - measure)
        elif args.model == "abp":
            D = extract_pathdec(C, T, H)
            good, measure = validate_path_decomposition(H, D).ok, D.max_bag
            bound = args.n ** (H.n - measure)
        else:
            D = extract_elimtree(C, T, H)
            good, measure = validate_elimination_tree(H, D).ok, D.depth
            bound = args.n ** (H.n - measure)
        valid += good
        worst = max(worst, measure)
        if census is not None:
            _, cnt = census_witness(census, T)
            ok_bound += cnt <= bound
    out.write(f"monomials {len(mons)}\nvalid {valid}\n")
    out.write(f"{'max_depth' if args.model == 'formula' else 'max_bag'} {worst}\n")
    if census is not None:
        out.write(f"census_bound_met {ok_bound}\n")
        out.write("\n".join(census.lines()) + "\n")


def cmd_bench(args, out):
    H = load_graph(args.pattern)
    res = scaling_experiment(H, args.model, args.n, args.poly)
    out.write("\n".join(res.lines()) + "\n")


COMMANDS = {
    "width": cmd_width,
    "compile": cmd_compile,
    "eval": cmd_eval,
    "count": cmd_count,
    "detect": cmd_detect,
    "analyze": cmd_analyze,
    "bench": cmd_bench,
}


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        err.write(f"{exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    try:
        COMMANDS[args.command](args, out)
    except ResourceError as exc:
        err.write(f"resource: {exc}\n")
        return EXIT_RESOURCE
    except ConsistencyError as exc:
        err.write(f"consistency: {exc}\n")
        return EXIT_CONSISTENCY
    except (ValueError, OSError, KeyError) as exc:
        err.write(f"input: {exc}\n")
        return EXIT_FORMAT
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
