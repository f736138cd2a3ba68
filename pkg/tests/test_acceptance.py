"""Acceptance criteria, one test each; every test prints a PASS/FAIL line."""
import math
import random
import time

import pytest

from homcompile.analysis import (
    census_witness,
    extract_elimtree,
    extract_pathdec,
    extract_treedec,
    gate_census,
    is_separating_set,
    max_separating_set,
    scaling_experiment,
)
from homcompile.circuit import DEFAULT_PRIME, evaluate_formula_streaming, find_parse_tree
from homcompile.compilers import (
    coliso_polynomial_table,
    coliso_to_hom,
    compile_pattern,
    hom_polynomial_table,
    hom_to_coliso,
    polynomial_table,
)
from homcompile.counting import (
    clique_count_via_oracle,
    count_hom,
    count_hom_bruteforce,
    count_induced,
    count_induced_bruteforce,
    count_sub,
    count_sub_bruteforce,
    detect_induced,
    detect_induced_bruteforce,
)
from homcompile.graphs import clique, connected_graphs, cycle, path, random_graph, spider
from homcompile.width import (
    pathwidth_exact,
    treedepth_exact,
    treewidth_exact,
    validate_elimination_tree,
    validate_path_decomposition,
    validate_tree_decomposition,
)

MODELS = ("circuit", "abp", "formula")


def test_criterion_01_counting_equivalence(record_acceptance):
    start = time.perf_counter()
    patterns = [H for k in range(1, 6) for H in connected_graphs(k)]
    mismatches, checks = [], 0
    for index, H in enumerate(patterns):
        rng = random.Random(1000 + index)
        for _ in range(20):
            G = random_graph(rng.randint(5, 8), 0.5, rng)
            brute = count_hom_bruteforce(H, G)
            homs = [count_hom(H, G, mode) for mode in MODELS]
            sub = count_sub(H, G)
            ind = count_induced(H, G)
            checks += 1
            if homs != [brute] * 3 or sub != count_sub_bruteforce(H, G) or ind != count_induced_bruteforce(H, G):
                mismatches.append((H.sorted_edges(), G.sorted_edges()))
    elapsed = time.perf_counter() - start
    ok = not mismatches and elapsed < 120
    record_acceptance(1, ok, f"{len(patterns)} patterns x 20 hosts, {len(mismatches)} mismatches, {elapsed:.1f}s")
    assert ok, mismatches[:3]


def test_criterion_02_defining_polynomials(record_acceptance):
    start = time.perf_counter()
    bad, checks = [], 0
    for k in range(1, 5):
        for H in connected_graphs(k):
            for n in range(1, 4):
                for poly in ("hom", "coliso"):
                    expected = polynomial_table(H, n, poly)
                    for model in MODELS:
                        checks += 1
                        if compile_pattern(H, model, n, poly).expand() != expected:
                            bad.append((H.sorted_edges(), n, poly, model))
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 60
    record_acceptance(2, ok, f"{checks} expansions, {len(bad)} differ, {elapsed:.1f}s")
    assert ok, bad[:3]


def test_criterion_03_width_table(record_acceptance):
    start = time.perf_counter()
    failures = []
    for k in range(1, 7):
        if treewidth_exact(clique(k))[0] != k - 1:
            failures.append(f"tw(K{k})")
    for k in range(2, 16):
        if pathwidth_exact(path(k))[0] != 1:
            failures.append(f"pw(P{k})")
    for k in range(1, 16):
        if treedepth_exact(path(k))[0] != math.ceil(math.log2(k + 1)):
            failures.append(f"td(P{k})")
    C4 = cycle(4)
    if (treewidth_exact(C4)[0], pathwidth_exact(C4)[0], treedepth_exact(C4)[0]) != (2, 2, 3):
        failures.append("C4")
    for k in range(1, 7):
        for H in connected_graphs(k):
            tw, pw, td = treewidth_exact(H)[0], pathwidth_exact(H)[0], treedepth_exact(H)[0]
            if not tw <= pw <= td - 1:
                failures.append(f"order {H.sorted_edges()}")
            if H.m < k * (k - 1) // 2 and td > k - 1:
                failures.append(f"td non-clique {H.sorted_edges()}")
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 120
    record_acceptance(3, ok, f"{len(failures)} failures, {elapsed:.1f}s")
    assert ok, failures[:5]


SCALING = [
    ("C4", cycle(4), "circuit", 3),
    ("C4", cycle(4), "abp", 3),
    ("C4", cycle(4), "formula", 3),
    ("P7", path(7), "circuit", 2),
    ("P7", path(7), "formula", 3),
    ("spider(2)", spider(2), "circuit", 2),
    ("spider(2)", spider(2), "abp", 3),
]


def test_criterion_04_size_scaling(record_acceptance):
    start = time.perf_counter()
    parts, ok = [], True
    for name, H, model, target in SCALING:
        exp = scaling_experiment(H, model, [8, 16, 32]).exponent
        parts.append(f"{name}/{model}={exp:.2f}")
        ok &= abs(exp - target) <= 0.35
    elapsed = time.perf_counter() - start
    ok &= elapsed < 300
    record_acceptance(4, ok, " ".join(parts) + f", {elapsed:.1f}s")
    assert ok


def extractor_instances():
    for k in range(1, 5):
        for H in connected_graphs(k):
            yield H


def extract(model, C, T, H):
    if model == "circuit":
        D = extract_treedec(C, T, H)
        return validate_tree_decomposition(H, D).ok, D.max_bag
    if model == "abp":
        D = extract_pathdec(C, T, H)
        return validate_path_decomposition(H, D).ok, D.max_bag
    D = extract_elimtree(C, T, H)
    return validate_elimination_tree(H, D).ok, D.depth


def test_criterion_05_extractor_validity(record_acceptance):
    start = time.perf_counter()
    n, bad, total = 2, [], 0
    for H in extractor_instances():
        lower = {"circuit": treewidth_exact(H)[0] + 1, "abp": pathwidth_exact(H)[0] + 1, "formula": treedepth_exact(H)[0]}
        for model in MODELS:
            C = compile_pattern(H, model, n, "coliso")
            for m in C.expand():
                total += 1
                valid, measure = extract(model, C, find_parse_tree(C, m), H)
                if not valid or measure < lower[model]:
                    bad.append((H.sorted_edges(), model, m))
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 120
    record_acceptance(5, ok, f"{total} parse trees, {len(bad)} invalid, {elapsed:.1f}s")
    assert ok, bad[:3]


def test_criterion_06_census_bound(record_acceptance):
    start = time.perf_counter()
    n, bad, total = 2, [], 0
    for H in extractor_instances():
        k = H.n
        for model in MODELS:
            C = compile_pattern(H, model, n, "coliso")
            mons = list(C.expand())
            census = gate_census(C, mons)
            for m in mons:
                total += 1
                T = find_parse_tree(C, m)
                _, measure = extract(model, C, T, H)
                # max bag is t+1 (resp. p+1); depth is d
                bound = n ** (k - measure)
                if census_witness(census, T)[1] > bound:
                    bad.append((H.sorted_edges(), model, m))
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 180
    record_acceptance(6, ok, f"{total} parse trees, {len(bad)} over bound, {elapsed:.1f}s")
    assert ok, bad[:3]


def test_criterion_07_separating_sets(record_acceptance):
    start = time.perf_counter()
    parts, ok = [], True
    for H, name, ns, bound in [(path(3), "P3", (6, 9, 12), lambda n: n), (cycle(4), "C4", (4, 5), lambda n: n * n)]:
        for n in ns:
            poly = sorted(hom_polynomial_table(H, n))
            res = max_separating_set(poly)
            good = res.exact and res.size <= bound(n) and is_separating_set(poly, res.witness)
            ok &= good
            parts.append(f"{name}(n={n})={res.size}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 180
    record_acceptance(7, ok, " ".join(parts) + f", {elapsed:.1f}s")
    assert ok


def test_criterion_08_round_trip(record_acceptance):
    start = time.perf_counter()
    n, bad, worst = 2, [], 0.0
    for k in range(2, 4):
        for H in connected_graphs(k):
            coliso = coliso_polynomial_table(H, n)
            for model in MODELS:
                C = compile_pattern(H, model, H.n * n)
                D = hom_to_coliso(C, H, n)
                table = D.expand()
                if table != coliso or set(table.values()) != {1}:
                    bad.append((H.sorted_edges(), model, "hom_to_coliso"))
                back = coliso_to_hom(compile_pattern(H, model, n, "coliso"))
                if back.expand() != hom_polynomial_table(H, n):
                    bad.append((H.sorted_edges(), model, "coliso_to_hom"))
                ratio = D.size() / max(C.size(), 1)
                worst = max(worst, ratio / 3 ** H.m)
                if D.size() > 3 ** H.m * 10 * C.size():
                    bad.append((H.sorted_edges(), model, "blowup"))
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 60
    record_acceptance(8, ok, f"{len(bad)} failures, max size/(3^|E| original) = {worst:.3f}, {elapsed:.1f}s")
    assert ok, bad


def test_criterion_09_detection(record_acceptance):
    start = time.perf_counter()
    rng = random.Random(9)
    fp = fn = 0
    for t in range(200):
        H = [path(3), path(4), cycle(4)][t % 3]
        G = random_graph(rng.randint(4, 8), 0.5, rng)
        found = detect_induced(H, G, rounds=64, seed=t)
        truth = detect_induced_bruteforce(H, G)
        fp += found and not truth
        fn += truth and not found
    elapsed = time.perf_counter() - start
    ok = fp == 0 and fn == 0 and elapsed < 120
    record_acceptance(9, ok, f"200 instances, {fp} false positives, {fn} false negatives, {elapsed:.1f}s")
    assert ok


def test_criterion_10_clique_transfer(record_acceptance):
    start = time.perf_counter()
    bad = 0
    for k in (3, 4):
        rng = random.Random(100 + k)
        for _ in range(20):
            G = random_graph(rng.randint(k, 7), 0.5, rng)
            expected = count_sub_bruteforce(clique(k), G)
            for oracle in (count_induced_bruteforce, count_induced):
                bad += clique_count_via_oracle(k, G, oracle) != expected
    elapsed = time.perf_counter() - start
    ok = bad == 0 and elapsed < 60
    record_acceptance(10, ok, f"40 hosts x 2 oracles, {bad} mismatches, {elapsed:.1f}s")
    assert ok


def test_criterion_11_streaming(record_acceptance):
    start = time.perf_counter()
    F = compile_pattern(path(7), "formula", 16)
    rng = random.Random(11)
    assignment = {v: rng.randrange(DEFAULT_PRIME) for v in F.variables()}
    value, peak = evaluate_formula_streaming(F, assignment, modulus=DEFAULT_PRIME)
    expected = F.evaluate(assignment, modulus=DEFAULT_PRIME)
    elapsed = time.perf_counter() - start
    ok = value == expected and peak <= F.depth() + 2 and elapsed < 60
    record_acceptance(11, ok, f"size {F.size()}, depth {F.depth()}, peak {peak}, {elapsed:.1f}s")
    assert ok
