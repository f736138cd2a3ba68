import random

import pytest

from homcompile.graphs import HostGraph, random_graph

ACCEPTANCE_LINES = []


def random_hosts(count, seed, n_range=(4, 8), p=0.5):
    rng = random.Random(seed)
    return [random_graph(rng.randint(*n_range), p, rng) for _ in range(count)]


def host(n, edges):
    return HostGraph(n, frozenset(edges))


@pytest.fixture
def record_acceptance():
    def record(number, ok, detail=""):
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip()
        print(line)
        ACCEPTANCE_LINES.append(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
