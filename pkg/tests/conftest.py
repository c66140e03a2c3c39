"""Shared builders and independent oracle implementations for the test suite."""

from __future__ import annotations

import laborflow as lf
from laborflow.records import Month

WINDOW = (Month(2000, 1), Month(2001, 1))


def make_net(edges, window=WINDOW) -> lf.LaborFlowNetwork:
    """Network straight from (from, to, weight) triples, bypassing record ingest."""
    firms: set = set()
    ed: dict = {}
    for a, b, w in edges:
        ed[(a, b)] = ed.get((a, b), 0.0) + float(w)
        firms.update((a, b))
    return lf.LaborFlowNetwork(firms=frozenset(firms), edges=ed, window=window)


def naive_modularity(net, assignment, symmetrize=False) -> float:
    """O(n^2) evaluation straight from the definition; the oracle route."""
    firms = sorted(net.firms, key=str)
    m = sum(net.edges.values())
    if m <= 0:
        return 0.0
    s_out = {f: 0.0 for f in firms}
    s_in = {f: 0.0 for f in firms}
    for (i, j), w in net.edges.items():
        s_out[i] += w
        s_in[j] += w
    if symmetrize:
        k = {f: s_out[f] + s_in[f] for f in firms}
        total = 0.0
        for i in firms:
            for j in firms:
                if assignment[i] == assignment[j]:
                    a_sym = net.edges.get((i, j), 0.0) + net.edges.get((j, i), 0.0)
                    total += a_sym - k[i] * k[j] / (2 * m)
        return total / (2 * m)
    total = 0.0
    for i in firms:
        for j in firms:
            if assignment[i] == assignment[j]:
                total += net.edges.get((i, j), 0.0) - s_out[i] * s_in[j] / m
    return total / m


def all_partitions(items):
    """Every set partition of ``items`` (lists of lists)."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in all_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1 :]
        yield [[first]] + part


def best_partition_q(net) -> float:
    """Exhaustive-enumeration optimum of directed modularity (n <= 8)."""
    firms = sorted(net.firms, key=str)
    best = float("-inf")
    for part in all_partitions(firms):
        assignment = {f: k for k, group in enumerate(part) for f in group}
        best = max(best, naive_modularity(net, assignment))
    return best


def directed_clique(prefix: str, n: int, weight: float = 1.0):
    return [
        (f"{prefix}{i}", f"{prefix}{j}", weight)
        for i in range(n)
        for j in range(n)
        if i != j
    ]


def two_clique_bridge(n_left: int, n_right: int):
    """Two directed cliques joined by one bridge edge; optimum is the cliques."""
    edges = directed_clique("L", n_left) + directed_clique("R", n_right)
    edges.append(("L0", "R0", 1.0))
    return edges
