"""Directed weighted firm-to-firm transition network and its core extraction."""

from __future__ import annotations

from collections import Counter, defaultdict
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from .records import EmploymentSpell, Month, TransitionRecord

FirmId = str
Edge = tuple[FirmId, FirmId]


class EmptyCoreError(ValueError):
    """Core extraction emptied the network; ``stage`` names the filter that did it."""

    def __init__(self, stage: str):
        self.stage = stage
        super().__init__(f"empty core: no firms survive the {stage} stage")


def _firm_key(firm) -> tuple[str, str]:
    # Total order over arbitrary id types so iteration never depends on hash order.
    return (type(firm).__name__, str(firm))


@dataclass(frozen=True)
class LaborFlowNetwork:
    """Directed graph of firms; edge weights sum fractional transition events.

    ``window`` is the half-open month interval [start, end) the transitions
    were drawn from. Instances are immutable; filters return new networks.
    """

    firms: frozenset
    edges: dict[Edge, float]
    window: tuple[Month, Month]

    @property
    def total_weight(self) -> float:
        return sum(self.edges.values())

    @property
    def n_firms(self) -> int:
        return len(self.firms)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def sorted_firms(self) -> list:
        return sorted(self.firms, key=_firm_key)

    def sorted_edges(self) -> list[tuple[Edge, float]]:
        return sorted(self.edges.items(), key=lambda kv: (_firm_key(kv[0][0]), _firm_key(kv[0][1])))

    def out_strength(self) -> dict:
        s: dict = defaultdict(float)
        for (i, _j), w in self.edges.items():
            s[i] += w
        return dict(s)

    def in_strength(self) -> dict:
        s: dict = defaultdict(float)
        for (_i, j), w in self.edges.items():
            s[j] += w
        return dict(s)

    def undirected_neighbors(self) -> dict:
        """Weight-agnostic undirected adjacency (distinct neighbors per firm)."""
        nbrs: dict = {f: set() for f in self.firms}
        for i, j in self.edges:
            nbrs[i].add(j)
            nbrs[j].add(i)
        return nbrs

    def subgraph(self, firms: Iterable) -> "LaborFlowNetwork":
        """Induced subnetwork keeping only edges internal to ``firms``."""
        keep = frozenset(firms)
        edges = {e: w for e, w in self.edges.items() if e[0] in keep and e[1] in keep}
        return LaborFlowNetwork(firms=keep, edges=edges, window=self.window)


def build_network(
    records: Sequence[TransitionRecord],
    window: tuple[Month, Month],
) -> LaborFlowNetwork:
    """Build the transition network from job-change records.

    A record is included iff its start month falls in the half-open window.
    Self-loops are dropped. When one member starts several distinct moves in
    the same month, that single event's unit weight is split 1/k over the k
    distinct edges. Weights are accumulated per split size and summed in
    sorted order, so the result is bit-identical under any record ordering.
    """
    start, end = window
    if not start < end:
        raise ValueError(f"empty window: [{start}, {end})")

    # (member, start_month) -> set of distinct non-loop edges
    events: dict[tuple[str, Month], set[Edge]] = defaultdict(set)
    for rec in records:
        if not (start <= rec.start_month < end):
            continue
        if rec.from_firm == rec.to_firm:
            continue
        events[(rec.member_id, rec.start_month)].add((rec.from_firm, rec.to_firm))

    per_edge_splits: dict[Edge, Counter] = defaultdict(Counter)
    for edge_set in events.values():
        k = len(edge_set)
        for edge in edge_set:
            per_edge_splits[edge][k] += 1

    edges: dict[Edge, float] = {}
    firms: set = set()
    for edge, splits in per_edge_splits.items():
        edges[edge] = sum(count / k for k, count in sorted(splits.items()))
        firms.update(edge)
    return LaborFlowNetwork(firms=frozenset(firms), edges=edges, window=window)


def extract_core(
    net: LaborFlowNetwork,
    min_weight: float = 2.0,
    core_k: int = 2,
) -> LaborFlowNetwork:
    """Three-step core filter: weight floor, k-core, largest weak component.

    Applied in order: (1) drop edges below ``min_weight``; (2) iteratively
    remove firms whose undirected degree falls below ``core_k``; (3) keep the
    largest weakly connected component. Raises EmptyCoreError naming the
    stage that emptied the network. The input is left unchanged.
    """
    edges = {e: w for e, w in net.edges.items() if w >= min_weight}
    firms = {f for e in edges for f in e}
    if not firms:
        raise EmptyCoreError("edge-weight filter")

    # k-core on the undirected, weight-agnostic projection
    nbrs: dict = {f: set() for f in firms}
    for i, j in edges:
        nbrs[i].add(j)
        nbrs[j].add(i)
    queue = [f for f in firms if len(nbrs[f]) < core_k]
    removed: set = set()
    while queue:
        f = queue.pop()
        if f in removed:
            continue
        removed.add(f)
        for g in nbrs[f]:
            if g in removed:
                continue
            nbrs[g].discard(f)
            if len(nbrs[g]) < core_k:
                queue.append(g)
    firms -= removed
    if not firms:
        raise EmptyCoreError(f"{core_k}-core filter")

    # largest weakly connected component (ties broken by canonical firm order)
    unvisited = set(firms)
    best: set = set()
    for seed_firm in sorted(firms, key=_firm_key):
        if seed_firm not in unvisited:
            continue
        component = {seed_firm}
        stack = [seed_firm]
        unvisited.discard(seed_firm)
        while stack:
            f = stack.pop()
            for g in nbrs[f]:
                if g in unvisited:
                    unvisited.discard(g)
                    component.add(g)
                    stack.append(g)
        if len(component) > len(best):
            best = component
    if not best:
        raise EmptyCoreError("largest-component filter")

    core_edges = {e: w for e, w in edges.items() if e[0] in best and e[1] in best}
    return LaborFlowNetwork(firms=frozenset(best), edges=core_edges, window=net.window)


def firm_size(spells: Sequence[EmploymentSpell], firm, t: Month) -> int:
    """Number of distinct members with a spell at ``firm`` covering month ``t``."""
    members = {s.member_id for s in spells if s.firm == firm and s.covers(t)}
    return len(members)
