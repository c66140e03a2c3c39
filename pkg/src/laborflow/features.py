"""Cluster feature vectors, entropy-reduction diagnostics, and the shuffle null model."""

from __future__ import annotations

import math
import random
from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

from .hierarchy import CommunityTree
from .network import _firm_key
from .util import derive_seed


@dataclass(frozen=True)
class FeatureVector:
    """Distribution of a population over a label set.

    ``population`` counts the contributing observations after dropping
    missing labels; an empty population yields the empty (zero) vector.
    """

    labels: tuple
    probs: tuple
    population: int

    @property
    def is_empty(self) -> bool:
        return self.population == 0

    def as_dict(self) -> dict:
        return dict(zip(self.labels, self.probs))

    @classmethod
    def from_counts(cls, counts: Mapping) -> "FeatureVector":
        total = sum(counts.values())
        if total <= 0:
            return cls(labels=(), probs=(), population=0)
        labels = tuple(sorted(counts))
        return cls(
            labels=labels,
            probs=tuple(counts[lab] / total for lab in labels),
            population=total,
        )


def _clean(labels: Iterable) -> Counter:
    return Counter(lab for lab in labels if lab is not None and lab != "")


def firm_feature(member_labels: Iterable) -> FeatureVector:
    """Empirical label distribution of one firm's members; missing labels excluded."""
    return FeatureVector.from_counts(_clean(member_labels))


def cluster_feature(cluster_firms: Iterable, firm_counts: Mapping) -> FeatureVector:
    """Pooled, employee-weighted label distribution over a set of firms."""
    pooled: Counter = Counter()
    for firm in cluster_firms:
        pooled.update(firm_counts.get(firm, ()))
    return FeatureVector.from_counts(pooled)


def entropy(v: FeatureVector) -> float:
    """Shannon entropy in nats, with 0*log(0) = 0."""
    if v.is_empty:
        raise ValueError("entropy of an empty feature vector is undefined")
    return -sum(p * math.log(p) for p in v.probs if p > 0.0)


def _counter_entropy(counts: Counter) -> float:
    total = sum(counts.values())
    return math.log(total) - sum(c * math.log(c) for c in counts.values() if c > 0) / total


def entropy_reduction(cluster_entropy: float, global_entropy: float) -> float:
    """Fractional entropy drop (H_V - H_C) / H_V; 1 means a pure cluster."""
    if global_entropy <= 0.0:
        raise ValueError("degenerate global entropy: the whole population has one label")
    return (global_entropy - cluster_entropy) / global_entropy


def firm_label_counts(firm_members: Mapping, member_attr: Mapping) -> dict:
    """Per-firm Counter of member attribute labels; unreported attributes dropped.

    Members are visited in sorted order so Counter construction (and every
    float accumulation order downstream) is independent of set iteration
    order, keeping pipeline outputs byte-stable across processes.
    """
    return {
        firm: _clean(member_attr.get(m) for m in sorted(members, key=str))
        for firm, members in firm_members.items()
    }


def canonical_firm_label(counts: Counter):
    """A firm's single label: most frequent, ties broken lexicographically."""
    if not counts:
        return None
    return min(counts, key=lambda lab: (-counts[lab], str(lab)))


def as_firm_unit(firm_counts: Mapping) -> dict:
    """Collapse each firm to one count of its canonical label (firm-unit mode)."""
    out = {}
    for firm, counts in firm_counts.items():
        lab = canonical_firm_label(counts)
        out[firm] = Counter({lab: 1}) if lab is not None else Counter()
    return out


def weighted_mean_se(values: Sequence[float], weights: Sequence[float]) -> tuple[float, float]:
    """Weighted mean with Cochran's ratio-estimator standard error.

    Implements the Gatz-Smith (1995) approximation; their three-term
    expression reduces algebraically to

        SE = sqrt( n/(n-1) * sum_i w_i^2 (x_i - xbar_w)^2 ) / sum_i w_i

    which is computed here. A single observation has SE 0 by convention.
    """
    if len(values) != len(weights) or not values:
        raise ValueError("values and weights must be non-empty and equal-length")
    sw = float(sum(weights))
    if sw <= 0:
        raise ValueError("total weight must be positive")
    mean = sum(w * x for w, x in zip(weights, values)) / sw
    n = len(values)
    if n < 2:
        return mean, 0.0
    se = math.sqrt(n / (n - 1) * sum((w * (x - mean)) ** 2 for w, x in zip(weights, values))) / sw
    return mean, se


@dataclass(frozen=True)
class LevelDiagnostics:
    """Per-level homogeneity summary: rho, weighted mean reductions, SEs, deltas.

    ``delta_*`` stay None until the shuffle null has been run.
    """

    level: int
    rho: float
    mean_reduction_industry: float
    mean_reduction_region: float
    se_industry: float
    se_region: float
    delta_industry: float | None = None
    delta_region: float | None = None


@dataclass(frozen=True)
class NullLevelStats:
    level: int
    n_rep: int
    mean_industry: float
    sd_industry: float
    mean_region: float
    sd_region: float


def _node_reduction(node_firms, firm_counts, global_entropy) -> float | None:
    pooled: Counter = Counter()
    for f in node_firms:
        pooled.update(firm_counts.get(f, ()))
    if not pooled:
        return None
    return entropy_reduction(_counter_entropy(pooled), global_entropy)


def _global_entropy(firm_counts: Mapping, firms) -> float:
    pooled: Counter = Counter()
    for f in firms:
        pooled.update(firm_counts.get(f, ()))
    if not pooled:
        raise ValueError("no labelled members anywhere in the tree")
    return _counter_entropy(pooled)


def level_diagnostics(
    tree: CommunityTree,
    industry_counts: Mapping,
    region_counts: Mapping,
    k: int,
    unit: str = "employees",
) -> LevelDiagnostics:
    """Observed rho_k, weighted mean reductions and Cochran SEs at level k.

    Communities with no labelled population are skipped. ``unit="firms"``
    scores each firm as one count of its canonical label instead of pooling
    employees.
    """
    ind, reg = _unit_counts(industry_counts, region_counts, unit)
    nodes = tree.level_nodes(k)
    if not nodes:
        raise ValueError(f"level {k} has no communities")
    hv_ind = _global_entropy(ind, tree.root.firms)
    hv_reg = _global_entropy(reg, tree.root.firms)

    d_ind, d_reg, weights = [], [], []
    greater = 0
    for node in nodes:
        di = _node_reduction(node.firms, ind, hv_ind)
        dg = _node_reduction(node.firms, reg, hv_reg)
        if di is None or dg is None:
            continue
        d_ind.append(di)
        d_reg.append(dg)
        weights.append(float(len(node.firms)))
        if di > dg:
            greater += 1
    if not weights:
        raise ValueError(f"level {k} has no communities with labelled members")
    mean_i, se_i = weighted_mean_se(d_ind, weights)
    mean_g, se_g = weighted_mean_se(d_reg, weights)
    return LevelDiagnostics(
        level=k,
        rho=greater / len(weights),
        mean_reduction_industry=mean_i,
        mean_reduction_region=mean_g,
        se_industry=se_i,
        se_region=se_g,
    )


def _unit_counts(industry_counts, region_counts, unit):
    if unit == "employees":
        return industry_counts, region_counts
    if unit == "firms":
        return as_firm_unit(industry_counts), as_firm_unit(region_counts)
    raise ValueError(f"unknown unit {unit!r} (expected 'employees' or 'firms')")


def _levels_index(tree: CommunityTree, firms: Sequence) -> list[list[tuple[int, ...]]]:
    pos = {f: i for i, f in enumerate(firms)}
    out = []
    for k in range(tree.depth + 1):
        out.append([tuple(pos[f] for f in node.firms) for node in tree.level_nodes(k)])
    return out


def _null_mean(level_idx, perm, firms, counts, hv) -> float | None:
    ds, ws = [], []
    for idx_tuple in level_idx:
        pooled: Counter = Counter()
        for i in idx_tuple:
            pooled.update(counts.get(firms[perm[i]], ()))
        if not pooled:
            continue
        ds.append(entropy_reduction(_counter_entropy(pooled), hv))
        ws.append(float(len(idx_tuple)))
    if not ws:
        return None
    return sum(w * d for w, d in zip(ws, ds)) / sum(ws)


def _null_chunk(args) -> list[list[tuple[float | None, float | None]]]:
    firms, ind, reg, hv_ind, hv_reg, levels_idx, rep_seeds = args
    n = len(firms)
    out = []
    for rep_seed in rep_seeds:
        rng = random.Random(rep_seed)
        perm = list(range(n))
        rng.shuffle(perm)
        per_level = [
            (
                _null_mean(level_idx, perm, firms, ind, hv_ind),
                _null_mean(level_idx, perm, firms, reg, hv_reg),
            )
            for level_idx in levels_idx
        ]
        out.append(per_level)
    return out


def shuffle_null(
    tree: CommunityTree,
    industry_counts: Mapping,
    region_counts: Mapping,
    seed: int = 0,
    n_rep: int = 100,
    unit: str = "employees",
    threads: int = 1,
) -> list[NullLevelStats]:
    """Tree-shuffling null: random firm bijections onto tree positions.

    Tree shape, community sizes and nesting are preserved; only which firm
    occupies each slot changes. Returns per-level mean and sample SD of the
    null weighted mean reductions over ``n_rep`` replicates. Replicate seeds
    derive from (seed, replicate index), so results do not depend on
    chunking or worker count.
    """
    if n_rep < 1:
        raise ValueError("n_rep must be >= 1")
    ind, reg = _unit_counts(industry_counts, region_counts, unit)
    firms = sorted(tree.root.firms, key=_firm_key)
    hv_ind = _global_entropy(ind, firms)
    hv_reg = _global_entropy(reg, firms)
    levels_idx = _levels_index(tree, firms)
    rep_seeds = [derive_seed(seed, r) for r in range(n_rep)]

    if threads > 1 and n_rep > 1:
        chunks = [rep_seeds[i::threads] for i in range(threads)]
        order = [list(range(n_rep))[i::threads] for i in range(threads)]
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(
                pool.map(
                    _null_chunk,
                    [(firms, ind, reg, hv_ind, hv_reg, levels_idx, c) for c in chunks],
                )
            )
        per_rep: list = [None] * n_rep
        for idxs, chunk in zip(order, results):
            for i, row in zip(idxs, chunk):
                per_rep[i] = row
    else:
        per_rep = _null_chunk((firms, ind, reg, hv_ind, hv_reg, levels_idx, rep_seeds))

    stats = []
    for k in range(len(levels_idx)):
        vals_i = [row[k][0] for row in per_rep if row[k][0] is not None]
        vals_g = [row[k][1] for row in per_rep if row[k][1] is not None]
        stats.append(
            NullLevelStats(
                level=k,
                n_rep=n_rep,
                mean_industry=_mean(vals_i),
                sd_industry=_sd(vals_i),
                mean_region=_mean(vals_g),
                sd_region=_sd(vals_g),
            )
        )
    return stats


def _mean(xs: Sequence[float]) -> float:
    return sum(xs) / len(xs) if xs else 0.0


def _sd(xs: Sequence[float]) -> float:
    if len(xs) < 2:
        return 0.0
    mu = _mean(xs)
    return math.sqrt(sum((x - mu) ** 2 for x in xs) / (len(xs) - 1))


def hierarchy_diagnostics(
    tree: CommunityTree,
    industry_counts: Mapping,
    region_counts: Mapping,
    seed: int = 0,
    n_rep: int = 100,
    unit: str = "employees",
    threads: int = 1,
) -> tuple[list[LevelDiagnostics], list[NullLevelStats]]:
    """Observed diagnostics for every level, with deltas against the shuffle null."""
    observed = [
        level_diagnostics(tree, industry_counts, region_counts, k, unit=unit)
        for k in range(tree.depth + 1)
    ]
    null_stats = shuffle_null(
        tree, industry_counts, region_counts, seed=seed, n_rep=n_rep, unit=unit, threads=threads
    )
    completed = [
        replace(
            obs,
            delta_industry=obs.mean_reduction_industry - null.mean_industry,
            delta_region=obs.mean_reduction_region - null.mean_region,
        )
        for obs, null in zip(observed, null_stats)
    ]
    return completed, null_stats
