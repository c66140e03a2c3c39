"""Over-represented label scoring (informative Dirichlet prior log-odds) and tree pruning."""

from __future__ import annotations

import logging
import math
from collections import Counter, deque
from collections.abc import Mapping
from dataclasses import dataclass

from .hierarchy import CommunityTree

log = logging.getLogger(__name__)

DEFAULT_PRIOR_FRACTION = 0.01


@dataclass(frozen=True)
class LabelScore:
    label: str
    delta: float
    variance: float
    z: float


@dataclass(frozen=True)
class PruneConfig:
    """Keep/break Z thresholds for metadata-based pruning."""

    theta_keep: float = 1.96
    theta_break: float = 100.0

    def __post_init__(self) -> None:
        if self.theta_break < self.theta_keep:
            log.warning(
                "theta_break (%.3g) below theta_keep (%.3g): every kept node is breakable",
                self.theta_break,
                self.theta_keep,
            )


def log_odds_pair(
    counts_i: Mapping,
    counts_j: Mapping,
    prior_counts: Mapping,
    prior_strength: float | None = None,
) -> list[LabelScore]:
    """Log-odds ratio of each prior label in corpus i versus corpus j.

    Pseudo-counts are the prior's relative frequencies scaled to a total
    mass of ``prior_strength`` (default: 1% of the prior's total count).
    Scores are sorted by z descending, ties by label.
    """
    prior_total = sum(prior_counts.values())
    if prior_total <= 0:
        raise ValueError("prior corpus is empty")
    labels = sorted(lab for lab, c in prior_counts.items() if c > 0)
    if len(labels) < 2:
        raise ValueError("prior corpus needs at least two labels for finite odds")
    for counts, name in ((counts_i, "cluster"), (counts_j, "comparison")):
        stray = [lab for lab, c in counts.items() if c > 0 and lab not in set(labels)]
        if stray:
            raise ValueError(f"{name} label(s) absent from the prior corpus: {stray[:3]}")

    if prior_strength is None:
        prior_strength = DEFAULT_PRIOR_FRACTION * prior_total
    if prior_strength <= 0:
        raise ValueError("prior_strength must be positive")

    n_i = sum(counts_i.values())
    n_j = sum(counts_j.values())
    n_b = prior_strength
    scores = []
    for lab in labels:
        f_b = prior_strength * prior_counts[lab] / prior_total
        f_i = counts_i.get(lab, 0) + f_b
        f_j = counts_j.get(lab, 0) + f_b
        delta = math.log(f_i / (n_i + n_b - f_i)) - math.log(f_j / (n_j + n_b - f_j))
        var = 1.0 / f_i + 1.0 / f_j
        scores.append(LabelScore(label=lab, delta=delta, variance=var, z=delta / math.sqrt(var)))
    scores.sort(key=lambda s: (-s.z, s.label))
    return scores


def log_odds_scores(
    cluster_counts: Mapping,
    background_counts: Mapping,
    prior_strength: float | None = None,
) -> list[LabelScore]:
    """Score a cluster against the rest of the corpus.

    The comparison corpus is background minus cluster, and the background
    itself is the Dirichlet prior. Cluster counts must be covered by the
    background (the prior is undefined otherwise).
    """
    comparison: Counter = Counter()
    for lab, c in background_counts.items():
        if c > 0:
            comparison[lab] = c
    for lab, c in cluster_counts.items():
        if c <= 0:
            continue
        if lab not in comparison:
            raise ValueError(f"cluster label {lab!r} absent from the background corpus")
        rest = comparison[lab] - c
        if rest < 0:
            raise ValueError(f"cluster count for {lab!r} exceeds the background count")
        comparison[lab] = rest
    return log_odds_pair(cluster_counts, comparison, background_counts, prior_strength)


def score_tree(
    tree: CommunityTree,
    industry_counts: Mapping,
    region_counts: Mapping,
    prior_strength: float | None = None,
) -> dict:
    """Attach max industry/region Z to every tree node; returns all scores.

    Background corpus = pooled counts over the root's firms. The return
    value maps node id -> {"industry": [LabelScore...], "region": [...]}.
    """
    results: dict = {}
    backgrounds = {}
    for attr, counts in (("industry", industry_counts), ("region", region_counts)):
        pooled: Counter = Counter()
        for f in tree.root.firms:
            pooled.update(counts.get(f, ()))
        backgrounds[attr] = pooled

    for node in tree.nodes():
        node_scores = {}
        for attr, counts in (("industry", industry_counts), ("region", region_counts)):
            pooled = Counter()
            for f in node.firms:
                pooled.update(counts.get(f, ()))
            scores = log_odds_scores(pooled, backgrounds[attr], prior_strength)
            node_scores[attr] = scores
            node.stats[f"max_z_{attr}"] = max(s.z for s in scores)
        results[node.id] = node_scores
    return results


def _exceeds(node, theta: float, require_both: bool) -> bool:
    try:
        z_ind = node.stats["max_z_industry"]
        z_reg = node.stats["max_z_region"]
    except KeyError as exc:
        raise ValueError(f"tree node {node.id!r} carries no max Z-scores; run score_tree first") from exc
    if require_both:
        return z_ind > theta and z_reg > theta
    return z_ind > theta or z_reg > theta


def prune_tree(
    tree: CommunityTree,
    cfg: PruneConfig,
    require_both: bool = True,
    literal_pseudocode: bool = False,
) -> list[str]:
    """Walk the hierarchy breadth-first and keep the finest well-labelled cut.

    A child whose max Z clears ``theta_break`` (for industry and region when
    ``require_both``) and has children of its own is descended into; otherwise
    it is kept when its max Z clears ``theta_keep`` and dropped when not. The
    returned node ids are mutually disjoint communities.

    ``literal_pseudocode=True`` switches to the swapped-threshold variant
    (descend on theta_keep, save on theta_break) for comparison; with
    theta_break >= theta_keep its save branch is unreachable by construction.
    """
    save: list[str] = []
    queue = deque([tree.root])
    while queue:
        node = queue.popleft()
        for child in node.children:
            if literal_pseudocode:
                if _exceeds(child, cfg.theta_keep, require_both):
                    queue.append(child)
                elif _exceeds(child, cfg.theta_break, require_both):
                    save.append(child.id)
            else:
                if child.children and _exceeds(child, cfg.theta_break, require_both):
                    queue.append(child)
                elif _exceeds(child, cfg.theta_keep, require_both):
                    save.append(child.id)
    return save
