"""Labor-flow network analytics toolkit.

Builds firm-to-firm transition networks from job histories, extracts their
core, detects the hierarchical community structure, quantifies cluster
homogeneity against metadata, scores over-represented labels, prunes the
hierarchy, and fits labor-flux / market-cap trend regressions.
"""

__version__ = "0.1.0"

from . import io  # noqa: F401  (file formats live under laborflow.io)
from .community import Partition, louvain, max_single_move_gain, modularity
from .features import (
    FeatureVector,
    LevelDiagnostics,
    cluster_feature,
    entropy,
    entropy_reduction,
    firm_feature,
    firm_label_counts,
    hierarchy_diagnostics,
    level_diagnostics,
    shuffle_null,
)
from .flows import FluxMatrix, RawFlux, aggregate_flux, normalize_flux
from .hierarchy import CommunityTree, TreeNode, detect_hierarchy
from .network import (
    EmptyCoreError,
    LaborFlowNetwork,
    build_network,
    extract_core,
    firm_size,
)
from .overrep import LabelScore, PruneConfig, log_odds_pair, log_odds_scores, prune_tree, score_tree
from .records import EmploymentSpell, IngestReport, MemberProfile, Month, TransitionRecord
from .synth import SynthConfig, SynthData, generate, hierarchical_benchmark
from .trends import (
    FluxSeries,
    QuartileSkillReport,
    TrendFit,
    TrendRegression,
    flux_series,
    ols_trend,
    quartile_skills,
    trend_regression,
)

__all__ = [
    "__version__",
    "Month",
    "TransitionRecord",
    "EmploymentSpell",
    "MemberProfile",
    "IngestReport",
    "LaborFlowNetwork",
    "EmptyCoreError",
    "build_network",
    "extract_core",
    "firm_size",
    "Partition",
    "modularity",
    "louvain",
    "max_single_move_gain",
    "CommunityTree",
    "TreeNode",
    "detect_hierarchy",
    "FeatureVector",
    "LevelDiagnostics",
    "firm_feature",
    "cluster_feature",
    "entropy",
    "entropy_reduction",
    "firm_label_counts",
    "level_diagnostics",
    "shuffle_null",
    "hierarchy_diagnostics",
    "LabelScore",
    "PruneConfig",
    "log_odds_pair",
    "log_odds_scores",
    "score_tree",
    "prune_tree",
    "RawFlux",
    "FluxMatrix",
    "aggregate_flux",
    "normalize_flux",
    "FluxSeries",
    "TrendFit",
    "TrendRegression",
    "QuartileSkillReport",
    "flux_series",
    "ols_trend",
    "trend_regression",
    "quartile_skills",
    "SynthConfig",
    "SynthData",
    "generate",
    "hierarchical_benchmark",
]
