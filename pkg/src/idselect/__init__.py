"""Importance-diversity visual-token selection over exported tensors."""

from .baselines import maxmin_select, random_select, topk_select
from .errors import FormatError, ManifestError, ValidationError
from .importance import (
    ImportanceSource,
    instruction_relevance,
    min_max_normalize,
    multi_head_cross_attention,
    resolve_importance,
    scaled_softmax_attention,
    unified_score,
)
from .metrics import (
    MetricsReport,
    compute_report,
    importance_retention,
    mean_nearest_selected_distance,
    mean_pairwise_similarity,
    min_pairwise_distance,
)
from .selection import (
    Method,
    SelectionConfig,
    SelectionResult,
    StepRecord,
    TieRule,
    cosine_distance,
    id_select,
    select,
    suppression_weight,
    update_scores,
)
from .tensor_io import (
    Case,
    SynthSpec,
    cluster_labels,
    load_case,
    read_tensor,
    save_case,
    synth_case,
    write_tensor,
)

__all__ = [
    "Case",
    "FormatError",
    "ImportanceSource",
    "ManifestError",
    "Method",
    "MetricsReport",
    "SelectionConfig",
    "SelectionResult",
    "StepRecord",
    "SynthSpec",
    "TieRule",
    "ValidationError",
    "cluster_labels",
    "compute_report",
    "cosine_distance",
    "id_select",
    "importance_retention",
    "instruction_relevance",
    "load_case",
    "maxmin_select",
    "mean_nearest_selected_distance",
    "mean_pairwise_similarity",
    "min_max_normalize",
    "min_pairwise_distance",
    "multi_head_cross_attention",
    "random_select",
    "read_tensor",
    "resolve_importance",
    "save_case",
    "scaled_softmax_attention",
    "select",
    "suppression_weight",
    "synth_case",
    "topk_select",
    "unified_score",
    "update_scores",
    "write_tensor",
]

__version__ = "0.1.0"
