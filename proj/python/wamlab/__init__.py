"""Toy world-action-model lab: consistency scoring, candidate selection and
the statistics battery, backed by the C++ core."""

from wamlab._core import (
    CollapseMode,
    Family,
    Formulation,
    RngStream,
    SelectionConfig,
    Strategy,
    TaskSpec,
    WamSpec,
    auc_raw,
    cohens_d,
    consensus_select,
    consistency_score,
    correlations,
    derive_stream,
    fit_logistic_1d,
    gap_curve,
    latent_change,
    mean_latent,
    mse_distance,
    roc_auc_cv,
    run_episode_json,
    softmax_weights,
    wrap_angle,
    zscore_per_task,
)

__all__ = [
    "CollapseMode",
    "Family",
    "Formulation",
    "RngStream",
    "SelectionConfig",
    "Strategy",
    "TaskSpec",
    "WamSpec",
    "auc_raw",
    "cohens_d",
    "consensus_select",
    "consistency_score",
    "correlations",
    "derive_stream",
    "fit_logistic_1d",
    "gap_curve",
    "latent_change",
    "mean_latent",
    "mse_distance",
    "roc_auc_cv",
    "run_episode_json",
    "softmax_weights",
    "wrap_angle",
    "zscore_per_task",
]
