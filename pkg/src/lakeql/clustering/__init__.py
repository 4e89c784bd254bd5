"""Access-pattern table clustering: FastICA plus the user/group/candidate
mappings built on the component scores."""

from .ica import IcaModel, RankError, fast_ica, standardize_columns
from .matrix import AccessMatrix
from .pipeline import (
    CandidateTables,
    ClusterModel,
    InsufficientDataError,
    UserClusterMap,
    assign_user_clusters,
    cluster_datasets,
    clusters_from_scores,
    default_n_components,
    filter_by_usage,
    get_candidate_tables,
    get_user_group_clusters,
    load_cluster_artifacts,
    save_cluster_artifacts,
)

__all__ = [
    "AccessMatrix",
    "CandidateTables",
    "ClusterModel",
    "IcaModel",
    "InsufficientDataError",
    "RankError",
    "UserClusterMap",
    "assign_user_clusters",
    "cluster_datasets",
    "clusters_from_scores",
    "default_n_components",
    "fast_ica",
    "filter_by_usage",
    "get_candidate_tables",
    "get_user_group_clusters",
    "load_cluster_artifacts",
    "save_cluster_artifacts",
    "standardize_columns",
]
