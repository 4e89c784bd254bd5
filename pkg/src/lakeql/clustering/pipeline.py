"""Soft clustering of tables from access patterns, and the user / group /
candidate-table mappings built on top of it.

The flow: filter noisy tables out of the access matrix, standardize user
columns, run FastICA, take each component's strongest tables as a core
cluster, and guarantee every table a home via its single strongest
component. Users map to clusters by summed access; groups rank clusters by
member coverage; candidate tables for a chat session are the union of the
user's clusters, the product areas' representative users' clusters, and
explicitly pinned tables.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Protocol, Sequence

import numpy as np

from .ica import IcaModel, fast_ica, standardize_columns
from .matrix import AccessMatrix

logger = logging.getLogger(__name__)

DEFAULT_N_COMPONENTS = 200
DEFAULT_TABLES_PER_CLUSTER = 20
DEFAULT_MIN_TOTAL_ACCESSES = 10
DEFAULT_MIN_UNIQUE_USERS = 3
USER_CLUSTER_LIMIT = 10


class InsufficientDataError(ValueError):
    """Too few tables survive filtering to support the component count."""


@dataclass(frozen=True)
class ClusterModel:
    """Soft clustering output: core lists (fixed size) and extended lists
    (core plus every table's single strongest component)."""

    cluster_ids: tuple[str, ...]
    core: dict[str, tuple[str, ...]]
    extended: dict[str, tuple[str, ...]]
    t_c: int


# user -> [(cluster_id, summed access)] sorted by access desc, max 10 entries
UserClusterMap = dict[str, tuple[tuple[str, int], ...]]


@dataclass(frozen=True)
class CandidateTables:
    tables: frozenset[str]
    unknown_user: bool = False


class ProductAreaLike(Protocol):
    name: str
    email_groups: frozenset[str]
    explicit_tables: frozenset[str]


def filter_by_usage(
    matrix: AccessMatrix,
    min_total: int = DEFAULT_MIN_TOTAL_ACCESSES,
    min_unique: int = DEFAULT_MIN_UNIQUE_USERS,
    n_components: int | None = None,
) -> AccessMatrix:
    """Drop tables with insufficient total or unique accesses, then users
    left with all-zero columns.

    Raises:
        InsufficientDataError: when ``n_components`` is given and fewer rows
            survive than components requested.
    """
    if min_total < 1 or min_unique < 1:
        raise ValueError("usage thresholds must be >= 1")
    totals = matrix.row_totals()
    uniques = matrix.unique_users_per_table()
    keep_rows = np.flatnonzero((totals >= min_total) & (uniques >= min_unique))
    counts = matrix.counts[keep_rows]
    keep_cols = np.flatnonzero(counts.sum(axis=0) > 0)
    filtered = AccessMatrix(
        tables=tuple(matrix.tables[i] for i in keep_rows),
        users=tuple(matrix.users[j] for j in keep_cols),
        counts=counts[:, keep_cols],
    )
    if n_components is not None and len(filtered.tables) < n_components:
        raise InsufficientDataError(
            f"only {len(filtered.tables)} tables pass the usage filter; "
            f"{n_components} components requested"
        )
    return filtered


def default_n_components(n_tables: int, n_users: int) -> int:
    """Desk-scale fallback when the production default does not fit."""
    feasible = max(1, min(n_tables, n_users) // 2)
    chosen = min(DEFAULT_N_COMPONENTS, feasible)
    if chosen != DEFAULT_N_COMPONENTS:
        logger.info(
            "n_components=%d (default %d infeasible for %d tables x %d users)",
            chosen, DEFAULT_N_COMPONENTS, n_tables, n_users,
        )
    return chosen


def clusters_from_scores(
    tables: Sequence[str],
    scores: np.ndarray,
    t_c: int = DEFAULT_TABLES_PER_CLUSTER,
) -> ClusterModel:
    """Build core and extended cluster maps from (table, component) scores.

    Core list per component: top ``t_c`` tables by absolute score, ties by
    table key ascending. Extended lists additionally give each table a home
    in its single highest-|score| component.
    """
    if t_c < 1:
        raise ValueError("t_c must be >= 1")
    n_tables, n_comp = scores.shape
    if n_tables != len(tables):
        raise ValueError("scores rows must match tables")
    magnitude = np.abs(scores)
    cluster_ids = tuple(f"cluster_{j}" for j in range(n_comp))
    size = min(t_c, n_tables)

    core: dict[str, tuple[str, ...]] = {}
    for j, cluster_id in enumerate(cluster_ids):
        order = sorted(range(n_tables), key=lambda i: (-magnitude[i, j], tables[i]))
        core[cluster_id] = tuple(tables[i] for i in order[:size])

    extended = {cid: list(members) for cid, members in core.items()}
    closest = magnitude.argmax(axis=1)  # ties resolve to the lowest component
    for i, table in enumerate(tables):
        home = cluster_ids[closest[i]]
        if table not in extended[home]:
            extended[home].append(table)
    return ClusterModel(
        cluster_ids=cluster_ids,
        core=core,
        extended={cid: tuple(members) for cid, members in extended.items()},
        t_c=size,
    )


def cluster_datasets(
    matrix: AccessMatrix,
    n_components: int,
    t_c: int = DEFAULT_TABLES_PER_CLUSTER,
    seed: int = 0,
    tolerance: float = 1e-4,
    max_iterations: int = 200,
) -> tuple[ClusterModel, IcaModel]:
    """Standardize user columns, run FastICA, and derive the cluster maps.

    ``matrix`` is expected to have passed :func:`filter_by_usage`.
    """
    if n_components < 1:
        raise ValueError("n_components must be >= 1")
    scaled, _ = standardize_columns(matrix.counts)
    model = fast_ica(
        scaled,
        n_components,
        tolerance=tolerance,
        max_iterations=max_iterations,
        seed=seed,
    )
    return clusters_from_scores(matrix.tables, model.scores, t_c), model


def assign_user_clusters(
    matrix: AccessMatrix,
    model: ClusterModel,
    limit: int = USER_CLUSTER_LIMIT,
) -> UserClusterMap:
    """Sum each user's access counts over every cluster's core tables; keep
    nonzero sums, sorted descending, truncated to ``limit``."""
    if not matrix.users:
        raise ValueError("access matrix has no users")
    table_index = {t: i for i, t in enumerate(matrix.tables)}
    result: UserClusterMap = {}
    for j, user in enumerate(matrix.users):
        sums: list[tuple[str, int]] = []
        for cluster_id in model.cluster_ids:
            rows = [table_index[t] for t in model.core[cluster_id] if t in table_index]
            total = int(matrix.counts[rows, j].sum()) if rows else 0
            if total != 0:
                sums.append((cluster_id, total))
        sums.sort(key=lambda pair: (-pair[1], pair[0]))
        result[user] = tuple(sums[:limit])
    return result


def get_user_group_clusters(
    users: Iterable[str],
    user_cluster_map: UserClusterMap,
    k: int = USER_CLUSTER_LIMIT,
) -> list[str]:
    """Rank the clusters of a user group: distinct members desc, summed
    access desc, cluster id asc; truncated to ``k``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    members: dict[str, int] = {}
    totals: dict[str, int] = {}
    for user in set(users):
        for cluster_id, access in user_cluster_map.get(user, ()):
            members[cluster_id] = members.get(cluster_id, 0) + 1
            totals[cluster_id] = totals.get(cluster_id, 0) + access
    ranked = sorted(
        members,
        key=lambda cid: (-members[cid], -totals[cid], cid),
    )
    return ranked[:k]


def get_candidate_tables(
    user: str,
    product_areas: Sequence[ProductAreaLike],
    user_cluster_map: UserClusterMap,
    model: ClusterModel,
    email_group_members: Mapping[str, Sequence[str]],
    k: int = USER_CLUSTER_LIMIT,
) -> CandidateTables:
    """Union of: extended tables of the user's top clusters, extended tables
    of the product areas' representative users' clusters, and tables
    explicitly pinned to the areas.

    An unknown user is not an error; the result is flagged and built from the
    product-area sources only.
    """
    unknown_user = user not in user_cluster_map
    clusters: list[str] = []
    if not unknown_user:
        clusters.extend(get_user_group_clusters([user], user_cluster_map, k))
    representatives: set[str] = set()
    for area in product_areas:
        for group in area.email_groups:
            representatives.update(email_group_members.get(group, ()))
    for cluster_id in get_user_group_clusters(representatives, user_cluster_map, k):
        if cluster_id not in clusters:
            clusters.append(cluster_id)
    tables: set[str] = set()
    for cluster_id in clusters:
        tables.update(model.extended.get(cluster_id, ()))
    for area in product_areas:
        tables.update(area.explicit_tables)
    return CandidateTables(frozenset(tables), unknown_user)


# --- artifact serialization --------------------------------------------------

def save_cluster_artifacts(
    directory: str | Path,
    model: ClusterModel,
    user_clusters: UserClusterMap,
) -> None:
    """Write ``clusters.ndjson`` and ``user_clusters.ndjson``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / "clusters.ndjson", "w", encoding="utf-8") as handle:
        for cluster_id in model.cluster_ids:
            handle.write(json.dumps({
                "cluster_id": cluster_id,
                "core": list(model.core[cluster_id]),
                "extended": list(model.extended[cluster_id]),
            }, sort_keys=True) + "\n")
    with open(directory / "user_clusters.ndjson", "w", encoding="utf-8") as handle:
        for user in sorted(user_clusters):
            handle.write(json.dumps({
                "user": user,
                "clusters": [[cid, access] for cid, access in user_clusters[user]],
            }, sort_keys=True) + "\n")


def load_cluster_artifacts(
    directory: str | Path,
) -> tuple[ClusterModel, UserClusterMap]:
    directory = Path(directory)
    cluster_ids: list[str] = []
    core: dict[str, tuple[str, ...]] = {}
    extended: dict[str, tuple[str, ...]] = {}
    with open(directory / "clusters.ndjson", encoding="utf-8") as handle:
        for line in handle:
            if not line.strip():
                continue
            row = json.loads(line)
            cluster_ids.append(row["cluster_id"])
            core[row["cluster_id"]] = tuple(row["core"])
            extended[row["cluster_id"]] = tuple(row["extended"])
    t_c = max((len(v) for v in core.values()), default=0)
    model = ClusterModel(tuple(cluster_ids), core, extended, t_c)
    user_clusters: UserClusterMap = {}
    path = directory / "user_clusters.ndjson"
    if path.exists():
        with open(path, encoding="utf-8") as handle:
            for line in handle:
                if not line.strip():
                    continue
                row = json.loads(line)
                user_clusters[row["user"]] = tuple(
                    (cid, int(access)) for cid, access in row["clusters"]
                )
    return model, user_clusters
