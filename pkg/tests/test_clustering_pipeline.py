"""Clustering trace equivalence (hand-computed 6-user x 12-table fixture),
filtering, invariances, planted-partition recovery, and artifact I/O."""

from __future__ import annotations

import time

import numpy as np
import pytest

from lakeql.clustering import (
    AccessMatrix,
    InsufficientDataError,
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
from lakeql.catalog.types import ProductArea

TABLES = tuple(f"t{i:02d}" for i in range(1, 13))
USERS = ("u1", "u2", "u3", "u4", "u5", "u6")

# Hand-designed access counts (rows: t01..t12, columns: u1..u6).
COUNTS = np.array([
    [9, 3, 0, 0, 1, 0],
    [4, 0, 2, 0, 0, 0],
    [0, 5, 0, 0, 0, 0],
    [2, 2, 2, 2, 0, 0],
    [0, 0, 7, 1, 0, 0],
    [0, 0, 3, 0, 2, 0],
    [0, 0, 2, 5, 0, 0],
    [0, 0, 0, 6, 4, 0],
    [0, 0, 0, 0, 5, 3],
    [0, 0, 0, 2, 0, 6],
    [1, 0, 0, 0, 0, 2],
    [0, 1, 0, 0, 0, 1],
])

# Hand-written component scores (rows: t01..t12, columns: 3 components).
SCORES = np.array([
    [5.00, 0.10, 0.20],
    [4.00, -0.20, 0.10],
    [-3.50, 0.30, 0.00],
    [3.00, 2.90, 0.10],
    [0.20, 6.00, 0.30],
    [0.10, -5.00, 0.20],
    [0.30, 4.50, 4.40],
    [0.00, 0.20, 7.00],
    [0.10, 0.10, -6.50],
    [0.20, 0.30, 6.00],
    [2.00, 2.00, 2.00],
    [0.05, 0.05, 0.05],
])


@pytest.fixture()
def matrix() -> AccessMatrix:
    return AccessMatrix(TABLES, USERS, COUNTS.copy())


@pytest.fixture()
def model():
    return clusters_from_scores(TABLES, SCORES, t_c=4)


# --- cluster selection (hand trace) ---

def test_core_clusters_match_hand_trace(model):
    assert model.core["cluster_0"] == ("t01", "t02", "t03", "t04")
    assert model.core["cluster_1"] == ("t05", "t06", "t07", "t04")
    assert model.core["cluster_2"] == ("t08", "t09", "t10", "t07")


def test_extended_clusters_match_hand_trace(model):
    # t11 and t12 have their strongest |score| in component 0 (ties resolve
    # to the lowest component); everything else already lives in its core.
    assert model.extended["cluster_0"] == ("t01", "t02", "t03", "t04", "t11", "t12")
    assert model.extended["cluster_1"] == ("t05", "t06", "t07", "t04")
    assert model.extended["cluster_2"] == ("t08", "t09", "t10", "t07")


def test_every_table_in_at_least_one_extended_cluster(model):
    covered = set()
    for members in model.extended.values():
        covered.update(members)
    assert covered == set(TABLES)


def test_core_lists_have_exactly_t_c_entries(model):
    assert all(len(model.core[c]) == 4 for c in model.cluster_ids)
    assert model.t_c == 4


def test_core_subset_of_extended(model):
    for cluster_id in model.cluster_ids:
        assert set(model.core[cluster_id]) <= set(model.extended[cluster_id])


def test_t_c_saturation_includes_all_tables():
    saturated = clusters_from_scores(TABLES, SCORES, t_c=len(TABLES))
    for cluster_id in saturated.cluster_ids:
        assert set(saturated.core[cluster_id]) == set(TABLES)


def test_abs_score_tie_breaks_by_table_key():
    scores = np.array([[1.0], [-1.0], [0.5]])
    model = clusters_from_scores(("b", "a", "c"), scores, t_c=2)
    assert model.core["cluster_0"] == ("a", "b")  # |1.0| ties -> key asc


# --- selection invariances ---

def test_positive_scaling_leaves_clusters_unchanged(model):
    scaled = clusters_from_scores(TABLES, SCORES * 7.3, t_c=4)
    assert scaled.core == model.core
    assert scaled.extended == model.extended


def test_sign_flip_leaves_clusters_unchanged(model):
    flipped_scores = SCORES.copy()
    flipped_scores[:, 1] *= -1.0
    flipped = clusters_from_scores(TABLES, flipped_scores, t_c=4)
    assert flipped.core == model.core
    assert flipped.extended == model.extended


# --- usage filtering ---

def test_filter_by_usage_hand_computed(matrix):
    filtered = filter_by_usage(matrix, min_total=10, min_unique=3)
    assert filtered.tables == ("t01",)
    assert filtered.users == ("u1", "u2", "u5")
    assert filtered.counts.tolist() == [[9, 3, 1]]


def test_filter_by_usage_looser_thresholds(matrix):
    filtered = filter_by_usage(matrix, min_total=5, min_unique=2)
    assert filtered.tables == (
        "t01", "t02", "t04", "t05", "t06", "t07", "t08", "t09", "t10",
    )
    assert filtered.users == USERS


def test_filter_identity_when_all_pass(matrix):
    filtered = filter_by_usage(matrix, min_total=1, min_unique=1)
    assert filtered == matrix


def test_filter_drops_single_user_table():
    single = AccessMatrix(("t", "u"), ("a", "b", "c"),
                          np.array([[100, 0, 0], [5, 5, 5]]))
    filtered = filter_by_usage(single, min_total=10, min_unique=3)
    assert filtered.tables == ("u",)


def test_filter_insufficient_data_error(matrix):
    with pytest.raises(InsufficientDataError) as err:
        filter_by_usage(matrix, min_total=10, min_unique=3, n_components=5)
    assert "1 tables" in str(err.value) and "5 components" in str(err.value)


def test_default_n_components_desk_scale():
    assert default_n_components(2000, 500) == 200
    assert default_n_components(12, 6) == 3
    assert default_n_components(3, 2) == 1


# --- user and group mappings (hand trace) ---

def test_assign_user_clusters_hand_trace(matrix, model):
    user_clusters = assign_user_clusters(matrix, model)
    assert user_clusters["u1"] == (("cluster_0", 15), ("cluster_1", 2))
    assert user_clusters["u2"] == (("cluster_0", 10), ("cluster_1", 2))
    assert user_clusters["u3"] == (("cluster_1", 14), ("cluster_0", 4), ("cluster_2", 2))
    assert user_clusters["u4"] == (("cluster_2", 13), ("cluster_1", 8), ("cluster_0", 2))
    assert user_clusters["u5"] == (("cluster_2", 9), ("cluster_1", 2), ("cluster_0", 1))
    assert user_clusters["u6"] == (("cluster_2", 9),)


def test_user_cluster_limit_ten():
    tables = tuple(f"x{i:02d}" for i in range(12))
    counts = np.ones((12, 1), dtype=np.int64)
    matrix = AccessMatrix(tables, ("solo",), counts)
    scores = np.eye(12)  # 12 components, each core = its own table
    model = clusters_from_scores(tables, scores, t_c=1)
    user_clusters = assign_user_clusters(matrix, model)
    assert len(user_clusters["solo"]) == 10


def test_zero_access_clusters_dropped(matrix, model):
    user_clusters = assign_user_clusters(matrix, model)
    for clusters in user_clusters.values():
        assert all(access != 0 for _, access in clusters)


def test_group_clusters_unique_desc_sum_desc(matrix, model):
    user_clusters = assign_user_clusters(matrix, model)
    # u1+u2: cluster_0 on both (sum 25), cluster_1 on both (sum 4)
    assert get_user_group_clusters(["u1", "u2"], user_clusters) == [
        "cluster_0", "cluster_1",
    ]
    # u3+u4+u5: all three clusters held by all three users; sums:
    # c1=24, c2=24, c0=7; the c1/c2 tie breaks by cluster id
    assert get_user_group_clusters(["u3", "u4", "u5"], user_clusters, k=2) == [
        "cluster_1", "cluster_2",
    ]


def test_group_unique_count_beats_sum():
    user_clusters = {
        "a": (("cA", 5),), "b": (("cA", 3),), "c": (("cA", 2),),
        "d": (("cB", 99),), "e": (("cB", 1),),
    }
    assert get_user_group_clusters(["a", "b", "c", "d", "e"], user_clusters) == [
        "cA", "cB",
    ]


def test_single_user_group_preserves_their_order(matrix, model):
    user_clusters = assign_user_clusters(matrix, model)
    assert get_user_group_clusters(["u4"], user_clusters) == [
        "cluster_2", "cluster_1", "cluster_0",
    ]


# --- candidate tables (Algorithm 4 trace) ---

GROWTH = ProductArea("growth", frozenset({"g1"}), frozenset({"t12"}))
EMAIL_GROUPS = {"g1": ("u1", "u2"), "g2": ("u5", "u6")}


def test_candidate_tables_known_user(matrix, model):
    user_clusters = assign_user_clusters(matrix, model)
    result = get_candidate_tables(
        "u6", [GROWTH], user_clusters, model, EMAIL_GROUPS, k=1
    )
    assert not result.unknown_user
    # u6 -> cluster_2 extended; growth reps (u1,u2) -> cluster_0 extended;
    # plus the explicit t12
    assert result.tables == frozenset({
        "t08", "t09", "t10", "t07",            # extended cluster_2
        "t01", "t02", "t03", "t04", "t11", "t12",  # extended cluster_0
    })


def test_candidate_tables_unknown_user_flagged(matrix, model):
    user_clusters = assign_user_clusters(matrix, model)
    result = get_candidate_tables(
        "ghost", [GROWTH], user_clusters, model, EMAIL_GROUPS, k=1
    )
    assert result.unknown_user
    assert result.tables == frozenset({"t01", "t02", "t03", "t04", "t11", "t12"})


def test_candidate_tables_no_areas(matrix, model):
    user_clusters = assign_user_clusters(matrix, model)
    result = get_candidate_tables("u6", [], user_clusters, model, {}, k=1)
    assert result.tables == frozenset({"t08", "t09", "t10", "t07"})


def test_explicit_tables_only_for_unknown_user(matrix, model):
    user_clusters = assign_user_clusters(matrix, model)
    area = ProductArea("bare", frozenset(), frozenset({"t05"}))
    result = get_candidate_tables("ghost", [area], user_clusters, model, {}, k=1)
    assert result.unknown_user
    assert result.tables == frozenset({"t05"})


# --- end-to-end ICA clustering on planted partitions ---

def planted_matrix(n_blocks, tables_per, users_per, noise, seed):
    rng = np.random.default_rng(seed)
    counts = np.zeros((n_blocks * tables_per, n_blocks * users_per))
    for block in range(n_blocks):
        rows = slice(block * tables_per, (block + 1) * tables_per)
        cols = slice(block * users_per, (block + 1) * users_per)
        intensity = rng.lognormal(0.0, 0.8, (tables_per, 1))  # heavy-tailed popularity
        affinity = rng.uniform(0.5, 1.5, (1, users_per))
        counts[rows, cols] = 40.0 * intensity * affinity
    counts += rng.uniform(0.0, noise * 40.0, counts.shape)
    counts = np.round(counts).astype(np.int64)
    tables = tuple(f"t{i:04d}" for i in range(counts.shape[0]))
    users = tuple(f"u{j:04d}" for j in range(counts.shape[1]))
    return AccessMatrix(tables, users, counts)


def mean_purity(model, tables_per_block: int) -> float:
    purities = []
    for members in model.core.values():
        blocks = [int(t[1:]) // tables_per_block for t in members]
        purities.append(np.bincount(blocks).max() / len(members))
    return float(np.mean(purities))


def test_block_diagonal_three_blocks_purity_one():
    matrix = planted_matrix(3, 60, 12, noise=0.05, seed=1)
    filtered = filter_by_usage(matrix, 10, 3, n_components=3)
    model, ica = cluster_datasets(filtered, 3, t_c=20, seed=0)
    assert ica.converged
    assert mean_purity(model, 60) == 1.0


@pytest.mark.parametrize("n_blocks,seed", [(3, 2), (4, 3), (5, 4)])
def test_planted_partition_purity_at_five_percent_noise(n_blocks, seed):
    matrix = planted_matrix(n_blocks, 60, 12, noise=0.05, seed=seed)
    filtered = filter_by_usage(matrix, 10, 3)
    model, _ = cluster_datasets(filtered, n_blocks, t_c=20, seed=0)
    assert mean_purity(model, 60) >= 0.9


def test_desk_scale_clustering_under_60s():
    matrix = planted_matrix(20, 100, 25, noise=0.05, seed=9)  # 2000 x 500
    started = time.monotonic()
    filtered = filter_by_usage(matrix, 10, 3)
    model, _ = cluster_datasets(filtered, 20, t_c=20, seed=0)
    assign_user_clusters(filtered, model)
    assert time.monotonic() - started < 60.0
    covered = set()
    for members in model.extended.values():
        covered.update(members)
    assert covered == set(filtered.tables)


# --- artifact round trip ---

def test_artifacts_round_trip(tmp_path, matrix, model):
    user_clusters = assign_user_clusters(matrix, model)
    save_cluster_artifacts(tmp_path, model, user_clusters)
    loaded_model, loaded_users = load_cluster_artifacts(tmp_path)
    assert loaded_model.core == model.core
    assert loaded_model.extended == model.extended
    assert loaded_model.cluster_ids == model.cluster_ids
    assert loaded_users == user_clusters
