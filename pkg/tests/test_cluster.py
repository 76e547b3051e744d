import math
import time

import numpy as np
import pytest

from qdelta.cluster import (
    P1,
    P2,
    P3,
    ClusteringError,
    build_result,
    evaluate_clusters,
    impute_matrix,
    kmeans,
    select_k,
    silhouette_scores,
)
from qdelta.records import ClusterResult, ImpactVector


def brute_force_silhouette(x: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Direct double-loop transcription of the mean-intra-distance /
    min-other-cluster-distance contrast."""
    n = len(x)
    out = np.zeros(n)
    clusters = sorted(set(int(c) for c in labels))
    for i in range(n):
        own = labels[i]
        co_members = [j for j in range(n) if labels[j] == own and j != i]
        if not co_members:
            out[i] = 0.0
            continue
        a = sum(math.dist(x[i], x[j]) for j in co_members) / len(co_members)
        b = math.inf
        for c in clusters:
            if c == own:
                continue
            members = [j for j in range(n) if labels[j] == c]
            b = min(b, sum(math.dist(x[i], x[j]) for j in members) / len(members))
        out[i] = (b - a) / max(a, b) if max(a, b) > 0 else 0.0
    return out


def blobs(rng: np.random.RandomState, centers, per_blob: int, spread: float = 0.3):
    points = []
    labels = []
    for idx, center in enumerate(centers):
        points.append(rng.randn(per_blob, len(center)) * spread + np.asarray(center))
        labels.extend([idx] * per_blob)
    return np.vstack(points), np.asarray(labels)


class TestSilhouette:
    def test_singleton_cluster_scores_zero(self):
        x = np.array([[0.0, 0.0], [0.1, 0.0], [5.0, 5.0]])
        labels = np.array([0, 0, 1])
        scores = silhouette_scores(x, labels)
        assert scores[2] == 0.0

    def test_coincident_points_score_one(self):
        x = np.array([[1.0, 1.0], [1.0, 1.0], [9.0, 9.0], [9.5, 9.0]])
        labels = np.array([0, 0, 1, 1])
        scores = silhouette_scores(x, labels)
        assert scores[0] == pytest.approx(1.0)
        assert scores[1] == pytest.approx(1.0)

    def test_single_cluster_is_an_error(self):
        with pytest.raises(ClusteringError):
            silhouette_scores(np.zeros((4, 2)), np.zeros(4, dtype=int))

    def test_matches_brute_force_on_50_random_instances(self):
        rng = np.random.RandomState(42)
        for trial in range(50):
            n = int(rng.randint(10, 201))
            dims = int(rng.randint(2, 8))
            k = int(rng.randint(2, 7))
            x = rng.randn(n, dims) * rng.uniform(0.5, 3.0)
            labels = rng.randint(0, k, size=n)
            if len(set(labels.tolist())) < 2:
                labels[0] = (labels[0] + 1) % k
            fast = silhouette_scores(x, labels)
            slow = brute_force_silhouette(x, labels)
            assert np.max(np.abs(fast - slow)) < 1e-12, f"trial {trial}"
            assert np.all(fast >= -1.0 - 1e-12) and np.all(fast <= 1.0 + 1e-12)


class TestKmeans:
    def test_n_equals_k_gives_zero_inertia(self):
        x = np.array([[0.0, 0.0], [3.0, 0.0], [0.0, 3.0], [9.0, 9.0]])
        labels, centroids, inertia = kmeans(x, k=4, seed=1)
        assert inertia == pytest.approx(0.0)
        assert len(set(labels.tolist())) == 4

    def test_two_blobs_recover_generator_labels(self):
        rng = np.random.RandomState(0)
        x, truth = blobs(rng, [(0, 0), (10, 10)], per_blob=20)
        labels, _, _ = kmeans(x, k=2, seed=5)
        same = labels == labels[0]
        truth_same = truth == truth[0]
        assert np.array_equal(same, truth_same)

    def test_duplicated_dataset_converges_to_identical_centroids(self):
        rng = np.random.RandomState(3)
        x, _ = blobs(rng, [(0, 0), (8, 8)], per_blob=12)
        _, c1, _ = kmeans(x, k=2, seed=11)
        _, c2, _ = kmeans(np.vstack([x, x]), k=2, seed=23)
        a = np.array(sorted(c1.tolist()))
        b = np.array(sorted(c2.tolist()))
        assert np.max(np.abs(a - b)) < 1e-9

    def test_nearest_centroid_property_at_convergence(self):
        rng = np.random.RandomState(9)
        x = rng.randn(60, 4)
        labels, centroids, _ = kmeans(x, k=5, seed=2)
        d2 = ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        own = d2[np.arange(len(x)), labels]
        assert np.all(own <= d2.min(axis=1) + 1e-12)

    def test_same_seed_bit_identical_across_three_runs(self):
        rng = np.random.RandomState(17)
        x = rng.randn(80, 6)
        runs = [kmeans(x, k=4, seed=77) for _ in range(3)]
        for labels, centroids, inertia in runs[1:]:
            assert np.array_equal(labels, runs[0][0])
            assert np.array_equal(centroids, runs[0][1])
            assert inertia == runs[0][2]

    def test_inertia_non_increasing_per_iteration(self):
        rng = np.random.RandomState(4)
        x = rng.randn(100, 3)
        history: list[float] = []
        kmeans(x, k=6, seed=8, inertia_history=history)
        assert all(b <= a + 1e-9 for a, b in zip(history, history[1:]))

    def test_k_larger_than_n_is_an_error(self):
        with pytest.raises(ClusteringError):
            kmeans(np.zeros((3, 2)), k=4, seed=0)

    def test_non_finite_vectors_are_an_error(self):
        x = np.array([[0.0, np.nan], [1.0, 2.0]])
        with pytest.raises(ClusteringError):
            kmeans(x, k=1, seed=0)


class TestSelectK:
    def test_three_blobs_select_three_clusters(self):
        rng = np.random.RandomState(12)
        x, _ = blobs(rng, [(0, 0), (10, 0), (5, 9)], per_blob=15)
        ids = [f"m{i}" for i in range(len(x))]
        start = time.perf_counter()
        result = select_k(x, ids, k_min=2, k_max=8, restarts=10, seed=3)
        elapsed = time.perf_counter() - start
        assert result.k == 3
        assert result.mean_silhouette > 0.7
        assert elapsed < 5.0

    def test_single_candidate_range(self):
        rng = np.random.RandomState(2)
        x = rng.randn(12, 3)
        result = select_k(x, [f"m{i}" for i in range(12)], k_min=2, k_max=2, seed=1)
        assert result.k == 2

    def test_invalid_range_is_an_error(self):
        x = np.zeros((5, 2))
        with pytest.raises(ClusteringError):
            select_k(x, ["a"] * 5, k_min=2, k_max=5, seed=0)


def _result_with(sizes_and_sils, point_sils, assignment, mean):
    return ClusterResult(
        k=len(sizes_and_sils),
        seed=0,
        assignment=assignment,
        centroids=[[0.0] * 2 for _ in sizes_and_sils],
        point_silhouette=point_sils,
        cluster_silhouette=dict(enumerate(sizes_and_sils)),
        mean_silhouette=mean,
        retained=set(),
        rejection_reasons={},
    )


class TestEvaluateClusters:
    def _engineered_fixture(self):
        """Four clusters engineered so exactly two pass every predicate:
        cluster 0 passes all; cluster 1 is too small (P2); cluster 2 is
        single-repo (P3); cluster 3 has weak silhouette (P1); cluster 1
        also fails P1+P3 to check reason lists are exact."""
        assignment = {}
        repo_of = {}
        point_sils = {}

        def put(cluster, count, repos, sil):
            for j in range(count):
                mid = f"c{cluster}m{j}"
                assignment[mid] = cluster
                repo_of[mid] = repos[j % len(repos)]
                point_sils[mid] = sil

        put(0, 6, ["r/a", "r/b"], 0.9)
        put(1, 4, ["r/a"], 0.2)
        put(2, 7, ["r/solo"], 0.8)
        put(3, 6, ["r/a", "r/c"], 0.1)
        cluster_sil = {0: 0.9, 1: 0.2, 2: 0.8, 3: 0.1}
        mean = sum(point_sils.values()) / len(point_sils)
        result = ClusterResult(
            k=4,
            seed=0,
            assignment=assignment,
            centroids=[[0.0]] * 4,
            point_silhouette=point_sils,
            cluster_silhouette=cluster_sil,
            mean_silhouette=mean,
        )
        return result, repo_of, mean

    def test_retained_is_exactly_the_predicate_conjunction(self):
        result, repo_of, mean = self._engineered_fixture()
        retained, _ = evaluate_clusters(result, repo_of)
        # soundness and completeness against a hand evaluation
        expected_retained = set()
        for c, sil in result.cluster_silhouette.items():
            members = [m for m, cc in result.assignment.items() if cc == c]
            p1 = sil > mean
            p2 = len(members) >= 5
            p3 = len({repo_of[m] for m in members}) >= 2
            if p1 and p2 and p3:
                expected_retained.add(c)
        assert retained == expected_retained
        assert retained == {0}

    def test_rejection_reasons_list_exactly_the_failed_predicates(self):
        result, repo_of, _ = self._engineered_fixture()
        _, reasons = evaluate_clusters(result, repo_of)
        assert reasons[1] == [P1, P2, P3]
        assert reasons[2] == [P3]
        assert reasons[3] == [P1]
        assert 0 not in reasons

    def test_cluster_of_four_rejected_for_size(self):
        assignment = {f"a{j}": 0 for j in range(4)}
        assignment.update({f"b{j}": 1 for j in range(8)})
        sils = {m: (0.9 if c == 0 else 0.1) for m, c in assignment.items()}
        result = _result_with([0.9, 0.1], sils, assignment, 0.37)
        repo_of = {m: ("r/x" if j % 2 else "r/y") for j, m in enumerate(assignment)}
        retained, reasons = evaluate_clusters(result, repo_of)
        assert 0 not in retained
        assert reasons[0] == [P2]

    def test_single_repo_cluster_rejected_for_spread(self):
        assignment = {f"a{j}": 0 for j in range(6)}
        assignment.update({f"b{j}": 1 for j in range(6)})
        sils = {m: (0.9 if c == 0 else 0.1) for m, c in assignment.items()}
        result = _result_with([0.9, 0.1], sils, assignment, 0.5)
        repo_of = {m: ("r/only" if c == 0 else ("r/x" if j % 2 else "r/y"))
                   for j, (m, c) in enumerate(assignment.items())}
        retained, reasons = evaluate_clusters(result, repo_of)
        assert 0 not in retained
        assert reasons[0] == [P3]


def test_engineered_fixture_with_exactly_two_retained():
    """A second engineered layout where exactly clusters 0 and 1 pass."""
    assignment = {}
    repo_of = {}
    point_sils = {}

    def put(cluster, count, repos, sil):
        for j in range(count):
            mid = f"k{cluster}m{j}"
            assignment[mid] = cluster
            repo_of[mid] = repos[j % len(repos)]
            point_sils[mid] = sil

    put(0, 5, ["r/a", "r/b"], 0.95)
    put(1, 9, ["r/b", "r/c"], 0.80)
    put(2, 3, ["r/a", "r/b"], 0.90)  # fails P2
    put(3, 12, ["r/a", "r/b"], 0.05)  # fails P1, drags the mean down
    mean = sum(point_sils.values()) / len(point_sils)
    result = ClusterResult(
        k=4,
        seed=1,
        assignment=assignment,
        centroids=[[0.0]] * 4,
        point_silhouette=point_sils,
        cluster_silhouette={0: 0.95, 1: 0.80, 2: 0.90, 3: 0.05},
        mean_silhouette=mean,
    )
    retained, reasons = evaluate_clusters(result, repo_of)
    assert retained == {0, 1, 2} - {2}
    assert reasons[2] == [P2]
    assert reasons[3] == [P1]


def test_standardize_columns_zero_mean_unit_std():
    from qdelta.cluster import standardize_columns

    rng = np.random.RandomState(6)
    x = rng.randn(40, 5) * np.array([1.0, 10.0, 0.0, 2.0, 5.0]) + 3.0
    z = standardize_columns(x)
    assert np.allclose(z.mean(axis=0), 0.0, atol=1e-12)
    stds = z.std(axis=0)
    assert np.allclose(stds[[0, 1, 3, 4]], 1.0, atol=1e-12)
    assert np.allclose(z[:, 2], 0.0)  # constant column stays put


def test_impute_matrix_zeroes_undefined_components():
    vec = ImpactVector(
        modification_id="v",
        repo="r/a",
        method_deltas=tuple([None] + [1.0] * 17),
        class_deltas=tuple([None] * 2 + [2.0] * 12),
        affected_methods=1,
        affected_classes=1,
    )
    matrix = impute_matrix([vec])
    assert matrix.shape == (1, 32)
    assert matrix[0, 0] == 0.0
    assert matrix[0, 1] == 1.0
    assert matrix[0, 18] == 0.0
    assert matrix[0, 20] == 2.0


def test_build_result_mean_is_mean_of_point_scores():
    rng = np.random.RandomState(21)
    x, _ = blobs(rng, [(0, 0), (6, 6)], per_blob=10)
    ids = [f"m{i}" for i in range(len(x))]
    labels, centroids, _ = kmeans(x, k=2, seed=4)
    result = build_result(x, ids, labels, centroids, 2, 4)
    assert result.mean_silhouette == pytest.approx(
        sum(result.point_silhouette.values()) / len(ids)
    )
