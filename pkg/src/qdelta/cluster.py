"""K-means over impact vectors, silhouette-based model selection, and
the three cluster-retention predicates.

Everything here is deterministic for a fixed seed: initialization uses
a dedicated RandomState, iteration order is fixed, and no reduction
depends on thread scheduling.
"""
from __future__ import annotations

import numpy as np

from .records import ClusterResult, ImpactVector

MIN_CLUSTER_SIZE = 5

P1 = "P1: cluster silhouette not above the corpus mean silhouette"
P2 = f"P2: fewer than {MIN_CLUSTER_SIZE} modifications in the cluster"
P3 = "P3: modifications all come from a single repository"


class ClusteringError(ValueError):
    pass


def impute_matrix(vectors: list[ImpactVector]) -> np.ndarray:
    """Stack impact vectors into an (n, 32) float matrix, imputing
    undefined components as 0 (no measurable movement on that axis)."""
    rows = []
    for v in vectors:
        rows.append([0.0 if c is None else float(c) for c in v.components])
    return np.asarray(rows, dtype=np.float64)


def standardize_columns(matrix: np.ndarray) -> np.ndarray:
    mean = matrix.mean(axis=0)
    std = matrix.std(axis=0)
    std[std == 0] = 1.0
    return (matrix - mean) / std


def _kmeanspp_init(x: np.ndarray, k: int, rng: np.random.RandomState) -> np.ndarray:
    n = x.shape[0]
    centroids = np.empty((k, x.shape[1]), dtype=np.float64)
    first = rng.randint(n)
    centroids[0] = x[first]
    closest_sq = ((x - centroids[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = closest_sq.sum()
        if total == 0:
            idx = rng.randint(n)
        else:
            probs = closest_sq / total
            idx = int(rng.choice(n, p=probs))
        centroids[c] = x[idx]
        dist_sq = ((x - centroids[c]) ** 2).sum(axis=1)
        closest_sq = np.minimum(closest_sq, dist_sq)
    return centroids


def _assign(x: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # squared Euclidean distances, ties broken toward the lower index
    d2 = ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    labels = d2.argmin(axis=1)
    return labels, d2


def kmeans(
    x: np.ndarray,
    k: int,
    seed: int,
    max_iter: int = 300,
    inertia_history: list[float] | None = None,
) -> tuple[np.ndarray, np.ndarray, float]:
    """Lloyd iterations from a k-means++ start.

    Returns (labels, centroids, inertia). An emptied cluster is
    re-seeded at the point farthest from its assigned centroid. Pass a
    list as *inertia_history* to record the inertia after each
    assignment step.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    if not 1 <= k <= n:
        raise ClusteringError(f"k={k} outside 1..{n}")
    if not np.isfinite(x).all():
        raise ClusteringError("vectors must be finite; impute undefined components first")
    rng = np.random.RandomState(seed)
    centroids = _kmeanspp_init(x, k, rng)
    labels = np.full(n, -1, dtype=np.int64)
    for _ in range(max_iter):
        new_labels, d2 = _assign(x, centroids)
        # re-seed emptied clusters at the globally farthest point
        for c in range(k):
            if not (new_labels == c).any():
                own = d2[np.arange(n), new_labels]
                far = int(own.argmax())
                centroids[c] = x[far]
                new_labels, d2 = _assign(x, centroids)
        if inertia_history is not None:
            inertia_history.append(float(d2[np.arange(n), new_labels].sum()))
        if (new_labels == labels).all():
            break
        labels = new_labels
        for c in range(k):
            members = x[labels == c]
            if len(members):
                centroids[c] = members.mean(axis=0)
    labels, d2 = _assign(x, centroids)
    inertia = float(d2[np.arange(n), labels].sum())
    return labels, centroids, inertia


def silhouette_scores(x: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Per-point silhouette with Euclidean distance.

    a(i): mean distance to the other members of i's cluster.
    b(i): smallest mean distance to the members of any other cluster.
    s(i) = (b - a) / max(a, b); members of singleton clusters score 0.
    """
    x = np.asarray(x, dtype=np.float64)
    labels = np.asarray(labels)
    n = x.shape[0]
    unique = np.unique(labels)
    if len(unique) < 2:
        raise ClusteringError("silhouette requires at least 2 clusters")
    diff = x[:, None, :] - x[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=2))
    scores = np.zeros(n, dtype=np.float64)
    sizes = {c: int((labels == c).sum()) for c in unique}
    for i in range(n):
        own = labels[i]
        if sizes[own] == 1:
            scores[i] = 0.0
            continue
        mask_own = labels == own
        a = dist[i, mask_own].sum() / (sizes[own] - 1)
        b = min(
            dist[i, labels == other].mean() for other in unique if other != own
        )
        denom = max(a, b)
        scores[i] = (b - a) / denom if denom > 0 else 0.0
    return scores


def select_k(
    x: np.ndarray,
    ids: list[str],
    k_min: int,
    k_max: int,
    restarts: int = 10,
    seed: int = 0,
) -> ClusterResult:
    """Sweep k, keep the best-of-restarts run per k by inertia, and pick
    the k with the highest mean silhouette (ties to the smaller k)."""
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    if not 2 <= k_min <= k_max <= n - 1:
        raise ClusteringError(f"need 2 <= k_min <= k_max <= n-1, got {k_min}..{k_max} for n={n}")
    rng = np.random.RandomState(seed)
    restart_seeds = [int(s) for s in rng.randint(0, 2**31 - 1, size=(k_max - k_min + 1) * restarts)]
    best: tuple[float, int, np.ndarray, np.ndarray] | None = None  # (-mean_sil, k, labels, centroids)
    si = 0
    for k in range(k_min, k_max + 1):
        run_best: tuple[float, np.ndarray, np.ndarray] | None = None
        for _ in range(restarts):
            labels, centroids, inertia = kmeans(x, k, seed=restart_seeds[si])
            si += 1
            if run_best is None or inertia < run_best[0]:
                run_best = (inertia, labels, centroids)
        assert run_best is not None
        _, labels, centroids = run_best
        mean_sil = float(silhouette_scores(x, labels).mean())
        if best is None or mean_sil > best[0]:
            best = (mean_sil, k, labels, centroids)
    assert best is not None
    mean_sil, k, labels, centroids = best
    return build_result(x, ids, labels, centroids, k, seed)


def build_result(
    x: np.ndarray,
    ids: list[str],
    labels: np.ndarray,
    centroids: np.ndarray,
    k: int,
    seed: int,
) -> ClusterResult:
    scores = silhouette_scores(x, labels)
    cluster_sil = {
        int(c): float(scores[labels == c].mean()) for c in np.unique(labels)
    }
    return ClusterResult(
        k=k,
        seed=seed,
        assignment={ids[i]: int(labels[i]) for i in range(len(ids))},
        centroids=[[float(v) for v in row] for row in centroids],
        point_silhouette={ids[i]: float(scores[i]) for i in range(len(ids))},
        cluster_silhouette=cluster_sil,
        mean_silhouette=float(scores.mean()),
        retained=set(),
        rejection_reasons={},
    )


def evaluate_clusters(
    result: ClusterResult, repo_of: dict[str, str]
) -> tuple[set[int], dict[int, list[str]]]:
    """Apply the three retention predicates and record, for each
    rejected cluster, exactly the predicates it failed.

    P1: cluster silhouette above the mean silhouette of all points.
    P2: at least MIN_CLUSTER_SIZE members.
    P3: members spread across more than one repository.
    """
    retained: set[int] = set()
    reasons: dict[int, list[str]] = {}
    members_of: dict[int, list[str]] = {}
    for mod_id, c in result.assignment.items():
        members_of.setdefault(c, []).append(mod_id)
    for c, members in sorted(members_of.items()):
        failed: list[str] = []
        if not result.cluster_silhouette[c] > result.mean_silhouette:
            failed.append(P1)
        if len(members) < MIN_CLUSTER_SIZE:
            failed.append(P2)
        if len({repo_of[m] for m in members}) < 2:
            failed.append(P3)
        if failed:
            reasons[c] = failed
        else:
            retained.add(c)
    result.retained = retained
    result.rejection_reasons = reasons
    return retained, reasons
