"""Grouping filtered sites by content similarity: seeded k-means.

Plain Lloyd iterations over dense centroids with k-means++ seeding.
Squared Euclidean distance on unit-norm vectors is monotone in cosine
distance, so the update step stays exact. Dense centroids over sparse
points are fine at desk scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BadClusterError, BadKError, DimMismatchError
from .textfeat import TermVector, Vocabulary

_MAX_ITER = 300


@dataclass
class ClusterModel:
    k: int
    centroids: np.ndarray            # (k, dim)
    seed: int
    inertia: float
    inertia_history: list[float] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return self.centroids.shape[1]


def _densify(vectors, dim: int) -> np.ndarray:
    X = np.zeros((len(vectors), dim))
    for row, vec in enumerate(vectors):
        for idx, w in vec.weights.items():
            X[row, idx] = w
    return X


def _sq_dists(X: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    diff = X[:, None, :] - centroids[None, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def _plus_plus_init(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    centroids = np.empty((k, X.shape[1]))
    centroids[0] = X[int(rng.integers(n))]
    closest = np.sum((X - centroids[0]) ** 2, axis=1)
    for j in range(1, k):
        total = float(closest.sum())
        if total <= 0.0:
            pick = int(rng.integers(n))
        else:
            cut = rng.random() * total
            pick = int(np.searchsorted(np.cumsum(closest), cut))
            pick = min(pick, n - 1)
        centroids[j] = X[pick]
        closest = np.minimum(closest, np.sum((X - centroids[j]) ** 2, axis=1))
    return centroids


def kmeans_fit(vectors: list[TermVector], k: int, seed: int,
               dim: int | None = None) -> ClusterModel:
    """Fit k clusters; deterministic for a given seed.

    Empty clusters are reseeded with the point farthest from its current
    centroid. Stops when assignments are stable or after 300 iterations.
    """
    if not 1 <= k <= len(vectors):
        raise BadKError(f"k={k} with {len(vectors)} vectors")
    if dim is None:
        dim = 1 + max((max(v.weights) for v in vectors if v.weights), default=-1)
    if dim <= 0:
        raise BadKError("vectors carry no features")

    X = _densify(vectors, dim)
    rng = np.random.default_rng(seed)
    centroids = _plus_plus_init(X, k, rng)

    assignments = np.full(len(vectors), -1)
    history: list[float] = []
    for _ in range(_MAX_ITER):
        dists = _sq_dists(X, centroids)
        new_assignments = dists.argmin(axis=1)
        point_dists = dists[np.arange(len(vectors)), new_assignments]

        empty = [j for j in range(k) if not np.any(new_assignments == j)]
        if empty:
            # Give each empty cluster the current worst-served point.
            order = np.argsort(-point_dists, kind="stable")
            for j, idx in zip(empty, order):
                centroids[j] = X[idx]
            dists = _sq_dists(X, centroids)
            new_assignments = dists.argmin(axis=1)
            point_dists = dists[np.arange(len(vectors)), new_assignments]

        history.append(float(point_dists.sum()))
        if np.array_equal(new_assignments, assignments):
            break
        assignments = new_assignments
        for j in range(k):
            members = X[assignments == j]
            if len(members):
                centroids[j] = members.mean(axis=0)

    dists = _sq_dists(X, centroids)
    inertia = float(dists.min(axis=1).sum())
    return ClusterModel(k=k, centroids=centroids, seed=seed,
                        inertia=inertia, inertia_history=history)


def assign(model: ClusterModel, vec: TermVector) -> int:
    """Nearest centroid by squared distance; ties go to the lowest id."""
    if vec.weights and max(vec.weights) >= model.dim:
        raise DimMismatchError("vector index exceeds model dimension")
    dense = np.zeros(model.dim)
    for idx, w in vec.weights.items():
        dense[idx] = w
    dists = np.sum((model.centroids - dense) ** 2, axis=1)
    return int(dists.argmin())


def top_terms(model: ClusterModel, cluster_id: int, vocab: Vocabulary,
              m: int) -> list[str]:
    """The m heaviest centroid terms, descending weight, ties lexicographic."""
    if not 0 <= cluster_id < model.k:
        raise BadClusterError(f"cluster {cluster_id} out of range")
    centroid = model.centroids[cluster_id]
    order = sorted(range(min(len(vocab), model.dim)),
                   key=lambda i: (-centroid[i], vocab.terms[i]))
    return [vocab.terms[i] for i in order[:max(0, m)]]
