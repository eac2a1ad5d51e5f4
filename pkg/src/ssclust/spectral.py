"""Affinity construction and spectral clustering with eigengap model selection.

The coefficient matrix is turned into a symmetric nonnegative affinity
W = |C~| + |C~|^T (columns of C scaled to unit max magnitude first), the
symmetric normalized Laplacian of W is eigendecomposed, the cluster count
is chosen at the largest gap between consecutive ascending eigenvalues,
and the points are clustered by k-means on the row-normalized embedding.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InputError

AFFINITY_FORMULA = "colmax-abs-symmetrize"


@dataclass
class SpectralResult:
    """Spectrum, estimated cluster count, labels, and the embedding used."""

    eigenvalues: np.ndarray
    estimated_k: int
    labels: np.ndarray
    embedding: np.ndarray


def build_affinity(C):
    """Symmetric nonnegative affinity from a zero-diagonal coefficient matrix.

    Each column is scaled by the reciprocal of its max-abs entry (zero
    columns pass through), then W = |C~| + |C~|^T.
    """
    C = np.asarray(C, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise InputError(f"coefficient matrix must be square, got {C.shape}")
    if np.abs(np.diag(C)).max(initial=0.0) != 0.0:
        raise InputError("coefficient matrix must have zero diagonal")
    peaks = np.abs(C).max(axis=0)
    scaled = np.abs(C) / np.where(peaks > 0, peaks, 1.0)
    return scaled + scaled.T


def normalized_laplacian(W):
    """Symmetric normalized Laplacian I - D^{-1/2} W D^{-1/2}.

    Degree-zero vertices get an all-zero row and column (diagonal
    included), so each isolated vertex contributes one zero eigenvalue.
    """
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise InputError(f"affinity must be square, got {W.shape}")
    if W.min(initial=0.0) < 0:
        raise InputError("affinity has negative entries")
    deg = W.sum(axis=1)
    inv_sqrt = np.where(deg > 0, 1.0 / np.sqrt(np.where(deg > 0, deg, 1.0)), 0.0)
    L = -inv_sqrt[:, None] * W * inv_sqrt[None, :]
    np.fill_diagonal(L, np.where(deg > 0, 1.0, 0.0))
    return (L + L.T) / 2.0


def symmetric_eigendecomposition(S, tol=1e-10):
    """Eigenvalues (ascending) and orthonormal eigenvectors of symmetric S."""
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise InputError(f"matrix must be square, got {S.shape}")
    if np.abs(S - S.T).max(initial=0.0) > tol:
        raise InputError("matrix is not symmetric")
    eigenvalues, eigenvectors = np.linalg.eigh(S)
    return eigenvalues, eigenvectors


def estimate_num_clusters(eigenvalues, k_max):
    """Index of the largest gap between consecutive ascending eigenvalues.

    Returns the k in [1, k_max] maximizing eigenvalues[k] - eigenvalues[k-1]
    (0-based), ties broken toward smaller k.
    """
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    if eigenvalues.size == 0:
        raise InputError("empty spectrum")
    if not 1 <= k_max <= eigenvalues.size - 1:
        raise InputError(
            f"need 1 <= k_max <= {eigenvalues.size - 1}, got {k_max}"
        )
    gaps = eigenvalues[1 : k_max + 1] - eigenvalues[:k_max]
    return int(np.argmax(gaps)) + 1


def kmeans(points, k, seed=0, restarts=10):
    """Best-of-restarts Lloyd iterations with distance-weighted seeding.

    Each restart r seeds its own generator with seed + r, picks centers
    greedily with probability proportional to squared distance from the
    chosen ones, and runs Lloyd until the assignment reaches a fixpoint
    (at most 300 iterations).  The run with the lowest within-cluster
    sum of squares wins; empty clusters are reseated at the point
    farthest from its center, so every returned cluster is nonempty.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2:
        raise InputError(f"points must be 2-d, got shape {points.shape}")
    n = points.shape[0]
    if k < 1 or k > n:
        raise InputError(f"need 1 <= k <= {n}, got k={k}")

    best_labels = None
    best_cost = np.inf
    for r in range(max(restarts, 1)):
        labels, cost = _lloyd_run(points, k, np.random.default_rng(seed + r))
        if cost < best_cost:
            best_cost = cost
            best_labels = labels
    return best_labels


def _lloyd_run(points, k, rng, max_iter=300):
    n = points.shape[0]
    centers = points[_weighted_seeds(points, k, rng)].copy()
    labels = np.full(n, -1)
    for _ in range(max_iter):
        dist2 = _sq_distances(points, centers)
        new_labels = dist2.argmin(axis=1)
        # reseat empty clusters at the worst-served point
        for c in range(k):
            if not (new_labels == c).any():
                far = int(dist2[np.arange(n), new_labels].argmax())
                centers[c] = points[far]
                dist2 = _sq_distances(points, centers)
                new_labels = dist2.argmin(axis=1)
        if (new_labels == labels).all():
            break
        labels = new_labels
        for c in range(k):
            members = points[labels == c]
            if len(members):
                centers[c] = members.mean(axis=0)
    cost = float(_sq_distances(points, centers)[np.arange(n), labels].sum())
    return labels, cost


def _weighted_seeds(points, k, rng):
    n = points.shape[0]
    chosen = [int(rng.integers(n))]
    while len(chosen) < k:
        d2 = _sq_distances(points, points[chosen]).min(axis=1)
        total = d2.sum()
        if total > 0:
            chosen.append(int(rng.choice(n, p=d2 / total)))
        else:
            chosen.append(int(rng.integers(n)))  # all remaining points coincide
    return chosen


def _sq_distances(points, centers):
    diff = points[:, None, :] - centers[None, :, :]
    return np.sum(diff * diff, axis=2)


def cluster(W, k_override=None, seed=0, k_max=None, restarts=10):
    """Full spectral pipeline: Laplacian, eigengap, embedding, k-means.

    Parameters
    ----------
    W : array, shape (N, N)
        Symmetric nonnegative affinity with zero diagonal.
    k_override : int, optional
        Fixed cluster count; skips eigengap estimation when given.
    seed : int
        Base seed of the k-means restarts.
    k_max : int, optional
        Largest candidate cluster count; defaults to min(N - 1, 15).
    restarts : int
        Number of k-means restarts.

    Returns
    -------
    SpectralResult with the ascending Laplacian spectrum, the cluster
    count actually used, one label per point, and the N x k eigenvector
    embedding.
    """
    W = np.asarray(W, dtype=float)
    n = W.shape[0]
    L = normalized_laplacian(W)
    eigenvalues, eigenvectors = symmetric_eigendecomposition(L)
    if k_override is not None:
        if not 1 <= k_override <= n:
            raise InputError(f"k must be in [1, {n}], got {k_override}")
        k = int(k_override)
    else:
        if k_max is None:
            k_max = min(n - 1, 15)
        k = estimate_num_clusters(eigenvalues, k_max)
    embedding = eigenvectors[:, :k]
    rows = np.linalg.norm(embedding, axis=1)
    normalized = embedding / np.where(rows > 0, rows, 1.0)[:, None]
    labels = kmeans(normalized, k, seed=seed, restarts=restarts)
    return SpectralResult(
        eigenvalues=eigenvalues,
        estimated_k=k,
        labels=labels,
        embedding=embedding,
    )
