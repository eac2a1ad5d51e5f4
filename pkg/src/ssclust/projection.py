"""Gaussian random projection of the data matrix.

A seeded m x D Gaussian sketch G (entries N(0, 1/m)) maps the data to a
lower dimension while nearly preserving pairwise distances, so the
self-expressive solve can run on G @ Y instead of Y.  The 1/m variance
makes projected squared distances unbiased estimates of the originals.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InputError


@dataclass
class ProjectionMatrix:
    """Seeded Gaussian sketching matrix (m x D)."""

    values: np.ndarray
    m: int
    D: int
    seed: int


@dataclass
class DistortionReport:
    """Worst-case pairwise distance distortion of a projection.

    max_expansion = max ratio - 1 and max_contraction = 1 - min ratio,
    both clamped below at zero; pair_count is the total number of column
    pairs, skipped_pairs the zero-distance pairs excluded from ratios.
    """

    max_expansion: float
    max_contraction: float
    pair_count: int
    skipped_pairs: int = 0


def gaussian_matrix(m, D, seed):
    """Draw the m x D sketch with iid N(0, 1/m) entries, fixed fill order."""
    if m < 1 or m > D:
        raise InputError(f"need 1 <= m <= D, got m={m}, D={D}")
    rng = np.random.default_rng(seed)
    values = rng.normal(0.0, 1.0 / np.sqrt(m), size=(m, D))
    return ProjectionMatrix(values=values, m=m, D=D, seed=seed)


def project(G, Y):
    """Apply the sketch: returns G @ Y with shape (m, N)."""
    Y = np.asarray(Y, dtype=float)
    if Y.ndim != 2 or G.values.shape[1] != Y.shape[0]:
        raise InputError(
            f"projection expects {G.values.shape[1]} rows, got data of shape {Y.shape}"
        )
    return G.values @ Y


def jl_distortion(Y, Y_proj):
    """Compare pairwise column distances before and after projection."""
    Y = np.asarray(Y, dtype=float)
    Y_proj = np.asarray(Y_proj, dtype=float)
    n = Y.shape[1]
    if Y_proj.shape[1] != n:
        raise InputError(
            f"column counts differ: {n} vs {Y_proj.shape[1]}"
        )
    if n < 2:
        raise InputError("need at least two columns")

    iu, ju = np.triu_indices(n, k=1)
    orig = np.linalg.norm(Y[:, iu] - Y[:, ju], axis=0)
    proj = np.linalg.norm(Y_proj[:, iu] - Y_proj[:, ju], axis=0)
    nz = orig > 0
    skipped = int(np.count_nonzero(~nz))
    ratios = proj[nz] / orig[nz]
    if ratios.size == 0:
        return DistortionReport(0.0, 0.0, pair_count=len(iu), skipped_pairs=skipped)
    return DistortionReport(
        max_expansion=max(float(ratios.max()) - 1.0, 0.0),
        max_contraction=max(1.0 - float(ratios.min()), 0.0),
        pair_count=len(iu),
        skipped_pairs=skipped,
    )
