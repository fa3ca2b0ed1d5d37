"""Principal component analysis of pooled state trajectories."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InsufficientDataError

__all__ = ["PcaResult", "pca"]


@dataclass(frozen=True)
class PcaResult:
    components: np.ndarray      # (k, dim) rows, orthonormal
    variance_ratios: np.ndarray  # full spectrum, descending, sums to 1
    mean: np.ndarray            # (dim,)


def pca(data: np.ndarray, k: int | None = None) -> PcaResult:
    """PCA of a (samples, dim) matrix via SVD of the centered data.

    Rows are observations. Components are returned in descending order of
    explained variance; variance_ratios sum to one over the full spectrum
    regardless of how many components are kept.
    """
    x = np.asarray(data, dtype=np.float64)
    if x.ndim != 2:
        raise DimensionError(f"expected (samples, dim) data, got shape {x.shape}")
    n, d = x.shape
    if n < 2:
        raise InsufficientDataError(f"need at least 2 samples, got {n}")
    if k is None:
        k = min(n, d)
    if not 1 <= k <= d:
        raise DimensionError(f"k={k} out of range for dim {d}")

    mean = x.mean(axis=0)
    _, svals, vt = np.linalg.svd(x - mean, full_matrices=False)
    var = svals**2
    total = var.sum()
    if total == 0.0:
        # Degenerate constant data: define a flat spectrum.
        ratios = np.full(min(n, d), 1.0 / min(n, d))
    else:
        ratios = var / total
    return PcaResult(components=vt[:k].copy(), variance_ratios=ratios.copy(), mean=mean)
