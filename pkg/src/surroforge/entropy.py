"""Kozachenko-Leonenko k-nearest-neighbor differential entropy estimation.

Estimates H of an unknown density from samples alone via the distances to
each point's k-th nearest neighbor (Euclidean):

    H_hat = psi(N) - psi(k) + ln V_d + (d / N) * sum_i ln rho_k,i

with V_d the volume of the d-dimensional unit ball and psi the digamma
function. Values are in nats.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import digamma, gammaln


@dataclass(frozen=True)
class EntropyEstimate:
    value: float
    k_neighbors: int
    sample_count: int

    def __float__(self):
        return self.value


def _knn_distances(points, k):
    # an exact k-d tree query; results match brute-force search at every N
    tree = cKDTree(points)
    dist, _ = tree.query(points, k=k + 1)
    return dist[:, k]


def knn_entropy(points, k=4):
    """Kozachenko-Leonenko estimate over a batch of points.

    Raises ValueError on fewer than k+1 points, non-finite input, or
    degenerate support (some k-th neighbor at zero distance; the caller
    must jitter or deduplicate).
    """
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    if points.ndim != 2:
        raise ValueError("points must be a 2-D array (N, d)")
    if not np.all(np.isfinite(points)):
        raise ValueError("points must be finite")
    if k < 1:
        raise ValueError("k must be >= 1")
    n, d = points.shape
    if n < k + 1:
        raise ValueError(f"need at least k+1 = {k + 1} points, got {n}")
    rho = _knn_distances(points, k)
    if np.any(rho <= 0.0):
        raise ValueError(
            "degenerate support: some k-th neighbor distance is zero; "
            "jitter or deduplicate the points")
    log_vd = (d / 2.0) * math.log(math.pi) - gammaln(d / 2.0 + 1.0)
    value = (digamma(n) - digamma(k) + log_vd + d * np.mean(np.log(rho)))
    return EntropyEstimate(value=float(value), k_neighbors=int(k), sample_count=int(n))
