# training/kmeans.py
"""
KMeans++ seeding followed by Lloyd refinement, used for data-dependent
codebook (re)initialization.
"""
import logging

import numpy as np
from scipy.spatial.distance import cdist
from sklearn.cluster import kmeans_plusplus

from core.errors import PreconditionError
from core.rng import Rng
from core.types import Codebook, as_embeddings

logger = logging.getLogger("pivq.kmeans")

DEFAULT_LLOYD_ITERATIONS = 10
DUPLICATE_JITTER = 1e-6


def distortion(samples, centroids) -> float:
    """Mean squared distance from each sample to its closest centroid."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.shape[0] == 0:
        return 0.0
    return float(cdist(samples, np.asarray(centroids, dtype=np.float64), metric="sqeuclidean").min(axis=1).mean())


def lloyd(samples: np.ndarray, centroids: np.ndarray, iterations: int) -> np.ndarray:
    """
    Plain Lloyd iterations. A centroid that loses all its samples stays where it is.
    Ties go to the lowest centroid index.
    """
    centroids = np.array(centroids, dtype=np.float64)
    k = centroids.shape[0]
    for _ in range(iterations):
        labels = cdist(samples, centroids, metric="sqeuclidean").argmin(axis=1)
        counts = np.bincount(labels, minlength=k)
        sums = np.zeros_like(centroids)
        np.add.at(sums, labels, samples)
        filled = counts > 0
        updated = centroids.copy()
        updated[filled] = sums[filled] / counts[filled, None]
        if np.array_equal(updated, centroids):
            break
        centroids = updated
    return centroids


def kmeanspp_init(samples, k: int, rng: Rng, lloyd_iterations: int = DEFAULT_LLOYD_ITERATIONS) -> Codebook:
    """
    Fit a K-entry codebook to `samples`.

    Seeding follows KMeans++: the first centroid is a uniform draw, each next
    one is drawn with probability proportional to the squared distance to the
    closest centroid so far (scikit-learn's greedy variant, which keeps the
    best of a few such draws). Lloyd refinement runs afterwards.

    With fewer samples than K, centroids are drawn with replacement and
    repeated draws are jittered by 1e-6 noise.

    Raises:
        PreconditionError: empty sample set or k < 1
    """
    if k < 1:
        raise PreconditionError(f"codebook size must be positive, got {k}")
    samples = as_embeddings(samples)
    n = samples.shape[0]
    if n == 0:
        raise PreconditionError("cannot initialize a codebook from zero samples")

    if n < k:
        logger.warning("Only %d samples for %d centroids; drawing with replacement", n, k)
        picks = rng.integers(0, n, size=k)
        centroids = samples[picks].copy()
        _, first = np.unique(picks, return_index=True)
        repeated = np.ones(k, dtype=bool)
        repeated[first] = False
        centroids[repeated] += rng.normal(0.0, DUPLICATE_JITTER, size=(int(repeated.sum()), samples.shape[1]))
    else:
        centroids, _ = kmeans_plusplus(samples, n_clusters=k, random_state=rng.library_seed())

    centroids = lloyd(samples, centroids, lloyd_iterations)
    logger.debug("KMeans++ init: %d samples, K=%d, distortion %.6g", n, k, distortion(samples, centroids))
    return Codebook(centroids)
