# quantization/quantizer.py
"""
Nearest-neighbour and matching quantization with usage accounting.

Nearest quantization maps every embedding to its closest codebook entry
independently, so a sample can reuse the same code. Matching quantization
solves a minimum-cost one-to-one assignment between the L embeddings and the
K codebook entries, so every sample uses exactly L distinct codes.
"""
import logging
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np
from joblib import Parallel, delayed
from scipy.spatial.distance import cdist

from core.config import worker_count
from core.errors import DimensionMismatchError, PreconditionError
from core.types import Codebook, CodeSet, DistanceMatrix, UsageStats, as_embeddings
from quantization.assignment import CostMatrix, solve_assignment

logger = logging.getLogger("pivq.quantizer")

METHODS = ("nearest", "matching")


@dataclass(frozen=True, eq=False)
class QuantizationResult:
    """
    Attributes:
        indices: code index per embedding, in input order
        quantized: (L, d) array, quantized[j] == codebook.entries[indices[j]]
        code_set: distinct indices
        stats: usage of this single sample
        total_distance: sum of embedding-to-code distances under the metric used
        method: "nearest" or "matching"
    """

    indices: tuple
    quantized: np.ndarray
    code_set: CodeSet
    stats: UsageStats
    total_distance: float
    method: str

    @property
    def k_img(self) -> int:
        return self.code_set.length


@dataclass(frozen=True, eq=False)
class StraightThrough:
    """
    Quantization boundary with the straight-through gradient rule.

    The forward value is z_q. backward() hands the downstream gradient to z_e
    unchanged; nothing flows into the assignment choice.
    """

    z_e: np.ndarray
    z_q: np.ndarray

    @property
    def value(self) -> np.ndarray:
        return self.z_q

    def backward(self, grad: np.ndarray) -> np.ndarray:
        grad = np.asarray(grad, dtype=np.float64)
        if grad.shape != self.z_e.shape:
            raise DimensionMismatchError(f"gradient shape {grad.shape} does not match z_e shape {self.z_e.shape}")
        return grad.copy()


def straight_through(z_e, z_q) -> StraightThrough:
    """
    Pair an encoder output with its quantized value.

    Raises:
        DimensionMismatchError: if z_e and z_q differ in shape
    """
    z_e = np.asarray(z_e, dtype=np.float64)
    z_q = np.asarray(z_q, dtype=np.float64)
    if z_e.shape != z_q.shape:
        raise DimensionMismatchError(f"z_e shape {z_e.shape} does not match z_q shape {z_q.shape}")
    return StraightThrough(z_e, z_q)


def distance_matrix(codebook: Codebook, embeddings, squared: bool = False) -> DistanceMatrix:
    """
    K x L matrix of distances between codebook entries and embeddings.

    Args:
        codebook: K entries of dimension d
        embeddings: (L, d) array
        squared: Use squared Euclidean distances instead

    Raises:
        DimensionMismatchError: embedding dimension differs from the codebook's
    """
    zs = as_embeddings(embeddings, codebook.dim)
    metric = "sqeuclidean" if squared else "euclidean"
    if zs.shape[0] == 0:
        return DistanceMatrix(np.zeros((codebook.size, 0)))
    return DistanceMatrix(cdist(codebook.entries, zs, metric=metric))


def _result(codebook: Codebook, indices: np.ndarray, distances: np.ndarray, method: str) -> QuantizationResult:
    indices = np.asarray(indices, dtype=np.int64)
    quantized = codebook.entries[indices]
    quantized.setflags(write=False)
    total = float(distances[indices, np.arange(indices.size)].sum()) if indices.size else 0.0
    return QuantizationResult(
        indices=tuple(indices.tolist()),
        quantized=quantized,
        code_set=CodeSet.from_indices(indices.tolist(), codebook.size),
        stats=UsageStats.empty(codebook.size).add_indices(indices),
        total_distance=total,
        method=method,
    )


def nearest_quantize(codebook: Codebook, embeddings, squared: bool = False) -> QuantizationResult:
    """Map every embedding to its closest entry; the lowest index wins ties."""
    dist = distance_matrix(codebook, embeddings, squared).values
    indices = np.argmin(dist, axis=0) if dist.shape[1] else np.zeros(0, dtype=np.int64)
    return _result(codebook, indices, dist, "nearest")


def matching_quantize(codebook: Codebook, embeddings, squared: bool = False) -> QuantizationResult:
    """
    Quantize by the minimum-cost one-to-one matching between embeddings and entries.

    Raises:
        PreconditionError: fewer codebook entries than embeddings
    """
    zs = as_embeddings(embeddings, codebook.dim)
    if zs.shape[0] > codebook.size:
        raise PreconditionError(
            f"matching quantization needs K >= L, got K={codebook.size} and L={zs.shape[0]}"
        )
    dist = distance_matrix(codebook, zs, squared).values
    assignment = solve_assignment(CostMatrix(dist))
    return _result(codebook, np.asarray(assignment.mapping, dtype=np.int64), dist, "matching")


def quantize(codebook: Codebook, embeddings, method: str = "matching", squared: bool = False) -> QuantizationResult:
    """Dispatch to nearest_quantize or matching_quantize by name."""
    if method == "nearest":
        return nearest_quantize(codebook, embeddings, squared)
    if method == "matching":
        return matching_quantize(codebook, embeddings, squared)
    raise PreconditionError(f"unknown quantization method {method!r}, expected one of {METHODS}")


def quantize_batch(
    codebook: Codebook,
    batch: Sequence,
    method: str = "matching",
    squared: bool = False,
) -> List[QuantizationResult]:
    """
    Quantize several samples, fanning out over PIVQ_THREADS workers.

    Results come back in input order, identical to a sequential loop.
    """
    n_jobs = min(worker_count(), max(1, len(batch)))
    if n_jobs == 1:
        return [quantize(codebook, sample, method, squared) for sample in batch]
    logger.debug("Quantizing %d samples on %d workers", len(batch), n_jobs)
    return Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(quantize)(codebook, sample, method, squared) for sample in batch
    )


def accumulate_usage(stats: UsageStats, result: QuantizationResult) -> UsageStats:
    """
    Fold one sample's indices into running usage statistics.

    Raises:
        CodeRangeError: an index is out of range for the stats' codebook size
    """
    return stats.add_indices(result.indices)
