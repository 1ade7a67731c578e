# core/types.py
"""
Domain value types.

All types are immutable after construction: numpy payloads are copied to
float64/int64 and marked read-only, so instances can be shared freely between
workers. Embeddings are plain read-only float64 vectors; a list of L embeddings
is an (L, d) array.
"""
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence, Tuple

import numpy as np

from core.errors import CodeRangeError, DimensionMismatchError, PreconditionError


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def as_embedding(values, dim: Optional[int] = None) -> np.ndarray:
    """
    Validate and freeze a single embedding.

    Args:
        values: Sequence of d reals
        dim: Expected latent dimension, if known

    Returns:
        Read-only float64 vector

    Raises:
        DimensionMismatchError: wrong shape or length
        PreconditionError: NaN or infinite entries
    """
    vector = np.array(values, dtype=np.float64)
    if vector.ndim != 1:
        raise DimensionMismatchError(f"embedding must be 1-dimensional, got shape {vector.shape}")
    if dim is not None and vector.shape[0] != dim:
        raise DimensionMismatchError(f"embedding has dimension {vector.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(vector)):
        raise PreconditionError("embedding contains non-finite values")
    return _frozen(vector)


def as_embeddings(values, dim: Optional[int] = None) -> np.ndarray:
    """Validate and freeze a list of embeddings as an (L, d) array. L may be 0."""
    array = np.array(values, dtype=np.float64)
    if array.ndim == 1 and array.size == 0:
        array = array.reshape(0, dim or 0)
    if array.ndim != 2:
        raise DimensionMismatchError(f"embeddings must form an (L, d) array, got shape {array.shape}")
    if dim is not None and array.shape[1] != dim:
        raise DimensionMismatchError(f"embeddings have dimension {array.shape[1]}, expected {dim}")
    if not np.all(np.isfinite(array)):
        raise PreconditionError("embeddings contain non-finite values")
    return _frozen(array)


def euclidean_distance(a, b) -> float:
    """
    Euclidean distance ||a - b||_2 between two embeddings.

    Raises:
        DimensionMismatchError: if the embeddings differ in length
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionMismatchError(f"cannot compare embeddings of shapes {a.shape} and {b.shape}")
    return float(np.linalg.norm(a - b))


@dataclass(frozen=True)
class Codebook:
    """Ordered collection of K vectors in R^d, stored as a read-only (K, d) array."""

    entries: np.ndarray

    def __post_init__(self):
        entries = np.array(self.entries, dtype=np.float64)
        if entries.ndim != 2:
            raise DimensionMismatchError(f"codebook must be a (K, d) array, got shape {entries.shape}")
        if entries.shape[0] < 1:
            raise PreconditionError("codebook must contain at least one entry")
        if not np.all(np.isfinite(entries)):
            raise PreconditionError("codebook contains non-finite values")
        object.__setattr__(self, "entries", _frozen(entries))

    @property
    def size(self) -> int:
        return int(self.entries.shape[0])

    @property
    def dim(self) -> int:
        return int(self.entries.shape[1])

    def __len__(self) -> int:
        return self.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, Codebook):
            return NotImplemented
        return self.entries.shape == other.entries.shape and bool(np.array_equal(self.entries, other.entries))

    def __hash__(self) -> int:
        return hash((self.entries.shape, self.entries.tobytes()))


@dataclass(frozen=True)
class CodeSet:
    """
    Permutation-invariant representation of one sample: distinct code indices.

    Stored canonically as a sorted tuple, so two CodeSets with the same members
    are equal, hash equally and serialize identically.
    """

    codes: Tuple[int, ...] = ()

    def __post_init__(self):
        codes = tuple(sorted({int(c) for c in self.codes}))
        if codes and codes[0] < 0:
            raise CodeRangeError(f"negative code index {codes[0]}")
        object.__setattr__(self, "codes", codes)

    @classmethod
    def from_indices(cls, indices: Iterable[int], codebook_size: Optional[int] = None) -> "CodeSet":
        """Build a CodeSet from possibly repeated indices, checking the range when K is known."""
        code_set = cls(tuple(int(i) for i in indices))
        if codebook_size is not None:
            code_set.check_range(codebook_size)
        return code_set

    def check_range(self, codebook_size: int) -> None:
        if self.codes and self.codes[-1] >= codebook_size:
            raise CodeRangeError(f"code {self.codes[-1]} out of range for codebook of size {codebook_size}")

    @property
    def length(self) -> int:
        """Cardinality L of the set."""
        return len(self.codes)

    def __len__(self) -> int:
        return len(self.codes)

    def __iter__(self) -> Iterator[int]:
        return iter(self.codes)

    def __contains__(self, code) -> bool:
        return int(code) in set(self.codes)

    def __and__(self, other: "CodeSet") -> "CodeSet":
        return CodeSet(tuple(set(self.codes) & set(other.codes)))

    def __or__(self, other: "CodeSet") -> "CodeSet":
        return CodeSet(tuple(set(self.codes) | set(other.codes)))

    def __sub__(self, other: "CodeSet") -> "CodeSet":
        return CodeSet(tuple(set(self.codes) - set(other.codes)))

    def __xor__(self, other: "CodeSet") -> "CodeSet":
        return CodeSet(tuple(set(self.codes) ^ set(other.codes)))

    def issubset(self, other: "CodeSet") -> bool:
        return set(self.codes) <= set(other.codes)

    def hamming(self, other: "CodeSet") -> int:
        """Size of the symmetric difference."""
        return len(set(self.codes) ^ set(other.codes))

    def to_list(self) -> list:
        return list(self.codes)


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """K x L matrix of Euclidean distances between codebook entries (rows) and embeddings (columns)."""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise DimensionMismatchError(f"distance matrix must be 2-dimensional, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise PreconditionError("distance matrix contains non-finite values")
        if np.any(values < 0):
            raise PreconditionError("distance matrix contains negative values")
        object.__setattr__(self, "values", _frozen(values))

    @property
    def rows(self) -> int:
        return int(self.values.shape[0])

    @property
    def cols(self) -> int:
        return int(self.values.shape[1])

    def matches(self, codebook: Codebook, embeddings, rtol: float = 1e-12, atol: float = 1e-12) -> bool:
        """Check every entry against a direct euclidean_distance recomputation."""
        embeddings = as_embeddings(embeddings, codebook.dim)
        if (self.rows, self.cols) != (codebook.size, embeddings.shape[0]):
            return False
        for i in range(self.rows):
            for j in range(self.cols):
                expected = euclidean_distance(codebook.entries[i], embeddings[j])
                if not math.isclose(self.values[i, j], expected, rel_tol=rtol, abs_tol=atol):
                    return False
        return True


@dataclass(frozen=True)
class Assignment:
    """One-to-one mapping from L embedding columns to L distinct codebook rows."""

    mapping: Tuple[int, ...]
    total_cost: float

    def __post_init__(self):
        mapping = tuple(int(r) for r in self.mapping)
        if len(set(mapping)) != len(mapping):
            raise PreconditionError(f"assignment is not injective: {mapping}")
        object.__setattr__(self, "mapping", mapping)
        object.__setattr__(self, "total_cost", float(self.total_cost))

    @classmethod
    def from_mapping(cls, values: np.ndarray, mapping: Sequence[int]) -> "Assignment":
        """Build an Assignment whose cost is the exactly-rounded sum of the selected entries."""
        total = math.fsum(float(values[row, col]) for col, row in enumerate(mapping))
        return cls(tuple(mapping), total)

    def __len__(self) -> int:
        return len(self.mapping)


@dataclass(frozen=True, eq=False)
class UsageStats:
    """
    Codebook usage counters.

    Attributes:
        codebook_size: K
        histogram: per-code use counts (read-only int64 array of length K)
        per_image_usage: K_img of the most recently accumulated sample
        max_per_image_usage: running maximum of K_img
        samples: number of samples accumulated
    """

    codebook_size: int
    histogram: np.ndarray = field(default=None)
    per_image_usage: int = 0
    max_per_image_usage: int = 0
    samples: int = 0

    def __post_init__(self):
        if self.codebook_size < 1:
            raise PreconditionError("codebook_size must be positive")
        histogram = (
            np.zeros(self.codebook_size, dtype=np.int64)
            if self.histogram is None
            else np.array(self.histogram, dtype=np.int64)
        )
        if histogram.shape != (self.codebook_size,):
            raise DimensionMismatchError(
                f"histogram has shape {histogram.shape}, expected ({self.codebook_size},)"
            )
        object.__setattr__(self, "histogram", _frozen(histogram))

    @classmethod
    def empty(cls, codebook_size: int) -> "UsageStats":
        return cls(codebook_size)

    @property
    def dataset_usage(self) -> int:
        """K_data: number of distinct codes seen over all samples."""
        return int(np.count_nonzero(self.histogram))

    @property
    def dead_codes(self) -> int:
        return self.codebook_size - self.dataset_usage

    def add_indices(self, indices: Sequence[int]) -> "UsageStats":
        """Return new stats with one more sample whose code indices are `indices`."""
        indices = np.asarray(indices, dtype=np.int64)
        if indices.size and (indices.min() < 0 or indices.max() >= self.codebook_size):
            raise CodeRangeError(f"code index out of range for codebook of size {self.codebook_size}")
        histogram = self.histogram + np.bincount(indices, minlength=self.codebook_size)
        k_img = int(np.unique(indices).size)
        return UsageStats(
            codebook_size=self.codebook_size,
            histogram=histogram,
            per_image_usage=k_img,
            max_per_image_usage=max(self.max_per_image_usage, k_img),
            samples=self.samples + 1,
        )

    def merge(self, other: "UsageStats") -> "UsageStats":
        """Associative, commutative merge: histogram addition and max of K_img."""
        if other.codebook_size != self.codebook_size:
            raise DimensionMismatchError("cannot merge usage stats of different codebook sizes")
        return UsageStats(
            codebook_size=self.codebook_size,
            histogram=self.histogram + other.histogram,
            per_image_usage=max(self.per_image_usage, other.per_image_usage),
            max_per_image_usage=max(self.max_per_image_usage, other.max_per_image_usage),
            samples=self.samples + other.samples,
        )
