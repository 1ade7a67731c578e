# analysis/capacity.py
"""
Information capacity of discrete bottlenecks.

Capacity is log2 of the number of distinct representations a bottleneck can
emit. Counts are exact Python integers (math.comb) and are converted to bits
only at the end, so no Stirling-type approximation enters the result.

Models:
    standard   L positions, each any of K codes: L * log2(K)
    nearest    a working subset of K_img codes out of K_data, then a multiset
               of size L over that subset (stars and bars):
               log2[C(K_data, K_img) * C(L + K_img - 1, K_img - 1)]
               This is an upper bound; the product double counts multisets
               that use fewer than K_img distinct codes.
    matching   exactly L distinct codes out of K_data: log2 C(K_data, L)
"""
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, model_validator
from scipy.special import gammaln

from core.errors import InstanceTooLargeError, PreconditionError

logger = logging.getLogger("pivq.capacity")

ENUMERATION_MAX_K_DATA = 8
ENUMERATION_MAX_LENGTH = 6
_MANTISSA_BITS = 53


class CapacityParams(BaseModel):
    """Dataset usage K_data, per-image usage K_img and representation length L."""

    k_data: int = Field(..., ge=1)
    k_img: int = Field(..., ge=1)
    length: int = Field(..., ge=1)

    @model_validator(mode="after")
    def _check_usage(self) -> "CapacityParams":
        if self.k_img > self.k_data:
            raise ValueError(f"k_img ({self.k_img}) cannot exceed k_data ({self.k_data})")
        if self.k_img > self.length:
            raise ValueError(f"k_img ({self.k_img}) cannot exceed length ({self.length})")
        return self


def binomial(n: int, r: int) -> int:
    """Exact binomial coefficient; 0 when r > n."""
    if n < 0 or r < 0:
        raise PreconditionError(f"binomial needs non-negative arguments, got ({n}, {r})")
    return math.comb(n, r)


def log2_of(x: int) -> float:
    """
    log2 of a positive arbitrary-precision integer.

    Uses the top 53 bits as a float mantissa plus the shifted-out bit count,
    so the relative error stays at double precision for any size of x.

    Raises:
        PreconditionError: x < 1
    """
    x = int(x)
    if x < 1:
        raise PreconditionError(f"log2_of needs x >= 1, got {x}")
    shift = max(0, x.bit_length() - _MANTISSA_BITS)
    return math.log2(x >> shift) + shift


def log2_binomial_lgamma(n: int, r: int) -> float:
    """Floating-point log2 C(n, r) through log-gamma; used to cross-check the exact path."""
    return float((gammaln(n + 1) - gammaln(r + 1) - gammaln(n - r + 1)) / math.log(2))


def working_subset_count(params: CapacityParams) -> int:
    """Ways to choose K_img unique codes out of K_data."""
    return binomial(params.k_data, params.k_img)


def multiset_count(length: int, k_img: int) -> int:
    """
    Multisets of size L over K_img symbols (stars and bars).

    Raises:
        PreconditionError: k_img < 1 or length < 0
    """
    if k_img < 1:
        raise PreconditionError(f"multiset_count needs k_img >= 1, got {k_img}")
    if length < 0:
        raise PreconditionError(f"multiset_count needs length >= 0, got {length}")
    return binomial(length + k_img - 1, k_img - 1)


def _params(k_data: Union[int, CapacityParams], k_img: Optional[int], length: Optional[int]) -> CapacityParams:
    if isinstance(k_data, CapacityParams):
        return k_data
    return CapacityParams(k_data=k_data, k_img=k_img, length=length)


def nearest_capacity_bits(
    k_data: Union[int, CapacityParams],
    k_img: Optional[int] = None,
    length: Optional[int] = None,
) -> float:
    """
    Upper bound on bits per sample for nearest-neighbour quantization.

    Accepts either a CapacityParams or the three integers (k_data, k_img, length).
    """
    params = _params(k_data, k_img, length)
    return log2_of(working_subset_count(params) * multiset_count(params.length, params.k_img))


def matching_capacity_bits(k_data: int, length: int) -> float:
    """
    Bits per sample for matching quantization: log2 C(K_data, L).

    Raises:
        PreconditionError: length > k_data
    """
    if length > k_data:
        raise PreconditionError(f"matching needs length <= k_data, got length={length} and k_data={k_data}")
    return log2_of(binomial(k_data, length))


def standard_vq_capacity_bits(k: int, length: int) -> float:
    """L * log2(K) for an ordered sequence of L codes."""
    if k < 1:
        raise PreconditionError(f"codebook size must be positive, got {k}")
    return length * log2_of(k)


def capacity_curve(k: int, k_img_nearest: int, lengths: Iterable[int]) -> pd.DataFrame:
    """
    Capacity of the three bottlenecks over a range of representation lengths.

    The nearest column uses K_data = K and K_img = min(k_img_nearest, L); the
    matching column is NaN where L > K.

    Returns:
        DataFrame with columns L, standard, nearest_with_fixed_K_img, matching
    """
    rows = []
    for length in lengths:
        length = int(length)
        k_img = min(k_img_nearest, length, k)
        rows.append(
            {
                "L": length,
                "standard": standard_vq_capacity_bits(k, length),
                "nearest_with_fixed_K_img": nearest_capacity_bits(k, k_img, length),
                "matching": matching_capacity_bits(k, length) if length <= k else np.nan,
            }
        )
    if any(int(row["L"]) < k_img_nearest for row in rows):
        logger.info("K_img clamped to L for lengths below %d", k_img_nearest)
    return pd.DataFrame(rows, columns=["L", "standard", "nearest_with_fixed_K_img", "matching"])


def enumerate_representations(k_data: int, length: int, model: str = "matching", k_img: Optional[int] = None) -> int:
    """
    Count distinct representations by exhaustive enumeration.

    Args:
        k_data: alphabet size (<= 8)
        length: representation length L (<= 6)
        model: "matching" counts L-subsets; "nearest" counts size-L multisets
            using at most k_img distinct codes
        k_img: per-image usage cap for the nearest model

    Raises:
        InstanceTooLargeError: above the size guard
    """
    if k_data > ENUMERATION_MAX_K_DATA or length > ENUMERATION_MAX_LENGTH:
        raise InstanceTooLargeError(
            f"enumeration supports k_data <= {ENUMERATION_MAX_K_DATA} and length <= {ENUMERATION_MAX_LENGTH}"
        )
    symbols = range(k_data)
    if model == "matching":
        return sum(1 for _ in itertools.combinations(symbols, length))
    if model == "nearest":
        cap = k_data if k_img is None else k_img
        return sum(
            1 for multiset in itertools.combinations_with_replacement(symbols, length) if len(set(multiset)) <= cap
        )
    raise PreconditionError(f"unknown model {model!r}")


@dataclass(frozen=True)
class BottleneckReport:
    k_data: int
    length: int
    k_img_nearest: int
    nearest_bits: float
    matching_bits: float
    standard_bits: float

    @property
    def ratio(self) -> float:
        """How many times more bits matching can carry than nearest."""
        return self.matching_bits / self.nearest_bits if self.nearest_bits else math.inf


def bottleneck_report(k_data: int, k_img_nearest: int, length: int) -> BottleneckReport:
    """Nearest, matching and standard capacity side by side for one configuration."""
    return BottleneckReport(
        k_data=k_data,
        length=length,
        k_img_nearest=k_img_nearest,
        nearest_bits=nearest_capacity_bits(k_data, k_img_nearest, length),
        matching_bits=matching_capacity_bits(k_data, length),
        standard_bits=standard_vq_capacity_bits(k_data, length),
    )
