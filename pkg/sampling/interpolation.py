# sampling/interpolation.py
"""
Interpolation between two samples' CodeSets.

Codes shared by both samples are kept; the remaining slots are filled from the
codes that only one of the two uses. interpolate() fills them at random,
smooth_path() walks from one sample to the other swapping one code per step.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from typing import List, Sequence, Set, Tuple

from core.errors import InstanceTooLargeError, PreconditionError
from core.rng import Rng
from core.types import CodeSet

logger = logging.getLogger("pivq.sampling")

ENUMERATION_MAX_SIDE = 6


@dataclass(frozen=True)
class InterpolationPair:
    """
    Attributes:
        common: codes in both sets
        exclusive: codes in exactly one set
        side_a: codes only in the first set, ascending
        side_b: codes only in the second set, ascending
    """

    common: CodeSet
    exclusive: CodeSet
    side_a: Tuple[int, ...]
    side_b: Tuple[int, ...]

    @property
    def side_length(self) -> int:
        return len(self.side_a)

    @property
    def first(self) -> CodeSet:
        return self.common | CodeSet(self.side_a)

    @property
    def second(self) -> CodeSet:
        return self.common | CodeSet(self.side_b)


def _check_sizes(a: CodeSet, b: CodeSet) -> None:
    if a.length != b.length:
        raise PreconditionError(f"CodeSets must have equal size, got {a.length} and {b.length}")


def split_pair(a: CodeSet, b: CodeSet) -> InterpolationPair:
    """
    Raises:
        PreconditionError: the sets differ in size
    """
    _check_sizes(a, b)
    return InterpolationPair(
        common=a & b,
        exclusive=a ^ b,
        side_a=(a - b).codes,
        side_b=(b - a).codes,
    )


def interpolate(a: CodeSet, b: CodeSet, rng: Rng) -> CodeSet:
    """
    Sample a CodeSet between `a` and `b`.

    Starts from the shared codes and adds codes drawn uniformly without
    replacement from the exclusive ones until the size matches the inputs.
    The exclusive pool is kept in ascending order, so swapping `a` and `b`
    does not change the outcome for a given rng state.

    Raises:
        PreconditionError: the sets differ in size
    """
    _check_sizes(a, b)
    chosen = set((a & b).codes)
    pool = list((a ^ b).codes)
    while len(chosen) < a.length:
        chosen.add(pool.pop(int(rng.integers(0, len(pool)))))
    return CodeSet(tuple(chosen))


def _check_permutation(perm: Sequence[int], side: Tuple[int, ...], name: str) -> List[int]:
    perm = [int(c) for c in perm]
    if sorted(perm) != list(side):
        raise PreconditionError(f"{name} {perm} is not a permutation of {list(side)}")
    return perm


def smooth_path(pair: InterpolationPair, perm_a: Sequence[int], perm_b: Sequence[int]) -> List[CodeSet]:
    """
    Path of |R| + 1 CodeSets from the second set (t = 0) to the first (t = |R|).

    Step t holds the shared codes, the first t codes of perm_a and the last
    |R| - t codes of perm_b, so consecutive steps differ by one swapped code.

    Raises:
        PreconditionError: perm_a or perm_b is not a permutation of its side
    """
    perm_a = _check_permutation(perm_a, pair.side_a, "perm_a")
    perm_b = _check_permutation(perm_b, pair.side_b, "perm_b")
    common = set(pair.common.codes)
    return [CodeSet(tuple(common.union(perm_a[:t], perm_b[t:]))) for t in range(pair.side_length + 1)]


def random_smooth_path(pair: InterpolationPair, rng: Rng, reverse: bool = False) -> List[CodeSet]:
    """Smooth path with both sides shuffled uniformly at random."""
    path = smooth_path(pair, rng.permutation(pair.side_a), rng.permutation(pair.side_b))
    return path[::-1] if reverse else path


def count_paths(side_length: int) -> int:
    """Number of distinct smooth paths for |R| = side_length: (|R|!)^2."""
    if side_length < 0:
        raise PreconditionError(f"side length must be non-negative, got {side_length}")
    return math.factorial(side_length) ** 2


def enumerate_paths(pair: InterpolationPair) -> Set[Tuple[CodeSet, ...]]:
    """
    Every distinct path over all permutation pairs.

    Raises:
        InstanceTooLargeError: |R| > 6
    """
    if pair.side_length > ENUMERATION_MAX_SIDE:
        raise InstanceTooLargeError(f"path enumeration supports |R| <= {ENUMERATION_MAX_SIDE}")
    return {
        tuple(smooth_path(pair, perm_a, perm_b))
        for perm_a in itertools.permutations(pair.side_a)
        for perm_b in itertools.permutations(pair.side_b)
    }
