# tests/test_sampling.py
"""
Tests for set interpolation and smooth interpolation paths.
"""
import itertools
from collections import Counter

import pytest
from scipy.stats import chisquare

from core.errors import InstanceTooLargeError, PreconditionError
from core.rng import Rng
from core.types import CodeSet
from sampling.interpolation import (
    count_paths,
    enumerate_paths,
    interpolate,
    random_smooth_path,
    smooth_path,
    split_pair,
)

A = CodeSet((1, 2, 3, 4))
B = CodeSet((3, 4, 5, 6))


class TestSplitPair:
    def test_overlapping(self):
        pair = split_pair(A, B)
        assert pair.common == CodeSet((3, 4))
        assert pair.exclusive == CodeSet((1, 2, 5, 6))
        assert (pair.side_a, pair.side_b) == ((1, 2), (5, 6))
        assert pair.side_length == 2
        assert (pair.first, pair.second) == (A, B)

    def test_identical(self):
        pair = split_pair(A, A)
        assert pair.common == A
        assert pair.exclusive.length == 0
        assert pair.side_length == 0

    def test_disjoint(self):
        pair = split_pair(CodeSet((0, 1)), CodeSet((2, 3)))
        assert pair.common.length == 0
        assert pair.side_length == 2

    def test_size_mismatch(self):
        with pytest.raises(PreconditionError):
            split_pair(A, CodeSet((1, 2)))


class TestInterpolate:
    def test_outputs_are_valid(self, rng):
        for _ in range(200):
            out = interpolate(A, B, rng)
            assert out.length == 4
            assert CodeSet((3, 4)).issubset(out)
            assert out.issubset(A | B)

    def test_identical_inputs(self, rng):
        assert interpolate(A, A, rng) == A

    def test_uniform_over_outcomes(self):
        rng = Rng(2024)
        counts = Counter(interpolate(A, B, rng) for _ in range(10_000))
        expected = {CodeSet((3, 4) + extra) for extra in itertools.combinations((1, 2, 5, 6), 2)}
        assert set(counts) == expected
        _, p_value = chisquare(list(counts.values()))
        assert p_value > 0.001

    def test_symmetric_in_inputs(self):
        forward = [interpolate(A, B, Rng(s)) for s in range(50)]
        backward = [interpolate(B, A, Rng(s)) for s in range(50)]
        assert forward == backward

    def test_size_mismatch(self, rng):
        with pytest.raises(PreconditionError):
            interpolate(A, CodeSet((1,)), rng)


class TestSmoothPath:
    def test_middle_step(self):
        path = smooth_path(split_pair(A, B), [1, 2], [5, 6])
        assert path[1] == CodeSet((1, 3, 4, 6))

    def test_endpoints(self):
        path = smooth_path(split_pair(A, B), [2, 1], [6, 5])
        assert path[0] == B
        assert path[-1] == A
        assert len(path) == 3

    def test_identical_sets(self):
        assert smooth_path(split_pair(A, A), [], []) == [A]

    def test_single_swaps(self, rng):
        a = CodeSet((0, 1, 2, 3, 4, 10))
        b = CodeSet((3, 4, 5, 6, 7, 8))
        pair = split_pair(a, b)
        path = random_smooth_path(pair, rng)
        for step, nxt in zip(path, path[1:]):
            assert step.hamming(nxt) == 2
        for step in path:
            assert step.length == 6
            assert pair.common.issubset(step)
            assert step.issubset(a | b)

    def test_reverse(self):
        pair = split_pair(A, B)
        forward = random_smooth_path(pair, Rng(9))
        backward = random_smooth_path(pair, Rng(9), reverse=True)
        assert backward == forward[::-1]
        assert backward[0] == A

    def test_invalid_permutation(self):
        with pytest.raises(PreconditionError):
            smooth_path(split_pair(A, B), [1, 5], [5, 6])


class TestPathCounts:
    def test_formula(self):
        assert count_paths(0) == 1
        assert count_paths(2) == 4
        assert count_paths(3) == 36

    def test_enumeration_matches_formula(self):
        pair = split_pair(CodeSet((0, 1, 2, 9)), CodeSet((3, 4, 5, 9)))
        assert len(enumerate_paths(pair)) == count_paths(3)

    def test_negative(self):
        with pytest.raises(PreconditionError):
            count_paths(-1)

    def test_enumeration_guard(self):
        pair = split_pair(CodeSet(tuple(range(7))), CodeSet(tuple(range(7, 14))))
        with pytest.raises(InstanceTooLargeError):
            enumerate_paths(pair)
