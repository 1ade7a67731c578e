# tests/test_quantizer.py
"""
Tests for nearest and matching quantization, straight-through semantics and usage accounting.
"""
import numpy as np
import pytest

from core.errors import CodeRangeError, DimensionMismatchError, PreconditionError
from core.rng import Rng
from core.types import Codebook, UsageStats, euclidean_distance
from quantization.quantizer import (
    accumulate_usage,
    distance_matrix,
    matching_quantize,
    nearest_quantize,
    quantize,
    quantize_batch,
    straight_through,
)


def _random_instances(count, seed=0):
    rng = Rng(seed)
    for _ in range(count):
        length = int(rng.integers(1, 9))
        k = int(rng.integers(length, 4 * length + 1))
        d = int(rng.integers(1, 4))
        yield Codebook(rng.normal(size=(k, d))), rng.normal(size=(length, d))


class TestDistanceMatrix:
    def test_one_dimensional(self):
        assert distance_matrix(Codebook([[0.0], [1.0]]), [[0.0]]).values.tolist() == [[0.0], [1.0]]

    def test_self_distance_diagonal(self, small_codebook):
        values = distance_matrix(small_codebook, small_codebook.entries).values
        assert np.all(np.diag(values) == 0.0)

    def test_matches_direct_recomputation(self, rng):
        codebook = Codebook(rng.normal(size=(4, 3)))
        embeddings = rng.normal(size=(3, 3))
        matrix = distance_matrix(codebook, embeddings)
        assert (matrix.rows, matrix.cols) == (4, 3)
        assert matrix.matches(codebook, embeddings)
        assert matrix.values[2, 1] == pytest.approx(euclidean_distance(codebook.entries[2], embeddings[1]))

    def test_squared_option(self, small_codebook):
        values = distance_matrix(small_codebook, [[2.0, 0.0]], squared=True).values
        assert values[:, 0].tolist() == [4.0, 1.0, 5.0, 2.0]

    def test_dimension_mismatch(self, small_codebook):
        with pytest.raises(DimensionMismatchError):
            distance_matrix(small_codebook, [[1.0, 2.0, 3.0]])


class TestNearest:
    def test_hand_example(self):
        result = nearest_quantize(Codebook([[0.0], [10.0]]), [[1.0], [2.0], [9.0]])
        assert result.indices == (0, 0, 1)
        assert result.k_img == 2

    def test_exact_entries(self, small_codebook):
        result = nearest_quantize(small_codebook, small_codebook.entries)
        assert result.indices == (0, 1, 2, 3)
        assert result.k_img == 4

    def test_lowest_index_wins_ties(self):
        result = nearest_quantize(Codebook([[0.0], [2.0]]), [[1.0], [1.0]])
        assert result.indices == (0, 0)

    def test_idempotent_on_quantized_vectors(self, rng):
        codebook = Codebook(rng.normal(size=(6, 2)))
        first = nearest_quantize(codebook, rng.normal(size=(5, 2)))
        assert nearest_quantize(codebook, first.quantized).indices == first.indices


class TestMatching:
    def test_single_embedding_agrees_with_nearest_despite_far_entry(self):
        codebook = Codebook([[0.0], [1e-5], [1e7]])
        embeddings = [[1e-5]]
        matched = matching_quantize(codebook, embeddings)
        assert matched.indices == nearest_quantize(codebook, embeddings).indices == (1,)
        assert matched.total_distance == 0.0

    def test_hand_example(self):
        result = matching_quantize(Codebook([[0.0], [10.0]]), [[1.0], [2.0]])
        assert result.indices == (0, 1)
        assert result.total_distance == 9.0

    def test_recovers_distinct_entries(self, small_codebook):
        result = matching_quantize(small_codebook, small_codebook.entries[[3, 1]])
        assert result.indices == (3, 1)
        assert result.total_distance == 0.0

    def test_single_entry(self):
        assert matching_quantize(Codebook([[5.0]]), [[-3.0]]).indices == (0,)

    def test_k_smaller_than_l(self):
        with pytest.raises(PreconditionError):
            matching_quantize(Codebook([[0.0]]), [[1.0], [2.0]])

    def test_quantized_rows_equal_codebook_entries(self, rng):
        codebook = Codebook(rng.normal(size=(8, 3)))
        result = matching_quantize(codebook, rng.normal(size=(5, 3)))
        for j, index in enumerate(result.indices):
            assert np.array_equal(result.quantized[j], codebook.entries[index])

    def test_always_uses_l_distinct_codes(self):
        strictly_below = 0
        for codebook, embeddings in _random_instances(500):
            matched = matching_quantize(codebook, embeddings)
            nearest = nearest_quantize(codebook, embeddings)
            assert matched.code_set.length == len(embeddings)
            assert nearest.code_set.length <= len(embeddings)
            strictly_below += nearest.code_set.length < len(embeddings)
            # nearest is the unconstrained minimum
            assert nearest.total_distance <= matched.total_distance + 1e-12
        assert strictly_below > 0

    def test_permuting_inputs_keeps_code_set(self, rng):
        codebook = Codebook(rng.normal(size=(10, 2)))
        embeddings = rng.normal(size=(6, 2))
        perm = rng.generator.permutation(6)
        base = matching_quantize(codebook, embeddings)
        permuted = matching_quantize(codebook, embeddings[perm])
        assert permuted.code_set == base.code_set
        assert permuted.indices == tuple(base.indices[j] for j in perm)


class TestStraightThrough:
    def test_forward_is_quantized_value(self):
        assert straight_through([1.0, 1.0], [2.0, 3.0]).value.tolist() == [2.0, 3.0]

    def test_backward_copies_gradient(self):
        grad = np.array([0.5, -1.5])
        assert np.array_equal(straight_through([1.0, 1.0], [2.0, 3.0]).backward(grad), grad)

    def test_identity_when_equal(self):
        st = straight_through([1.0, 2.0], [1.0, 2.0])
        assert st.value.tolist() == [1.0, 2.0]
        assert st.backward([3.0, 4.0]).tolist() == [3.0, 4.0]

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            straight_through([1.0], [1.0, 2.0])


class TestUsage:
    def test_accumulate(self):
        codebook = Codebook([[0.0], [10.0], [20.0]])
        stats = accumulate_usage(UsageStats.empty(3), nearest_quantize(codebook, [[0.0], [1.0], [9.0]]))
        assert stats.dataset_usage == 2
        assert stats.max_per_image_usage == 2

    def test_full_pass_with_matching(self, rng):
        codebook = Codebook(rng.normal(size=(12, 2)))
        stats = UsageStats.empty(12)
        for result in quantize_batch(codebook, list(rng.normal(size=(20, 5, 2))), "matching"):
            stats = accumulate_usage(stats, result)
        assert stats.max_per_image_usage == 5

    def test_out_of_range(self):
        result = nearest_quantize(Codebook([[0.0], [1.0], [2.0]]), [[2.0]])
        with pytest.raises(CodeRangeError):
            accumulate_usage(UsageStats.empty(2), result)


class TestBatch:
    def test_parallel_matches_sequential(self, rng, monkeypatch):
        codebook = Codebook(rng.normal(size=(16, 3)))
        batch = list(rng.normal(size=(12, 4, 3)))
        sequential = quantize_batch(codebook, batch, "matching")
        monkeypatch.setenv("PIVQ_THREADS", "4")
        parallel = quantize_batch(codebook, batch, "matching")
        assert [r.indices for r in parallel] == [r.indices for r in sequential]

    def test_unknown_method(self, small_codebook):
        with pytest.raises(PreconditionError):
            quantize(small_codebook, [[0.0, 0.0]], method="greedy")
