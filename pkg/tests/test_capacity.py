# tests/test_capacity.py
"""
Tests for the capacity formulas, their exact arithmetic and the enumeration oracles.
"""
import math
import time

import numpy as np
import pytest
from pydantic import ValidationError

from analysis.capacity import (
    CapacityParams,
    binomial,
    bottleneck_report,
    capacity_curve,
    enumerate_representations,
    log2_binomial_lgamma,
    log2_of,
    matching_capacity_bits,
    multiset_count,
    nearest_capacity_bits,
    standard_vq_capacity_bits,
    working_subset_count,
)
from core.errors import InstanceTooLargeError, PreconditionError


class TestExactArithmetic:
    def test_binomial(self):
        assert binomial(4, 2) == 6
        assert binomial(17, 0) == 1
        assert binomial(2, 5) == 0

    def test_binomial_is_exact_integer(self):
        value = binomial(4096, 512)
        assert isinstance(value, int)
        assert value == math.factorial(4096) // (math.factorial(512) * math.factorial(3584))

    def test_negative_arguments(self):
        with pytest.raises(PreconditionError):
            binomial(-1, 0)

    def test_log2_of(self):
        assert log2_of(1) == 0.0
        assert log2_of(1024) == 10.0
        assert log2_of(6) == pytest.approx(2.584962500721156, rel=1e-12)

    def test_log2_of_huge_integer(self):
        assert log2_of(2**5000) == 5000.0
        assert log2_of(3 * 2**4000) == pytest.approx(4000 + math.log2(3), rel=1e-12)

    def test_log2_of_rejects_zero(self):
        with pytest.raises(PreconditionError):
            log2_of(0)

    @pytest.mark.parametrize("n,r", [(10, 3), (500, 250), (4096, 512), (10_000, 1234), (10_000, 9_999)])
    def test_agrees_with_lgamma(self, n, r):
        assert log2_of(binomial(n, r)) == pytest.approx(log2_binomial_lgamma(n, r), abs=1e-6)


class TestCounts:
    def test_working_subset_count(self):
        assert working_subset_count(CapacityParams(k_data=4, k_img=2, length=2)) == 6
        assert working_subset_count(CapacityParams(k_data=5, k_img=5, length=5)) == 1

    def test_working_subset_matches_enumeration(self):
        assert working_subset_count(CapacityParams(k_data=6, k_img=3, length=3)) == 20
        assert enumerate_representations(6, 3, "matching") == 20

    def test_multiset_count(self):
        assert multiset_count(3, 2) == 4
        assert multiset_count(9, 1) == 1
        assert multiset_count(0, 5) == 1

    def test_multiset_count_needs_symbols(self):
        with pytest.raises(PreconditionError):
            multiset_count(3, 0)

    def test_params_validation(self):
        with pytest.raises(ValidationError):
            CapacityParams(k_data=2, k_img=3, length=4)
        with pytest.raises(ValidationError):
            CapacityParams(k_data=8, k_img=3, length=2)


class TestCapacityBits:
    def test_matching_reference_value(self):
        assert matching_capacity_bits(4096, 512) == pytest.approx(2221, abs=1)

    def test_nearest_reference_value(self):
        assert nearest_capacity_bits(4096, 49, 512) == pytest.approx(614, abs=5)

    def test_standard_reference_values(self):
        assert standard_vq_capacity_bits(1024, 256) == 2560.0
        assert standard_vq_capacity_bits(4096, 512) == 6144.0
        assert standard_vq_capacity_bits(1, 300) == 0.0

    def test_small_values(self):
        assert matching_capacity_bits(4, 2) == pytest.approx(math.log2(6))
        assert matching_capacity_bits(7, 7) == 0.0
        assert nearest_capacity_bits(4, 2, 3) == pytest.approx(math.log2(24))
        assert nearest_capacity_bits(1, 1, 1) == 0.0

    def test_params_object_accepted(self):
        params = CapacityParams(k_data=4, k_img=2, length=3)
        assert nearest_capacity_bits(params) == nearest_capacity_bits(4, 2, 3)

    def test_matching_needs_enough_codes(self):
        with pytest.raises(PreconditionError):
            matching_capacity_bits(3, 4)

    def test_runs_quickly(self):
        start = time.perf_counter()
        matching_capacity_bits(4096, 512)
        nearest_capacity_bits(4096, 49, 512)
        standard_vq_capacity_bits(1024, 256)
        assert time.perf_counter() - start < 1.0

    def test_report_ratio(self):
        report = bottleneck_report(4096, 49, 512)
        assert report.standard_bits == 6144.0
        assert report.ratio == pytest.approx(report.matching_bits / report.nearest_bits)
        assert report.ratio > 3


class TestCurve:
    def test_reference_row(self):
        frame = capacity_curve(4096, 49, [512])
        assert list(frame.columns) == ["L", "standard", "nearest_with_fixed_K_img", "matching"]
        row = frame.iloc[0]
        assert row["L"] == 512
        assert row["standard"] == 6144.0
        assert row["nearest_with_fixed_K_img"] == pytest.approx(614, abs=5)
        assert row["matching"] == pytest.approx(2221, abs=1)

    def test_single_code(self):
        frame = capacity_curve(4096, 49, [1])
        assert frame.iloc[0]["matching"] == pytest.approx(12.0)

    def test_matching_monotone_to_half(self):
        frame = capacity_curve(64, 8, range(1, 33))
        assert np.all(np.diff(frame["matching"].to_numpy()) >= 0)

    def test_matching_undefined_past_k(self):
        frame = capacity_curve(4, 2, [3, 4, 5])
        assert frame["matching"].isna().tolist() == [False, False, True]

    def test_nearest_clamps_k_img(self):
        frame = capacity_curve(16, 8, [2])
        assert frame.iloc[0]["nearest_with_fixed_K_img"] == pytest.approx(nearest_capacity_bits(16, 2, 2))


class TestEnumeration:
    def test_matching_equals_binomial(self):
        for k_data in range(1, 9):
            for length in range(1, min(k_data, 6) + 1):
                assert enumerate_representations(k_data, length, "matching") == binomial(k_data, length)

    def test_nearest_example(self):
        assert enumerate_representations(3, 2, "nearest", k_img=2) == 6
        assert working_subset_count(CapacityParams(k_data=3, k_img=2, length=2)) * multiset_count(2, 2) == 9

    def test_trivial(self):
        assert enumerate_representations(1, 1, "nearest", k_img=1) == 1

    def test_product_is_an_upper_bound(self):
        for k_data in range(1, 9):
            for length in range(1, 7):
                for k_img in range(1, min(k_data, length) + 1):
                    count = enumerate_representations(k_data, length, "nearest", k_img=k_img)
                    bound = working_subset_count(CapacityParams(k_data=k_data, k_img=k_img, length=length)) * multiset_count(length, k_img)
                    assert count <= bound
                    if k_img >= 2 and k_data > k_img:
                        assert count < bound

    def test_guard(self):
        with pytest.raises(InstanceTooLargeError):
            enumerate_representations(9, 2)
        with pytest.raises(InstanceTooLargeError):
            enumerate_representations(8, 7)

    def test_unknown_model(self):
        with pytest.raises(PreconditionError):
            enumerate_representations(3, 2, "ordered")
