from math import comb

import pytest
from pydantic import ValidationError

from qcauchy.core.errors import ParameterError
from qcauchy.core.partitions import (
    contains,
    enumerate_by_weight,
    enumerate_partitions,
    first_row_series,
    interlacing_partitions,
    partitions_of,
    restricted_weight_series,
    subpartitions,
    superpartitions,
)
from qcauchy.core.qseries import QSeries, euler_series, qpoch_n_inverse_series
from qcauchy.models.partition import Partition


def parts(partitions):
    return [p.parts for p in partitions]


class TestPartitionModel:
    def test_trailing_zeros_dropped(self):
        assert Partition.of(3, 1, 0, 0).parts == (3, 1)

    def test_rejects_increasing_parts(self):
        with pytest.raises(ValidationError):
            Partition.of(1, 2)

    def test_rejects_negative_parts(self):
        with pytest.raises(ValidationError):
            Partition.of(2, -1)

    def test_missing_parts_read_as_zero(self):
        lam = Partition.of(2, 1)
        assert lam[0] == 2 and lam[1] == 1 and lam[5] == 0

    def test_weight_length_first_row(self):
        lam = Partition.of(4, 2, 2, 1)
        assert (lam.weight, lam.length, lam.first_row) == (9, 4, 4)
        assert (Partition().weight, Partition().length, Partition().first_row) == (0, 0, 0)

    def test_conjugate(self):
        assert Partition.of(3, 1).conjugate().parts == (2, 1, 1)
        for lam in enumerate_partitions(4, 4):
            assert lam.conjugate().conjugate() == lam

    def test_multiplicity_encoding(self):
        lam = Partition.of(3, 3, 1)
        assert lam.multiplicities() == {3: 2, 1: 1}
        assert Partition.from_multiplicities({1: 2, 2: 1}).parts == (2, 1, 1)

    def test_json_is_a_plain_list(self):
        assert Partition.of(3, 1).model_dump() == [3, 1]
        assert Partition().model_dump_json() == "[]"
        assert Partition.model_validate([3, 1]) == Partition.of(3, 1)

    def test_str(self):
        assert str(Partition.of(2, 1)) == "(2,1)"
        assert str(Partition()) == "∅"


class TestContains:
    def test_examples(self):
        assert contains(Partition(), Partition.of(3, 1))
        assert contains(Partition.of(1), Partition.of(2, 1))
        assert not contains(Partition.of(2, 2), Partition.of(3, 1))

    def test_partial_order(self):
        shapes = enumerate_partitions(3, 3)
        for x in shapes:
            assert contains(x, x)
            for y in shapes:
                if contains(x, y) and contains(y, x):
                    assert x == y
                for z in shapes:
                    if contains(x, y) and contains(y, z):
                        assert contains(x, z)


class TestEnumeration:
    def test_box_enumeration_order(self):
        assert parts(enumerate_partitions(2, 2)) == [(2, 2), (2, 1), (2,), (1, 1), (1,), ()]

    def test_box_edge_cases(self):
        assert parts(enumerate_partitions(0, 5)) == [()]
        assert parts(enumerate_partitions(3, 1)) == [(3,), (2,), (1,), ()]

    def test_box_cardinality_is_binomial(self):
        for p in range(7):
            for l in range(7):
                assert len(enumerate_partitions(p, l)) == comb(p + l, l)

    def test_negative_bounds_rejected(self):
        with pytest.raises(ParameterError):
            enumerate_partitions(-1, 2)

    def test_by_weight(self):
        assert len(enumerate_by_weight(3)) == 7
        assert parts(enumerate_by_weight(2, max_part=1)) == [(), (1,), (1, 1)]
        assert parts(enumerate_by_weight(0)) == [()]

    def test_partitions_of(self):
        assert len(partitions_of(5)) == 7
        assert parts(partitions_of(5, max_part=2)) == [(2, 2, 1), (2, 1, 1, 1), (1, 1, 1, 1, 1)]
        assert parts(partitions_of(4, max_length=2)) == [(4,), (3, 1), (2, 2)]


class TestGeneratingFunctions:
    def test_restricted_weight_series_examples(self):
        assert restricted_weight_series(2, 3).coeffs == (1, 1, 2, 2)
        assert restricted_weight_series(0, 5) == QSeries.one(5)
        assert restricted_weight_series(1, 4).coeffs == (1, 1, 1, 1, 1)

    @pytest.mark.parametrize("cap", range(5))
    def test_restricted_weight_series_is_inverse_pochhammer(self, cap):
        assert restricted_weight_series(cap, 10) == qpoch_n_inverse_series(cap, 10)

    @pytest.mark.parametrize("n", range(7))
    def test_fixed_first_row_refinement(self, n):
        order = 12
        expected = QSeries.q_power(n, order) * qpoch_n_inverse_series(n, order)
        assert first_row_series(n, order) == expected

    def test_all_partitions_generate_inverse_euler(self):
        order = 12
        counts = [0] * (order + 1)
        for lam in enumerate_by_weight(order):
            counts[lam.weight] += 1
        assert counts == [1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42, 56, 77]
        assert QSeries(counts, order) == euler_series(order).inverse()


class TestBoundedEnumerations:
    def test_interlacing(self):
        assert parts(interlacing_partitions(Partition.of(2, 1))) == [(2, 1), (2,), (1, 1), (1,)]
        assert parts(interlacing_partitions(Partition.of(2, 1), max_length=1)) == [(2,), (1,)]
        assert interlacing_partitions(Partition.of(1, 1, 1), max_length=1) == []

    def test_subpartitions(self):
        lam = Partition.of(2, 1)
        assert parts(subpartitions(lam)) == [(2, 1), (2,), (1, 1), (1,), ()]
        # λ/∅ has a column of height 2
        assert parts(subpartitions(lam, max_column=1)) == [(2, 1), (2,), (1, 1), (1,)]

    @pytest.mark.parametrize("rho", [Partition(), Partition.of(1), Partition.of(2, 1), Partition.of(3, 3)])
    @pytest.mark.parametrize("max_column", [1, 2])
    def test_superpartitions_match_brute_force(self, rho, max_column):
        max_part = 3

        def columns_ok(lam):
            lam_c, rho_c = lam.conjugate(), rho.conjugate()
            return all(lam_c[j] - rho_c[j] <= max_column for j in range(lam_c.length))

        expected = {
            lam.parts
            for lam in enumerate_partitions(max_part, rho.length + max_column + 2)
            if lam.contains(rho) and columns_ok(lam)
        }
        found = parts(superpartitions(rho, max_part, max_column))
        assert len(found) == len(set(found))
        assert set(found) == expected

    def test_superpartitions_of_too_wide_rho(self):
        assert superpartitions(Partition.of(4), 3, 2) == []
