import math

import numpy as np
import pytest

from soundzones.stats import (
    ContingencyTable,
    adjusted_rand_index,
    chi_squared_independence,
    chi_squared_sf,
    crosstab,
    normalized_mutual_information,
    wilks_manova,
)

from oracles import (
    ari_pair_enumeration,
    chi2_cdf_quadrature,
    nmi_direct_summation,
    wilks_lambda_scatter,
)


class TestChiSquaredSf:
    def test_zero_is_one(self):
        for df in (1, 2, 5, 30):
            assert chi_squared_sf(0.0, df) == 1.0

    def test_textbook_critical_value(self):
        assert chi_squared_sf(3.841, 1) == pytest.approx(0.0500, abs=1e-3)

    def test_hand_table_value(self):
        assert chi_squared_sf(6.6667, 1) == pytest.approx(0.0098, abs=1e-3)

    def test_quadrature_complement_grid(self):
        for df in (1, 2, 3, 7, 12):
            for x in np.linspace(0.05, 40.0, 10):
                sf = chi_squared_sf(float(x), df)
                cdf = chi2_cdf_quadrature(float(x), df)
                assert sf + cdf == pytest.approx(1.0, abs=1e-8)

    def test_monotone_decreasing_in_x(self):
        for df in (1, 4, 9):
            grid = [chi_squared_sf(x, df) for x in np.linspace(0.0, 30.0, 61)]
            assert all(a >= b for a, b in zip(grid, grid[1:]))

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            chi_squared_sf(1.0, 0)
        with pytest.raises(ValueError):
            chi_squared_sf(-0.5, 3)


class TestWilksManova:
    def test_no_between_scatter_gives_lambda_one(self):
        coords = np.array(
            [[1, 0], [-1, 0], [0, 1], [0, -1], [2, 0], [-2, 0], [0, 2], [0, -2]],
            dtype=float,
        )
        groups = [0, 0, 0, 0, 1, 1, 1, 1]
        result = wilks_manova(coords, groups)
        assert result.wilks_lambda == pytest.approx(1.0, abs=1e-12)
        assert result.p_value == pytest.approx(1.0, abs=1e-12)

    def test_collapsed_groups_drive_lambda_to_zero(self):
        coords = np.array([[0.0, 0.0]] * 4 + [[5.0, 1.0]] * 4 + [[-3.0, 2.0]] * 4)
        groups = [0] * 4 + [1] * 4 + [2] * 4
        result = wilks_manova(coords, groups)
        assert result.wilks_lambda < 1e-9
        assert result.p_value < 1e-6

    def test_matches_scatter_matrix_oracle_on_fixture(self):
        coords = np.array(
            [[0.0, 0.1], [0.4, -0.2], [1.1, 0.9], [0.3, 0.5],
             [2.0, 2.2], [2.5, 1.8], [1.9, 2.6], [2.2, 2.0]]
        )
        groups = [0, 0, 0, 0, 1, 1, 1, 1]
        result = wilks_manova(coords, groups)
        assert result.wilks_lambda == pytest.approx(wilks_lambda_scatter(coords, groups), abs=1e-8)

    def test_matches_oracle_on_random_instances(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            g = rng.integers(2, 5)
            sizes = rng.integers(2, 6, size=g)
            coords = rng.normal(size=(int(sizes.sum()), 2))
            groups = np.repeat(np.arange(g), sizes)
            result = wilks_manova(coords, groups)
            assert result.wilks_lambda == pytest.approx(
                wilks_lambda_scatter(coords, groups), abs=1e-8
            )

    def test_affine_invariance(self):
        rng = np.random.default_rng(11)
        coords = rng.normal(size=(15, 2))
        groups = rng.integers(0, 3, size=15)
        while len(set(groups.tolist())) < 2:
            groups = rng.integers(0, 3, size=15)
        base = wilks_manova(coords, groups).wilks_lambda
        for _ in range(20):
            mat = rng.normal(size=(2, 2))
            while abs(np.linalg.det(mat)) < 0.1:
                mat = rng.normal(size=(2, 2))
            shifted = coords @ mat.T + rng.normal(size=2)
            assert wilks_manova(shifted, groups).wilks_lambda == pytest.approx(base, abs=1e-8)

    def test_singleton_group_is_allowed(self):
        coords = np.array([[0.0, 0.0], [1.0, 0.4], [0.5, 1.0], [8.0, 8.0]])
        result = wilks_manova(coords, [0, 0, 0, 1])
        assert 0.0 <= result.wilks_lambda <= 1.0

    def test_rejects_degenerate_inputs(self):
        with pytest.raises(ValueError, match="singular"):
            wilks_manova(np.zeros((6, 2)), [0, 0, 0, 1, 1, 1])
        with pytest.raises(ValueError, match="groups"):
            wilks_manova(np.random.default_rng(0).normal(size=(4, 2)), [0, 0, 0, 0])
        with pytest.raises(ValueError, match="observations"):
            wilks_manova(np.eye(2), [0, 1])


class TestChiSquaredIndependence:
    def test_exact_independence(self):
        table = ContingencyTable((0, 1), ("a", "b"), np.array([[2, 4], [1, 2]]), 9)
        result = chi_squared_independence(table)
        assert result.chi2 == pytest.approx(0.0, abs=1e-12)
        assert result.cramers_v == pytest.approx(0.0, abs=1e-9)
        assert result.p_value == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(result.residuals, 0.0)

    def test_hand_computed_two_by_two(self):
        table = ContingencyTable((0, 1), ("a", "b"), np.array([[10, 20], [20, 10]]), 60)
        result = chi_squared_independence(table)
        assert result.chi2 == pytest.approx(6.6667, abs=1e-4)
        assert result.df == 1
        assert result.p_value == pytest.approx(0.0098, abs=1e-3)
        assert result.cramers_v == pytest.approx(0.3333, abs=1e-4)
        assert np.allclose(np.abs(result.residuals), 1.2910, atol=1e-4)

    def test_cramers_v_definition_holds(self):
        rng = np.random.default_rng(3)
        counts = rng.integers(1, 30, size=(4, 3))
        table = ContingencyTable(tuple(range(4)), tuple(range(3)), counts, int(counts.sum()))
        result = chi_squared_independence(table)
        expected_v = math.sqrt(result.chi2 / (table.n * (min(4, 3) - 1)))
        assert result.cramers_v == pytest.approx(expected_v, abs=1e-12)

    def test_residual_weighted_sum_is_zero(self):
        counts = np.array([[5, 9, 2], [11, 4, 8], [3, 3, 15]])
        table = ContingencyTable((0, 1, 2), (0, 1, 2), counts, int(counts.sum()))
        result = chi_squared_independence(table)
        expected = np.outer(counts.sum(axis=1), counts.sum(axis=0)) / counts.sum()
        assert float((np.sqrt(expected) * result.residuals).sum()) == pytest.approx(0.0, abs=1e-6)

    def test_permutation_invariance(self):
        counts = np.array([[5, 9, 2], [11, 4, 8], [3, 3, 15]])
        table = ContingencyTable((0, 1, 2), (0, 1, 2), counts, int(counts.sum()))
        base = chi_squared_independence(table)
        shuffled = counts[[2, 0, 1]][:, [1, 2, 0]]
        other = chi_squared_independence(
            ContingencyTable((0, 1, 2), (0, 1, 2), shuffled, int(counts.sum()))
        )
        assert other.chi2 == pytest.approx(base.chi2, abs=1e-10)
        assert other.cramers_v == pytest.approx(base.cramers_v, abs=1e-12)

    def test_low_expected_flag(self):
        small = ContingencyTable((0, 1), (0, 1), np.array([[2, 3], [3, 2]]), 10)
        assert chi_squared_independence(small).low_expected
        big = ContingencyTable((0, 1), (0, 1), np.array([[20, 30], [30, 20]]), 100)
        assert not chi_squared_independence(big).low_expected

    def test_adjusted_residuals_variant(self):
        table = ContingencyTable((0, 1), ("a", "b"), np.array([[10, 20], [20, 10]]), 60)
        pearson = chi_squared_independence(table).residuals
        adjusted = chi_squared_independence(table, residual_variant="adjusted").residuals
        assert np.allclose(adjusted, pearson / math.sqrt(0.25), atol=1e-12)

    def test_rejects_zero_margins(self):
        table = ContingencyTable((0, 1), (0, 1), np.array([[0, 0], [3, 2]]), 5)
        with pytest.raises(ValueError, match="all-zero"):
            chi_squared_independence(table)

    def test_crosstab_builds_counts(self):
        table = crosstab([0, 0, 1, 1, 1], ["x", "y", "y", "y", "x"])
        assert table.row_labels == (0, 1)
        assert table.col_labels == ("x", "y")
        assert table.counts.tolist() == [[1, 1], [1, 2]]
        assert table.n == 5


class TestAdjustedRandIndex:
    def test_identical_partitions(self):
        assert adjusted_rand_index([0, 0, 1, 1, 2], [5, 5, 9, 9, 7]) == pytest.approx(1.0)

    def test_singletons_vs_one_cluster(self):
        assert adjusted_rand_index([0, 1, 2, 3], [0, 0, 0, 0]) == pytest.approx(0.0, abs=1e-12)

    def test_hand_counted_fixture(self):
        value = adjusted_rand_index([0, 0, 0, 1, 1, 1], [0, 0, 1, 1, 1, 1])
        assert value == pytest.approx((4 - 2.8) / (6.5 - 2.8), abs=1e-12)
        assert value == pytest.approx(0.32432, abs=1e-5)

    def test_matches_pair_enumeration_oracle(self):
        rng = np.random.default_rng(42)
        for _ in range(200):
            n = int(rng.integers(2, 13))
            a = rng.integers(0, rng.integers(1, 5) + 1, size=n).tolist()
            b = rng.integers(0, rng.integers(1, 5) + 1, size=n).tolist()
            assert adjusted_rand_index(a, b) == pytest.approx(
                ari_pair_enumeration(a, b), abs=1e-10
            )

    def test_symmetry_and_relabeling(self):
        rng = np.random.default_rng(9)
        a = rng.integers(0, 3, size=20).tolist()
        b = rng.integers(0, 4, size=20).tolist()
        assert adjusted_rand_index(a, b) == pytest.approx(adjusted_rand_index(b, a), abs=1e-12)
        relabelled = [{0: 7, 1: 5, 2: 6}[v] for v in a]
        assert adjusted_rand_index(relabelled, b) == pytest.approx(
            adjusted_rand_index(a, b), abs=1e-12
        )

    def test_never_exceeds_one(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            n = int(rng.integers(2, 10))
            a = rng.integers(0, 4, size=n).tolist()
            b = rng.integers(0, 4, size=n).tolist()
            assert adjusted_rand_index(a, b) <= 1.0 + 1e-12

    def test_rejects_length_mismatch(self):
        with pytest.raises(ValueError):
            adjusted_rand_index([0, 1], [0, 1, 2])


class TestNormalizedMutualInformation:
    def test_identical_partitions_exactly_one(self):
        assert normalized_mutual_information([0, 0, 1, 1, 2], [4, 4, 3, 3, 9]) == 1.0

    def test_trivial_partition_gives_zero(self):
        assert normalized_mutual_information([0, 0, 0, 0], [0, 1, 0, 1]) == 0.0
        assert normalized_mutual_information([0, 1, 0, 1], [3, 3, 3, 3]) == 0.0

    def test_hand_computed_fixture(self):
        value = normalized_mutual_information([0, 0, 0, 1, 1, 1], [0, 0, 1, 1, 1, 1])
        assert value == pytest.approx(0.45915 / 0.95915, abs=1e-4)
        assert value == pytest.approx(0.4787, abs=1e-4)

    def test_matches_direct_summation_oracle(self):
        rng = np.random.default_rng(77)
        for _ in range(200):
            n = int(rng.integers(1, 13))
            a = rng.integers(0, 4, size=n).tolist()
            b = rng.integers(0, 4, size=n).tolist()
            assert normalized_mutual_information(a, b) == pytest.approx(
                nmi_direct_summation(a, b), abs=1e-10
            )

    def test_alternative_normalizers(self):
        a = [0, 0, 0, 1, 1, 1]
        b = [0, 0, 1, 1, 1, 1]
        for normalizer in ("geometric", "max"):
            assert normalized_mutual_information(a, b, normalizer) == pytest.approx(
                nmi_direct_summation(a, b, normalizer), abs=1e-12
            )
        with pytest.raises(ValueError):
            normalized_mutual_information(a, b, "harmonic")

    def test_bounded_between_zero_and_one(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            n = int(rng.integers(2, 12))
            a = rng.integers(0, 4, size=n).tolist()
            b = rng.integers(0, 4, size=n).tolist()
            value = normalized_mutual_information(a, b)
            assert -1e-12 <= value <= 1.0 + 1e-12

    def test_symmetry(self):
        rng = np.random.default_rng(6)
        a = rng.integers(0, 3, size=15).tolist()
        b = rng.integers(0, 5, size=15).tolist()
        assert normalized_mutual_information(a, b) == pytest.approx(
            normalized_mutual_information(b, a), abs=1e-12
        )

    def test_rejects_length_mismatch(self):
        with pytest.raises(ValueError):
            normalized_mutual_information([0], [0, 1])
