import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from otlab import (
    DiscreteMeasure,
    MeasureError,
    l1,
    push_forward_projection,
    read_measure,
    residual_cost_functional,
    sql2,
    validate_measure,
)


class TestValidateMeasure:
    def test_duplicate_points_merge(self):
        m = validate_measure([[0.0], [0.0]], [0.5, 0.5])
        assert m.size == 1
        assert_array_equal(m.points, [[0.0]])
        assert m.weights[0] == 1.0

    def test_distinct_points_unchanged(self):
        m = validate_measure([[0.0], [1.0]], [0.3, 0.7])
        assert m.size == 2
        assert_allclose(m.weights, [0.3, 0.7])

    def test_weight_sum_off_is_rejected(self):
        with pytest.raises(MeasureError, match="pre-normalize"):
            validate_measure([[0.0], [1.0]], [0.5, 0.6])

    def test_negative_weight_rejected(self):
        with pytest.raises(MeasureError, match="negative"):
            validate_measure([[0.0], [1.0]], [-0.1, 1.1])

    def test_empty_support_rejected(self):
        with pytest.raises(MeasureError):
            validate_measure([], [])

    def test_weight_count_mismatch_rejected(self):
        with pytest.raises(MeasureError, match="mismatch"):
            validate_measure([[0.0], [1.0]], [1.0])

    def test_nan_rejected(self):
        with pytest.raises(MeasureError):
            validate_measure([[np.nan]], [1.0])

    def test_near_one_sum_renormalized_exactly(self):
        w = np.full(7, 1.0 / 7)
        m = validate_measure(np.arange(7.0)[:, None], w)
        assert m.weights.sum() == 1.0

    def test_one_dimensional_input_promoted(self):
        m = validate_measure([0.0, 1.0, 2.0], [0.2, 0.3, 0.5])
        assert m.dim == 1 and m.size == 3

    def test_measures_are_immutable(self):
        m = validate_measure([[0.0], [1.0]], [0.5, 0.5])
        with pytest.raises(ValueError):
            m.weights[0] = 0.9


class TestProjection:
    def test_truncates_coordinates(self):
        m = DiscreteMeasure(np.array([[1.0, 2.0, 3.0]]), np.array([1.0]))
        p = push_forward_projection(m, 2)
        assert_array_equal(p.points, [[1.0, 2.0]])
        assert p.weights[0] == 1.0

    def test_merges_collapsed_points(self):
        m = DiscreteMeasure(np.array([[0.0, 0.0], [0.0, 1.0]]), np.array([0.5, 0.5]))
        p = push_forward_projection(m, 1)
        assert p.size == 1
        assert p.weights[0] == 1.0

    def test_keeps_distinct_mass(self):
        m = DiscreteMeasure(np.array([[0.0, 5.0], [1.0, 5.0]]), np.array([0.3, 0.7]))
        p = push_forward_projection(m, 1)
        assert_array_equal(p.points, [[0.0], [1.0]])
        assert_allclose(p.weights, [0.3, 0.7])

    def test_out_of_range_rejected(self):
        m = DiscreteMeasure(np.array([[1.0, 2.0]]), np.array([1.0]))
        with pytest.raises(MeasureError):
            push_forward_projection(m, 3)
        with pytest.raises(MeasureError):
            push_forward_projection(m, 0)

    def test_mass_preserved_on_random_measures(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            n = int(rng.integers(1, 30))
            d = int(rng.integers(2, 6))
            w = rng.random(n) + 1e-3
            m = DiscreteMeasure(rng.integers(0, 3, (n, d)).astype(float), w / w.sum())
            for keep in range(1, d + 1):
                p = push_forward_projection(m, keep)
                assert abs(p.weights.sum() - 1.0) <= 1e-12


class TestResidualFunctional:
    def test_zero_tail(self):
        m = DiscreteMeasure(np.array([[7.0, 0.0]]), np.array([1.0]))
        assert residual_cost_functional(m, 1, sql2()) == 0.0

    def test_single_point(self):
        m = DiscreteMeasure(np.array([[0.0, 2.0]]), np.array([1.0]))
        assert residual_cost_functional(m, 1, sql2()) == 4.0

    def test_two_point_average(self):
        m = DiscreteMeasure(np.array([[0.0, 1.0], [0.0, 3.0]]), np.array([0.5, 0.5]))
        assert residual_cost_functional(m, 1, l1()) == 2.0

    def test_linearity_with_signed_weights(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            n = int(rng.integers(1, 20))
            pts = rng.normal(size=(n, 3))
            m = DiscreteMeasure(pts, np.full(n, 1.0 / n))
            w1 = rng.normal(size=n)
            w2 = rng.normal(size=n)
            a, b = rng.normal(size=2)
            lhs = residual_cost_functional(m, 1, sql2(), weights=a * w1 + b * w2)
            rhs = a * residual_cost_functional(m, 1, sql2(), weights=w1) \
                + b * residual_cost_functional(m, 1, sql2(), weights=w2)
            assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))

    def test_split_must_be_inside_dimension(self):
        m = DiscreteMeasure(np.array([[1.0, 2.0]]), np.array([1.0]))
        with pytest.raises(MeasureError):
            residual_cost_functional(m, 2, sql2())


class TestMeasureFiles:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "mu.txt"
        path.write_text("# a comment\n0.0 1.0 0.25\n\n1.0 0.0 0.75\n")
        m = read_measure(path)
        assert m.size == 2 and m.dim == 2
        assert_allclose(sorted(m.weights), [0.25, 0.75])

    def test_malformed_weight_rejected(self, tmp_path):
        path = tmp_path / "mu.txt"
        path.write_text("0.0 notanumber\n")
        with pytest.raises(MeasureError):
            read_measure(path)

    def test_ragged_rows_rejected(self, tmp_path):
        path = tmp_path / "mu.txt"
        path.write_text("0.0 1.0 0.5\n1.0 0.5\n")
        with pytest.raises(MeasureError, match="inconsistent"):
            read_measure(path)

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "mu.txt"
        path.write_text("# nothing\n")
        with pytest.raises(MeasureError):
            read_measure(path)
