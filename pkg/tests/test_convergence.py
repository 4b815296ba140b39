import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from otlab import (
    CombinationError,
    ConvergenceTable,
    CubeConfig,
    DiscreteMeasure,
    OracleParams,
    SemiDiscreteConfig,
    SphereConfig,
    TableRow,
    additive,
    cost_matrix,
    decomposition_residual,
    dependent_coupling_check,
    empirical_deviation,
    fit_rate,
    l1,
    run_convergence,
    solve_exact,
    sql2,
    theory_rate_for,
    validate_measure,
)


class TestEstimatorValidation:
    def test_one_sample_mu_rejected_everywhere(self):
        for setting in ("cube:1:3", "sphere:1:2", "semidiscrete:2:2:1"):
            with pytest.raises(CombinationError):
                empirical_deviation(setting, "sql2", "one-sample-mu", 4, 2, 0)

    def test_one_sample_nu_needs_finite_source(self):
        for setting in ("cube:1:3", "sphere:1:2"):
            with pytest.raises(CombinationError):
                empirical_deviation(setting, "sql2", "one-sample-nu", 4, 2, 0)

    def test_unknown_estimator(self):
        with pytest.raises(CombinationError):
            empirical_deviation("cube:1:3", "sql2", "three-sample", 4, 2, 0)

    def test_reps_floor(self):
        with pytest.raises(ValueError):
            empirical_deviation("cube:1:3", "sql2", "two-sample", 4, 1, 0)


class TestEmpiricalDeviation:
    def test_nonnegative_and_deterministic(self):
        a = empirical_deviation("cube:1:1", "sql2", "two-sample", 2, 6, 123)
        b = empirical_deviation("cube:1:1", "sql2", "two-sample", 2, 6, 123)
        assert a == b
        assert a[0] >= 0.0 and a[1] >= 0.0

    def test_thread_count_does_not_change_results(self):
        base = empirical_deviation("cube:1:2", "sql2", "two-sample", 16, 10, 7)
        threaded = empirical_deviation("cube:1:2", "sql2", "two-sample", 16, 10, 7,
                                       threads=8)
        assert base == threaded

    def test_point_mass_site_matches_integral(self):
        # Source fixed at 0.5 on the line, single target draw: the deviation
        # is E | |Y - 1/2| - 1/4 | = 1/8.
        cfg = SemiDiscreteConfig(1, 1, sites=np.array([[0.5]]))
        delta, se = empirical_deviation(
            cfg, "l1", "one-sample-nu", 1, 3000, 11,
            oracle=OracleParams(mc_samples=10**6, seed=0),
        )
        assert delta == pytest.approx(1 / 8, abs=3 * se)

    def test_semidiscrete_two_sample_runs(self):
        cfg = SemiDiscreteConfig(3, 2, site_seed=5)
        delta, se = empirical_deviation(cfg, "sql2", "two-sample", 32, 4, 3,
                                        oracle=OracleParams(mc_samples=10**4, seed=1))
        assert delta >= 0.0


class TestRunConvergence:
    def test_row_count_and_metadata(self):
        table = run_convergence("cube:1:2", "sql2", "two-sample", [4, 8], 2, 5)
        assert len(table.rows) == 2
        assert [r.n for r in table.rows] == [4, 8]
        assert all(r.delta_hat >= 0 for r in table.rows)
        assert table.metadata["setting"] == "cube:1:2"
        assert table.metadata["populationCost"] == pytest.approx(1 / 3)
        assert table.metadata["populationCostSE"] == 0.0

    def test_rerun_is_identical(self):
        t1 = run_convergence("cube:1:2", "l1", "two-sample", [4, 8, 16], 3, 9)
        t2 = run_convergence("cube:1:2", "l1", "two-sample", [4, 8, 16], 3, 9)
        assert t1.rows == t2.rows

    def test_grid_must_increase(self):
        with pytest.raises(ValueError):
            run_convergence("cube:1:2", "sql2", "two-sample", [8, 4], 2, 0)

    def test_csv_round_trip(self, tmp_path):
        table = run_convergence("cube:1:3", "sql2", "two-sample", [4, 8, 16], 3, 21)
        out = tmp_path / "table.csv"
        table.write_csv(out)
        back = ConvergenceTable.read_csv(out)
        assert back.rows == table.rows
        assert back.metadata == table.metadata
        assert (tmp_path / "table.json").exists()

    def test_csv_bytes_stable_across_thread_counts(self, tmp_path):
        t1 = run_convergence("cube:1:2", "sql2", "two-sample", [4, 8], 4, 13, threads=1)
        t8 = run_convergence("cube:1:2", "sql2", "two-sample", [4, 8], 4, 13, threads=8)
        assert t1.csv_text() == t8.csv_text()

    def test_table_invariants_enforced(self):
        with pytest.raises(ValueError):
            ConvergenceTable((TableRow(8, 0.1, 0.01, 2), TableRow(4, 0.2, 0.01, 2)))
        with pytest.raises(ValueError):
            ConvergenceTable((TableRow(4, 0.1, 0.01, 1),))


class TestFitRate:
    @staticmethod
    def synthetic(fn, ns=(64, 128, 256, 512, 1024)):
        rows = tuple(TableRow(n, fn(n), 0.0, 2) for n in ns)
        return ConvergenceTable(rows)

    def test_exact_parametric_slope(self):
        fit = fit_rate(self.synthetic(lambda n: n**-0.5))
        assert fit.slope == pytest.approx(-0.5, abs=1e-12)
        assert fit.slope_std_err == pytest.approx(0.0, abs=1e-12)

    def test_scaled_cube_root(self):
        fit = fit_rate(self.synthetic(lambda n: 7.0 * n ** (-1 / 3)))
        assert fit.slope == pytest.approx(-1 / 3, abs=1e-12)
        assert fit.intercept == pytest.approx(math.log(7.0), abs=1e-12)

    def test_alternating_perturbation(self):
        vals = {}
        for i, n in enumerate((64, 128, 256, 512, 1024)):
            vals[n] = n**-0.5 * (1 + 0.01 * (-1) ** i)
        fit = fit_rate(self.synthetic(lambda n: vals[n]))
        assert abs(fit.slope + 0.5) <= 0.02

    def test_planted_exponents(self):
        for e in (0.1, 0.2, 0.5):
            fit = fit_rate(self.synthetic(lambda n, e=e: 3.0 * n**-e))
            assert abs(fit.slope + e) <= 1e-10

    def test_n_min_filters_rows(self):
        fit = fit_rate(self.synthetic(lambda n: n**-0.5, ns=(4, 8, 64, 128, 256)),
                       n_min=64)
        assert fit.n_used == (64, 128, 256)

    def test_too_few_rows(self):
        with pytest.raises(ValueError):
            fit_rate(self.synthetic(lambda n: n**-0.5, ns=(64, 128)))

    def test_zero_rows_dropped_with_flag(self):
        rows = tuple(TableRow(n, 0.0 if n == 128 else n**-0.5, 0.0, 2)
                     for n in (64, 128, 256, 512))
        fit = fit_rate(ConvergenceTable(rows))
        assert fit.dropped_zero_rows
        assert 128 not in fit.n_used


class TestDecomposition:
    def test_point_masses(self):
        mu = validate_measure([[0.0]], [1.0])
        nu = validate_measure([[0.0, 3.0]], [1.0])
        spec = additive(1, l1(), l1())
        assert decomposition_residual(mu, nu, spec) <= 1e-12

    def test_two_point_hand_case(self):
        # T = 0 + (1 + 4)/2 = 2.5 both through the split and directly.
        mu = validate_measure([[0.0], [1.0]], [0.5, 0.5])
        nu = validate_measure([[0.0, 1.0], [1.0, 2.0]], [0.5, 0.5])
        spec = additive(1, sql2(), sql2())
        direct = solve_exact(mu, nu, cost_matrix(spec, mu.points, nu.points)).cost
        assert direct == pytest.approx(2.5, abs=1e-12)
        assert decomposition_residual(mu, nu, spec) <= 1e-9

    def test_random_instances(self):
        rng = np.random.default_rng(17)
        kinds = (l1(), sql2())
        for _ in range(60):
            s = int(rng.integers(1, 4))
            d = s + int(rng.integers(1, 4))
            spec = additive(s, kinds[int(rng.integers(2))], kinds[int(rng.integers(2))])
            wm = rng.random(int(rng.integers(1, 21))) + 1e-3
            wn = rng.random(int(rng.integers(1, 21))) + 1e-3
            mu = DiscreteMeasure(rng.random((wm.size, s)), wm / wm.sum())
            nu = DiscreteMeasure(rng.random((wn.size, d)), wn / wn.sum())
            assert decomposition_residual(mu, nu, spec) <= 1e-9

    def test_split_mismatch_rejected(self):
        mu = validate_measure([[0.0, 0.0]], [1.0])
        nu = validate_measure([[0.0, 3.0]], [1.0])
        with pytest.raises(ValueError):
            decomposition_residual(mu, nu, additive(1, l1(), l1()))


class TestDependentCoupling:
    def test_single_point_identity(self):
        rng = np.random.default_rng(23)
        spec = additive(1, sql2(), sql2())
        assert dependent_coupling_check(spec, 3, 1, rng) <= 1e-12

    def test_seeded_trials(self):
        spec = additive(1, sql2(), sql2())
        for seed in range(30):
            rng = np.random.default_rng(seed)
            assert dependent_coupling_check(spec, 3, 50, rng) <= 1e-9

    def test_requires_room_for_residual(self):
        rng = np.random.default_rng(1)
        with pytest.raises(ValueError):
            dependent_coupling_check(additive(2, l1(), l1()), 2, 5, rng)


class TestTheoryRateFor:
    def test_mapping(self):
        assert theory_rate_for("semidiscrete:5:10:1", "sql2").rate_class == "param"
        assert theory_rate_for("cube:10:10", "sql2").exponent == pytest.approx(0.2)
        assert theory_rate_for("cube:3:10", "l1").exponent == pytest.approx(1 / 3)
        assert theory_rate_for("sphere:1:5", "sql2").rate_class == "param"
        assert theory_rate_for("cube:5:10", "pow-coord:1.5").exponent \
            == pytest.approx(1.5 / 5)
