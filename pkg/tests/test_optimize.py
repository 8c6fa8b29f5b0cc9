import numpy as np
import pytest

from conftest import SQRT2, planar_settings

from qwitness.ineq import chsh_operator, chsh_optimal_settings, svetlichny_operator
from qwitness.optimize import (
    Lcg64,
    OptimizationConfig,
    _coordinate_ascent,
    _eig_objective,
    angles_from_settings,
    max_eigenvalue,
    maximize_expectation,
    maximize_violation,
    settings_from_angles,
    violation_threshold,
)
from qwitness.qobs import SettingsTable, ghz_state

SMALL = OptimizationConfig(restarts=3, seed=71)


@pytest.fixture(scope="module")
def chsh_opt():
    return maximize_violation(2, "chsh", SMALL)


@pytest.fixture(scope="module")
def svet3_opt():
    return maximize_violation(3, "svetlichny", OptimizationConfig(restarts=3, seed=72))


class TestMaxEigenvalue:
    def test_scaled_zz(self):
        z = np.diag([1.0, -1.0, -1.0, 1.0]).astype(complex)
        assert abs(max_eigenvalue(2.0 * z) - 2.0) < 1e-12

    def test_zero_matrix(self):
        assert abs(max_eigenvalue(np.zeros((4, 4), dtype=complex))) < 1e-15

    def test_chsh_tsirelson_point(self):
        assert abs(max_eigenvalue(chsh_operator(chsh_optimal_settings())) - 2 * SQRT2) < 1e-12


class TestLcg64:
    def test_reproducible_stream(self):
        a, b = Lcg64(42), Lcg64(42)
        assert [a.next_uint() for _ in range(5)] == [b.next_uint() for _ in range(5)]

    def test_uniform_range(self):
        rng = Lcg64(7)
        values = [rng.uniform() for _ in range(1000)]
        assert all(0.0 <= v < 1.0 for v in values)
        assert 0.3 < sum(values) / len(values) < 0.7

    def test_settings_are_valid(self):
        table = Lcg64(9).settings(3)
        assert table.n_parties == 3

    def test_documented_recurrence(self):
        rng = Lcg64(1)
        expected = (6364136223846793005 * 1 + 1442695040888963407) % 2**64
        assert rng.next_uint() == expected


class TestMaximizeViolation:
    def test_chsh_reaches_tsirelson(self, chsh_opt):
        assert abs(chsh_opt.best_value - 2.0 * SQRT2) < 1e-6
        assert chsh_opt.converged

    def test_history_monotone(self, chsh_opt):
        values = [v for _, v in chsh_opt.history]
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_oracle_consistency(self, chsh_opt):
        check = max_eigenvalue(chsh_operator(chsh_opt.settings))
        assert abs(check - chsh_opt.best_value) < 1e-9

    def test_svetlichny_three_parties(self, svet3_opt):
        assert abs(svet3_opt.best_value - 4.0 * SQRT2) < 1e-6
        check = max_eigenvalue(svetlichny_operator(svet3_opt.settings))
        assert abs(check - svet3_opt.best_value) < 1e-9

    def test_upper_bound_sanity(self, svet3_opt):
        assert svet3_opt.best_value <= 4.0 * SQRT2 + 1e-6

    def test_deterministic_given_seed(self):
        cfg = OptimizationConfig(restarts=2, seed=5)
        first = maximize_violation(2, "chsh", cfg)
        second = maximize_violation(2, "chsh", cfg)
        assert first.history == second.history
        assert first.settings == second.settings
        assert first.best_value == second.best_value

    def test_kind_validation(self):
        with pytest.raises(ValueError, match="exactly two"):
            maximize_violation(3, "chsh", SMALL)
        with pytest.raises(ValueError, match="unknown"):
            maximize_violation(3, "mermin", SMALL)

    def test_result_json(self, chsh_opt):
        data = chsh_opt.to_json_dict()
        assert data["converged"] is True
        assert len(data["settings"]["parties"]) == 2
        assert data["history"][0][0] == 0


class TestSettingRelabelingInvariance:
    def test_max_value_invariant_under_party_setting_swap(self, svet3_opt):
        # Swapping one party's two settings relabels the polynomial's words;
        # the best value over settings must be unchanged.  Re-optimize from
        # the swapped optimum and compare.
        table = svet3_opt.settings
        swapped = SettingsTable(
            ((table.parties[0][1], table.parties[0][0]),) + table.parties[1:]
        )
        cfg = OptimizationConfig(restarts=1, seed=1)
        value, _, _, _, _ = _coordinate_ascent(
            _eig_objective, angles_from_settings(swapped), cfg
        )
        assert abs(value - svet3_opt.best_value) < 1e-6


class TestMaximizeExpectation:
    def test_ghz_three_parties(self):
        res = maximize_expectation(
            3, "svetlichny", ghz_state(3), OptimizationConfig(restarts=3, seed=73)
        )
        assert abs(res.best_value - 4.0 * SQRT2) < 1e-6

    def test_planar_settings_are_already_optimal(self):
        rho = ghz_state(3)
        cfg = OptimizationConfig(restarts=1, seed=74, step_init=0.05, step_min=1e-4)
        rho_t = rho.T.copy()

        def objective(angles):
            from qwitness.optimize import _observables_from_angles, _signed_sum

            return float(np.real(np.sum(_signed_sum(_observables_from_angles(angles)) * rho_t)))

        value, _, _, _, _ = _coordinate_ascent(
            objective, angles_from_settings(planar_settings(3)), cfg
        )
        assert abs(value - 4.0 * SQRT2) < 1e-9

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="shape"):
            maximize_expectation(3, "svetlichny", ghz_state(2), SMALL)


class TestViolationThreshold:
    def test_three_party_threshold(self):
        v = violation_threshold(3, OptimizationConfig(restarts=2, seed=75))
        assert abs(v - 1.0 / SQRT2) < 1e-4

    def test_needs_three_parties(self):
        with pytest.raises(ValueError, match="three"):
            violation_threshold(2, SMALL)

    def test_unknown_family(self):
        with pytest.raises(ValueError, match="family"):
            violation_threshold(3, SMALL, state_family="werner")


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            OptimizationConfig(restarts=0)
        with pytest.raises(ValueError):
            OptimizationConfig(step_init=1e-8, step_min=1e-7)

    def test_json_round_trip(self):
        cfg = OptimizationConfig(restarts=5, seed=99)
        assert OptimizationConfig.from_json_dict(cfg.to_json_dict()) == cfg

    def test_angles_round_trip(self):
        table = planar_settings(3)
        again = settings_from_angles(angles_from_settings(table))
        for pair_a, pair_b in zip(table.parties, again.parties):
            for va, vb in zip(pair_a, pair_b):
                assert abs(va.x - vb.x) < 1e-12
                assert abs(va.y - vb.y) < 1e-12
                assert abs(va.z - vb.z) < 1e-12
