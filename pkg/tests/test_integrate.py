import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

import mechlaws as ml
import mechlaws.integrators as integ
from mechlaws.errors import DivergenceError, InvalidInputError


class TestTableaus:
    """Order conditions catch transcription slips in the Butcher tables."""

    @pytest.mark.parametrize("c,a,b,n_stages", [
        (integ._DP5_C, integ._DP5_A, integ._DP5_B, 7),
        (integ._DP8_C, integ._DP8_A, integ._DP8_B, 12),
    ])
    def test_row_sums_match_nodes(self, c, a, b, n_stages):
        for i in range(1, n_stages):
            assert a[i].sum() == pytest.approx(c[i], abs=5e-15)

    @pytest.mark.parametrize("c,b,order", [
        (integ._DP5_C, integ._DP5_B, 5),
        (integ._DP8_C, integ._DP8_B, 7),
    ])
    def test_quadrature_order_conditions(self, c, b, order):
        for p in range(order):
            assert (b * c[: len(b)] ** p).sum() == pytest.approx(1.0 / (p + 1), abs=1e-12)

    def test_dp5_error_weights_sum_to_zero(self):
        assert integ._DP5_E.sum() == pytest.approx(0.0, abs=1e-14)

    def test_dp8_error_weights_sum_to_zero(self):
        assert integ._DP8_E5.sum() == pytest.approx(0.0, abs=1e-13)
        assert integ._DP8_B.sum() - integ._DP8_BHH.sum() == pytest.approx(0.0, abs=1e-13)


class TestHarmonicClosedForm:
    @pytest.mark.parametrize("method", ["high_order", "medium_order"])
    def test_matches_sine(self, method):
        spec = ml.harmonic(1.0)
        times, X, V = ml.solve_sampled(spec, [0.0], [1.0], 20.0, 0.1, method=method)
        assert np.max(np.abs(X[:, 0] - np.sin(times))) < 1e-8
        assert np.max(np.abs(V[:, 0] - np.cos(times))) < 1e-8

    def test_samples_sit_on_grid(self):
        traj = ml.integrate(ml.harmonic(1.0), [0.0], [1.0], 1.0, 0.25)
        assert len(traj) == 5
        assert traj.times == pytest.approx([0.0, 0.25, 0.5, 0.75, 1.0], abs=0)


class TestEnergyConservation:
    def test_gravity_pendulum_energy_drift(self):
        spec = ml.gravity_pendulum()
        for v0 in (0.5, 1.7, 3.0):
            _, X, V = ml.solve_sampled(spec, [0.0], [v0], 16 * math.pi, 0.1)
            E = np.array([ml.energy(spec, x, v) for x, v in zip(X, V)])
            assert (E.max() - E.min()) / abs(E.mean()) < 1e-6

    def test_double_pendulum_energy_drift(self):
        spec = ml.double_pendulum()
        _, X, V = ml.solve_sampled(spec, [math.pi / 2, math.pi / 2], [0.0, 0.0], 40.0, 0.02)
        E = np.array([ml.energy(spec, x, v) for x, v in zip(X, V)])
        # this orbit has E = 0; compare the drift against the potential scale
        assert E.max() - E.min() < 1e-6 * 4.0


class TestCrossCheck:
    def test_against_scipy_dop853(self):
        spec = ml.double_pendulum()
        times, X, _ = ml.solve_sampled(spec, [math.pi / 2, math.pi / 2], [0.0, 0.0],
                                       20.0, 0.02)

        def f(t, y):
            return np.concatenate((y[2:], ml.rhs(spec, y[:2], y[2:])))

        sol = solve_ivp(f, (0.0, 20.0), [math.pi / 2, math.pi / 2, 0.0, 0.0],
                        t_eval=times, method="DOP853", rtol=1e-12, atol=1e-12)
        assert np.max(np.abs(sol.y[:2].T - X)) < 1e-8

    def test_methods_agree_on_regular_motion(self):
        spec = ml.gravity_pendulum()
        _, X1, _ = ml.solve_sampled(spec, [0.0], [1.7], 30.0, 0.1, method="high_order")
        _, X2, _ = ml.solve_sampled(spec, [0.0], [1.7], 30.0, 0.1, method="medium_order")
        assert np.max(np.abs(X1 - X2)) < 1e-7


class TestChaoticDivergence:
    def test_two_methods_separate_on_double_pendulum(self, chaos_pair):
        hi, med = chaos_pair["high_order"], chaos_pair["medium_order"]
        gap = np.abs(hi.states[:, 0] - med.states[:, 0])
        assert gap[: len(gap) // 6].max() < 1e-3  # early agreement
        assert gap.max() > 0.1                    # eventual separation


class TestTimeTranslation:
    def test_restart_equals_direct(self):
        spec = ml.gravity_pendulum()
        _, X_direct, V_direct = ml.solve_sampled(spec, [0.0], [1.7], 20.0, 0.1)
        _, X_a, V_a = ml.solve_sampled(spec, [0.0], [1.7], 10.0, 0.1)
        _, X_b, V_b = ml.solve_sampled(spec, X_a[-1], V_a[-1], 10.0, 0.1)
        assert np.max(np.abs(X_b[-1] - X_direct[-1])) < 1e-8
        assert np.max(np.abs(V_b[-1] - V_direct[-1])) < 1e-8


class TestValidation:
    def test_unknown_method(self):
        with pytest.raises(InvalidInputError):
            ml.solve_sampled(ml.harmonic(1.0), [0.0], [1.0], 10.0, 0.1, method="rk4")

    def test_horizon_too_short(self):
        with pytest.raises(InvalidInputError):
            ml.integrate(ml.harmonic(1.0), [0.0], [1.0], 0.2, 0.1)

    def test_bad_dt(self):
        with pytest.raises(InvalidInputError):
            ml.integrate(ml.harmonic(1.0), [0.0], [1.0], 1.0, -0.1)

    def test_divergence_reports_time(self):
        # x' = v, v' = v^2-ish blowup through a crafted spec is not available;
        # instead drive the double pendulum with a non-finite seed
        with pytest.raises((DivergenceError, InvalidInputError)):
            ml.solve_sampled(ml.double_pendulum(), [np.inf, 0.0], [0.0, 0.0], 1.0, 0.1)
