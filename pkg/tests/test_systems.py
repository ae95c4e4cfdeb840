import math

import numpy as np
import pytest

import mechlaws as ml
from mechlaws.errors import InvalidInputError


class TestSpecs:
    def test_dims(self):
        assert ml.harmonic(2.0).dim == 1
        assert ml.gravity_pendulum().dim == 1
        assert ml.double_pendulum().dim == 2

    def test_default_periodic_dims(self):
        assert ml.gravity_pendulum().periodic_dims == (0,)
        assert ml.double_pendulum().periodic_dims == (0, 1)
        assert ml.harmonic().periodic_dims == ()

    @pytest.mark.parametrize("bad", [0.0, -1.0])
    def test_harmonic_needs_positive_omega(self, bad):
        with pytest.raises(InvalidInputError):
            ml.harmonic(bad)

    def test_double_pendulum_needs_positive_params(self):
        with pytest.raises(InvalidInputError):
            ml.double_pendulum(m2=-1.0)

    def test_unknown_kind(self):
        with pytest.raises(InvalidInputError):
            ml.SystemSpec("triple_pendulum")


class TestRhs:
    def test_gravity_equilibrium(self):
        spec = ml.gravity_pendulum()
        assert ml.rhs(spec, [0.0], [0.0]) == pytest.approx([0.0])

    def test_gravity_quarter_turn(self):
        spec = ml.gravity_pendulum()
        assert ml.rhs(spec, [math.pi / 2], [3.3]) == pytest.approx([-1.0])

    def test_gravity_rhs_is_odd(self):
        spec = ml.gravity_pendulum()
        rng = np.random.default_rng(0)
        for _ in range(20):
            x, v = rng.normal(size=1), rng.normal(size=1)
            assert ml.rhs(spec, -x, -v) == pytest.approx(-ml.rhs(spec, x, v))

    def test_double_pendulum_hand_evaluated_point(self):
        # at (pi/2, pi/2, 0, 0): numerator g*M*sin(x1) - g*m2*sin(x2) = 2,
        # denominator l1*(M - m2) = 2, and the x2 equation vanishes with dphi
        spec = ml.double_pendulum(l1=1, l2=1, m1=2, m2=1, g=1)
        a = ml.rhs(spec, [math.pi / 2, math.pi / 2], [0.0, 0.0])
        assert a == pytest.approx([-1.0, 0.0], abs=1e-14)

    def test_harmonic_rhs(self):
        spec = ml.harmonic(3.0)
        assert ml.rhs(spec, [0.5], [9.9]) == pytest.approx([-4.5])

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidInputError):
            ml.rhs(ml.double_pendulum(), [1.0], [1.0])

    def test_rhs_is_pure(self):
        spec = ml.double_pendulum()
        x = np.array([0.3, -0.4])
        v = np.array([1.0, 2.0])
        first = ml.rhs(spec, x, v)
        assert np.array_equal(first, ml.rhs(spec, x, v))
        assert x == pytest.approx([0.3, -0.4])


class TestEnergy:
    def test_gravity_energy_at_rest(self):
        spec = ml.gravity_pendulum()
        assert ml.energy(spec, [0.0], [0.0]) == pytest.approx(0.0)

    def test_double_pendulum_energy_hanging(self):
        spec = ml.double_pendulum(l1=1, l2=1, m1=2, m2=1, g=1)
        # both rods down: V = -(M g l1 + m2 g l2) = -4
        assert ml.energy(spec, [0.0, 0.0], [0.0, 0.0]) == pytest.approx(-4.0)

    def test_energy_constant_along_rhs_direction(self):
        # dE/dt = v . (a + grad V) = 0 for the exact rhs
        spec = ml.double_pendulum()
        rng = np.random.default_rng(1)
        for _ in range(10):
            x, v = rng.normal(size=2), rng.normal(size=2)
            a = ml.rhs(spec, x, v)
            eps = 1e-6
            e_plus = ml.energy(spec, x + eps * v, v + eps * a)
            e_minus = ml.energy(spec, x - eps * v, v - eps * a)
            scale = 1.0 + abs(ml.energy(spec, x, v))
            assert abs(e_plus - e_minus) / (2 * eps) < 1e-5 * scale
