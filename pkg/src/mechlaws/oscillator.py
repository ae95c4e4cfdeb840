"""Closed-form discrete-time results for the linear oscillator.

Sampled at step dt, the oscillator x(t) = A sin(w t + phi) obeys the exact
two-term recursion x_{n+1} = 2 cos(w dt) x_n - x_{n-1}; its discrete force
is velocity independent, -Z(w dt) w^2 x with Z(k) = 2 (1 - cos k)/k^2, and
an exactly conserved discrete energy exists in closed form.  These serve
as machine-precision oracles for the learned pipeline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

_SERIES_CUT = 1e-4


@dataclass(frozen=True)
class HarmonicSpec:
    """Oscillator frequency and sampling step; k = omega * dt."""

    omega: float
    dt: float

    def __post_init__(self):
        if not (self.omega > 0 and self.dt > 0):
            raise InvalidInputError("omega and dt must be positive")

    @property
    def k(self) -> float:
        return self.omega * self.dt


def harmonic_step(spec: HarmonicSpec, x_n, x_nm1):
    """Exact discrete recursion x_{n+1} = 2 cos(k) x_n - x_{n-1}."""
    return 2.0 * math.cos(spec.k) * np.asarray(x_n, dtype=float) - np.asarray(x_nm1, dtype=float)


def z_factor(k: float) -> float:
    """Mass renormalization factor Z(k) = 2 (1 - cos k)/k^2.

    For |k| below 1e-4 the three-term series 1 - k^2/12 + k^4/360 is used
    to dodge the cancellation in 1 - cos k.
    """
    if abs(k) < _SERIES_CUT:
        k2 = k * k
        return 1.0 - k2 / 12.0 + k2 * k2 / 360.0
    return 2.0 * (1.0 - math.cos(k)) / (k * k)


def discrete_energy(spec: HarmonicSpec, x, v):
    """The exactly conserved discrete energy of the sampled oscillator.

    ``v`` must be the backward difference (x_n - x_{n-1})/dt.  Requires
    sin(k) != 0.
    """
    k = spec.k
    sk = math.sin(k)
    if sk == 0.0:
        raise InvalidInputError("discrete energy undefined when sin(omega dt) = 0")
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    omega = spec.omega
    vel = (k * v - omega * x * (1.0 - math.cos(k))) / sk
    return 0.5 * vel * vel + 0.5 * (omega * x) ** 2


def harmonic_discrete_force(spec: HarmonicSpec, x):
    """Discrete force -Z(k) omega^2 x; velocity independent."""
    return -z_factor(spec.k) * spec.omega**2 * np.asarray(x, dtype=float)
