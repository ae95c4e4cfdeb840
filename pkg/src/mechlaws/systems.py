"""The three studied mechanical systems and their continuum equations of motion.

All systems are expressed in rescaled, dimensionless units:

* ``harmonic``          — a = -omega^2 x                        (1 dof)
* ``gravity_pendulum``  — a = -sin(x), x is the deflection angle (1 dof)
* ``double_pendulum``   — full nonlinear two-rod pendulum        (2 dof)
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError

KINDS = ("harmonic", "gravity_pendulum", "double_pendulum")


@dataclass(frozen=True)
class SystemSpec:
    """Identifies a mechanical system and its physical parameters.

    ``periodic_dims`` lists the configuration indices that are angles; they
    may be wrapped into (-pi, pi] when building training data.
    """

    kind: str
    params: dict = field(default_factory=dict)
    periodic_dims: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInputError(f"unknown system kind {self.kind!r}, expected one of {KINDS}")
        object.__setattr__(self, "params", dict(self.params))
        object.__setattr__(self, "periodic_dims", tuple(int(d) for d in self.periodic_dims))
        if self.kind == "harmonic":
            omega = self.params.get("omega")
            if omega is None or not omega > 0:
                raise InvalidInputError("harmonic oscillator needs omega > 0")
        elif self.kind == "double_pendulum":
            for name in ("l1", "l2", "m1", "m2", "g"):
                val = self.params.get(name)
                if val is None or not val > 0:
                    raise InvalidInputError(f"double pendulum needs {name} > 0")
        elif self.params:
            raise InvalidInputError("gravity pendulum is parameter-free after rescaling")
        if any(d < 0 or d >= self.dim for d in self.periodic_dims):
            raise InvalidInputError("periodic_dims out of range")

    @property
    def dim(self) -> int:
        """Configuration-space dimension N."""
        return 2 if self.kind == "double_pendulum" else 1


def harmonic(omega: float = 1.0) -> SystemSpec:
    return SystemSpec("harmonic", {"omega": float(omega)})


def gravity_pendulum() -> SystemSpec:
    return SystemSpec("gravity_pendulum", periodic_dims=(0,))


def double_pendulum(l1=1.0, l2=1.0, m1=2.0, m2=1.0, g=1.0) -> SystemSpec:
    params = {"l1": float(l1), "l2": float(l2), "m1": float(m1), "m2": float(m2), "g": float(g)}
    return SystemSpec("double_pendulum", params, periodic_dims=(0, 1))


def _check_state(spec: SystemSpec, x: np.ndarray, xdot: np.ndarray):
    if x.shape != (spec.dim,) or xdot.shape != (spec.dim,):
        raise InvalidInputError(
            f"state dimension mismatch: expected ({spec.dim},), got x{x.shape}, v{xdot.shape}"
        )


def rhs(spec: SystemSpec, x, xdot) -> np.ndarray:
    """Continuum acceleration for configuration ``x`` and velocity ``xdot``.

    Pure function; raises :class:`InvalidInputError` on dimension mismatch.
    """
    x = np.asarray(x, dtype=float)
    xdot = np.asarray(xdot, dtype=float)
    _check_state(spec, x, xdot)

    if spec.kind == "harmonic":
        omega = spec.params["omega"]
        return -(omega * omega) * x

    if spec.kind == "gravity_pendulum":
        return -np.sin(x)

    l1, l2 = spec.params["l1"], spec.params["l2"]
    m1, m2 = spec.params["m1"], spec.params["m2"]
    g = spec.params["g"]
    M = m1 + m2
    x1, x2 = x
    v1, v2 = xdot
    dphi = x1 - x2
    cos_d = np.cos(dphi)
    sin_d = np.sin(dphi)
    den = M - m2 * cos_d * cos_d  # >= m1 > 0, never singular
    a1 = -(
        g * M * np.sin(x1)
        - g * m2 * cos_d * np.sin(x2)
        + 0.5 * l1 * m2 * v1 * v1 * np.sin(2.0 * dphi)
        + l2 * m2 * v2 * v2 * sin_d
    ) / (l1 * den)
    a2 = sin_d * (g * M * np.cos(x1) + l1 * M * v1 * v1 + l2 * m2 * v2 * v2 * cos_d) / (l2 * den)
    return np.array([a1, a2])


def energy(spec: SystemSpec, x, xdot) -> float:
    """Continuum mechanical energy, used to validate integrator accuracy."""
    x = np.asarray(x, dtype=float)
    xdot = np.asarray(xdot, dtype=float)
    _check_state(spec, x, xdot)

    if spec.kind == "harmonic":
        omega = spec.params["omega"]
        return float(0.5 * xdot[0] ** 2 + 0.5 * omega * omega * x[0] ** 2)

    if spec.kind == "gravity_pendulum":
        return float(0.5 * xdot[0] ** 2 + 1.0 - np.cos(x[0]))

    l1, l2 = spec.params["l1"], spec.params["l2"]
    m1, m2 = spec.params["m1"], spec.params["m2"]
    g = spec.params["g"]
    x1, x2 = x
    v1, v2 = xdot
    kin = 0.5 * m1 * (l1 * v1) ** 2 + 0.5 * m2 * (
        (l1 * v1) ** 2 + (l2 * v2) ** 2 + 2.0 * l1 * l2 * v1 * v2 * np.cos(x1 - x2)
    )
    pot = -(m1 + m2) * g * l1 * np.cos(x1) - m2 * g * l2 * np.cos(x2)
    return float(kin + pot)
