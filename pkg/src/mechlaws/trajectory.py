"""Uniformly sampled trajectories and their CSV representation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError


@dataclass(frozen=True)
class Trajectory:
    """A uniformly sampled time series of configuration vectors.

    ``initial_velocity`` is the continuum v(0) used to start a simulation.
    It is never exposed to training and is ``None`` for observed data.
    """

    dt: float
    states: np.ndarray  # (n_samples, dim)
    initial_velocity: np.ndarray | None = None
    label: str = ""

    def __post_init__(self):
        states = np.atleast_2d(np.asarray(self.states, dtype=float))
        object.__setattr__(self, "states", states)
        if not self.dt > 0:
            raise InvalidInputError("dt must be positive")
        if states.ndim != 2 or len(states) < 3:
            raise InvalidInputError("a trajectory needs at least 3 samples of equal dimension")
        if self.initial_velocity is not None:
            v0 = np.asarray(self.initial_velocity, dtype=float).reshape(-1)
            if v0.shape != (states.shape[1],):
                raise InvalidInputError("initial_velocity dimension mismatch")
            object.__setattr__(self, "initial_velocity", v0)

    def __len__(self) -> int:
        return len(self.states)

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(len(self.states))


def _fmt(value: float) -> str:
    # 17 significant digits: enough to round-trip any IEEE double
    return format(float(value), ".17g")


def save_trajectory_csv(traj: Trajectory, path, meta: dict | None = None):
    """Write ``t,x1..xN`` rows at full double precision.

    ``meta`` entries become leading ``# key=value`` comment lines.
    """
    dim = traj.dim
    header = "t," + ",".join(f"x{i + 1}" for i in range(dim))
    with open(path, "w", encoding="utf-8") as fh:
        for key, value in (meta or {}).items():
            fh.write(f"# {key}={value}\n")
        fh.write(header + "\n")
        for n, row in enumerate(traj.states):
            fh.write(_fmt(n * traj.dt) + "," + ",".join(_fmt(v) for v in row) + "\n")


def load_trajectory_csv(path, label: str = "") -> Trajectory:
    """Read a trajectory written by :func:`save_trajectory_csv`."""
    times = []
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        header = None
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if header is None:
                header = line.split(",")
                if header[0] != "t" or len(header) < 2:
                    raise InvalidInputError(f"{path}: expected header 't,x1..xN'")
                continue
            parts = line.split(",")
            times.append(float(parts[0]))
            rows.append([float(p) for p in parts[1:]])
    if header is None or len(rows) < 3:
        raise InvalidInputError(f"{path}: fewer than 3 samples")
    times = np.asarray(times)
    steps = np.diff(times)
    dt = float(np.median(steps))
    if not np.allclose(steps, dt, rtol=1e-9, atol=1e-12):
        raise InvalidInputError(f"{path}: non-uniform sampling times")
    return Trajectory(dt=dt, states=np.asarray(rows), label=label or str(path))
