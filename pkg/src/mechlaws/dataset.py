"""Finite-difference phase samples and the affine scaling of the observables.

Only positions are observed.  Velocity and acceleration stand-ins are the
backward difference v_n = (x_n - x_{n-1})/dt and the central second
difference a_n = (x_{n+1} - 2 x_n + x_{n-1})/dt^2; one sample exists per
interior index of every trajectory.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError
from .trajectory import Trajectory

_TWO_PI = 2.0 * np.pi


def wrap_angle(theta):
    """Reduce an angle (or array of angles) into (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(theta, dtype=float), _TWO_PI)


@dataclass(frozen=True)
class PhaseSample:
    """One (x, v, a) triplet tagged with its source trajectory and step."""

    x: np.ndarray
    v: np.ndarray
    a: np.ndarray
    traj_id: int
    step: int


@dataclass(frozen=True)
class Scaler:
    """Per-dimension affine maps sending the training range onto [-1, 1].

    scaled = (value + offset) * gain.  Dimensions flagged in ``wrap`` are
    reduced into (-pi, pi] before the affine map.  A zero ``gain`` marks a
    degenerate (constant) dimension; it maps to 0 and inverts to the
    stored constant.
    """

    offset_x: np.ndarray
    gain_x: np.ndarray
    offset_v: np.ndarray
    gain_v: np.ndarray
    wrap: np.ndarray

    def __post_init__(self):
        for name in ("offset_x", "gain_x", "offset_v", "gain_v"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float).reshape(-1))
        object.__setattr__(self, "wrap", np.asarray(self.wrap, dtype=bool).reshape(-1))

    @property
    def dim(self) -> int:
        return len(self.offset_x)

    def transform(self, x, v):
        """Map raw (x, v) into scaled coordinates. Accepts (N,) or (M, N)."""
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        if x.shape != v.shape or x.shape[-1] != self.dim:
            raise InvalidInputError("scaler dimension mismatch")
        if self.wrap.any():
            x = np.where(self.wrap, wrap_angle(x), x)
        return (x + self.offset_x) * self.gain_x, (v + self.offset_v) * self.gain_v

    def inverse(self, xs, vs):
        """Invert the affine maps (wrapped dimensions return the principal angle)."""
        xs = np.asarray(xs, dtype=float)
        vs = np.asarray(vs, dtype=float)
        gx = np.where(self.gain_x == 0.0, 1.0, self.gain_x)
        gv = np.where(self.gain_v == 0.0, 1.0, self.gain_v)
        x = np.where(self.gain_x == 0.0, -self.offset_x, xs / gx - self.offset_x)
        v = np.where(self.gain_v == 0.0, -self.offset_v, vs / gv - self.offset_v)
        return x, v

    def to_dict(self) -> dict:
        return {
            "offset_x": self.offset_x.tolist(),
            "gain_x": self.gain_x.tolist(),
            "offset_v": self.offset_v.tolist(),
            "gain_v": self.gain_v.tolist(),
            "wrap": [bool(w) for w in self.wrap],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Scaler":
        return cls(d["offset_x"], d["gain_x"], d["offset_v"], d["gain_v"], d["wrap"])


@dataclass(frozen=True)
class Dataset:
    """All (x, v, a) samples of a training collection, plus their scaler.

    ``boundaries`` holds one (start, end) row range per source trajectory;
    no finite-difference stencil crosses a boundary.
    """

    x: np.ndarray  # (n_samples, dim)
    v: np.ndarray
    a: np.ndarray
    traj_ids: np.ndarray
    steps: np.ndarray
    dt: float
    scaler: Scaler
    boundaries: tuple
    wrap: np.ndarray
    n_skipped: int = 0

    def __len__(self) -> int:
        return len(self.x)

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    @property
    def n_trajectories(self) -> int:
        return len(self.boundaries)

    def sample(self, i: int) -> PhaseSample:
        return PhaseSample(self.x[i].copy(), self.v[i].copy(), self.a[i].copy(),
                           int(self.traj_ids[i]), int(self.steps[i]))

    def samples(self):
        return [self.sample(i) for i in range(len(self))]


def _fit_maps(values: np.ndarray):
    lo = values.min(axis=0)
    hi = values.max(axis=0)
    width = hi - lo
    degenerate = width == 0.0
    offset = np.where(degenerate, -lo, -(lo + hi) / 2.0)
    gain = np.divide(2.0, width, out=np.zeros_like(width), where=~degenerate)
    return offset, gain


def fit_scaler(ds: "Dataset") -> Scaler:
    """Fit per-dimension maps onto [-1, 1] from the dataset's x and v ranges."""
    if len(ds) == 0:
        raise InvalidInputError("cannot fit a scaler on an empty dataset")
    off_x, gain_x = _fit_maps(ds.x)
    off_v, gain_v = _fit_maps(ds.v)
    return Scaler(off_x, gain_x, off_v, gain_v, ds.wrap)


def build_dataset(trajs, wrap=None) -> Dataset:
    """Convert trajectories into the training dataset of (x, v, a) triplets.

    ``wrap`` flags (per dimension) select angles that are reduced into
    (-pi, pi] before differencing; their differences are taken along the
    shortest arc so v and a stay smooth across the branch cut.

    Trajectories shorter than 3 samples are skipped and counted in
    ``n_skipped``; mixed dt values raise :class:`InvalidInputError`.
    """
    trajs = list(trajs)
    if not trajs:
        raise InvalidInputError("need at least one trajectory")
    dim = trajs[0].dim
    dt = float(trajs[0].dt)
    for t in trajs:
        if t.dim != dim:
            raise InvalidInputError("all trajectories must share the same dimension")
        if abs(t.dt - dt) > 1e-12 * max(dt, t.dt):
            raise InvalidInputError(f"mixed dt values: {dt} vs {t.dt}")
    wrap = np.zeros(dim, dtype=bool) if wrap is None else np.asarray(wrap, dtype=bool).reshape(-1)
    if wrap.shape != (dim,):
        raise InvalidInputError("wrap flags must have one entry per dimension")

    xs, vs, accs, ids, steps, bounds = [], [], [], [], [], []
    n_skipped = 0
    row = 0
    for tid, traj in enumerate(trajs):
        pts = traj.states
        if len(pts) < 3:
            n_skipped += 1
            continue
        x_mid = pts[1:-1].copy()
        v = (pts[1:-1] - pts[:-2]) / dt
        a = (pts[2:] - 2.0 * pts[1:-1] + pts[:-2]) / (dt * dt)
        if wrap.any():
            # shortest-arc differences keep v, a smooth across the branch cut
            x_mid[:, wrap] = wrap_angle(x_mid[:, wrap])
            diff = wrap_angle(np.diff(pts[:, wrap], axis=0))
            v[:, wrap] = diff[:-1] / dt
            a[:, wrap] = (diff[1:] - diff[:-1]) / (dt * dt)
        m = len(x_mid)
        xs.append(x_mid)
        vs.append(v)
        accs.append(a)
        ids.append(np.full(m, tid))
        steps.append(np.arange(1, m + 1))
        bounds.append((row, row + m))
        row += m
    if row == 0:
        raise InvalidInputError("no trajectory long enough to form a sample")

    ds = Dataset(
        x=np.concatenate(xs),
        v=np.concatenate(vs),
        a=np.concatenate(accs),
        traj_ids=np.concatenate(ids),
        steps=np.concatenate(steps),
        dt=dt,
        scaler=None,
        boundaries=tuple(bounds),
        wrap=wrap,
        n_skipped=n_skipped,
    )
    object.__setattr__(ds, "scaler", fit_scaler(ds))
    return ds


def save_dataset_csv(ds: Dataset, path, meta: dict | None = None):
    """Write ``traj,n,x1..xN,v1..vN,a1..aN`` rows at full double precision."""
    dim = ds.dim
    cols = ["traj", "n"]
    for tag in ("x", "v", "a"):
        cols += [f"{tag}{i + 1}" for i in range(dim)]
    with open(path, "w", encoding="utf-8") as fh:
        for key, value in (meta or {}).items():
            fh.write(f"# {key}={value}\n")
        fh.write(",".join(cols) + "\n")
        for i in range(len(ds)):
            vals = [str(int(ds.traj_ids[i])), str(int(ds.steps[i]))]
            for arr in (ds.x, ds.v, ds.a):
                vals += [format(float(val), ".17g") for val in arr[i]]
            fh.write(",".join(vals) + "\n")
