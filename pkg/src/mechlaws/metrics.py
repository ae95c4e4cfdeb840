"""Figures of merit for trained models and continuations.

The percentages the experiments report have these frozen definitions:

* force precision      = 100 * (1 - |F_pred - a| / |a|)          (2-norms)
* conservation metric  = pooled std of C_n around per-trajectory
                         means, divided by the pooled absolute mean
* reconstruction error = 100 * RMS(recon - truth) / RMS(truth - mean(truth))
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset
from .errors import InvalidInputError
from .features import feature_matrix
from .laws import LawModel
from .trajectory import Trajectory


def force_precision(F_pred, a) -> float:
    """Percentage match between predicted forces and acceleration proxies."""
    F_pred = np.asarray(F_pred, dtype=float)
    a = np.asarray(a, dtype=float)
    if F_pred.shape != a.shape:
        raise InvalidInputError("force_precision needs matching shapes")
    norm = float(np.linalg.norm(a))
    if norm == 0.0:
        raise InvalidInputError("acceleration norm is zero")
    return max(0.0, 100.0 * (1.0 - float(np.linalg.norm(F_pred - a)) / norm))


@dataclass(frozen=True)
class LawConservationStats:
    """Conservation diagnostics of one law over a dataset."""

    law_index: int
    eigenvalue: float
    mean_per_traj: np.ndarray
    pooled_sigma: float
    pooled_abs_mean: float
    normalized_precision: float | None  # None when the pooled mean vanishes
    running_mean: tuple  # per trajectory: (bin_times, bin_means)

    @property
    def mean_separation_over_sigma(self) -> float:
        if self.pooled_sigma == 0.0:
            return float("inf")
        return float(np.ptp(self.mean_per_traj)) / self.pooled_sigma


@dataclass(frozen=True)
class ConservationReport:
    laws: tuple

    @property
    def worst_normalized_precision(self) -> float:
        vals = [s.normalized_precision for s in self.laws if s.normalized_precision is not None]
        if not vals:
            raise InvalidInputError("no law has a nonzero pooled mean")
        return max(vals)


def conservation_report(model: LawModel, ds: Dataset, n_bins: int = 20) -> ConservationReport:
    """Per-law conservation statistics of a trained model over a dataset.

    The running means (per trajectory, ``n_bins`` time bins) show that the
    law values fluctuate but their average stays put.
    """
    if len(ds) == 0:
        raise InvalidInputError("empty dataset")
    F = feature_matrix(model.bank, ds)
    stats = []
    for idx, law in enumerate(model.laws):
        C = F @ law.weights
        means = []
        dev_sq = 0.0
        count = 0
        running = []
        for start, end in ds.boundaries:
            seg = C[start:end]
            mu = float(seg.mean())
            means.append(mu)
            dev_sq += float(((seg - mu) ** 2).sum())
            count += len(seg)
            bins = np.array_split(np.arange(start, end), min(n_bins, end - start))
            times = np.array([ds.dt * ds.steps[b].mean() for b in bins])
            bmeans = np.array([C[b].mean() for b in bins])
            running.append((times, bmeans))
        means = np.array(means)
        sigma = float(np.sqrt(dev_sq / count))
        weights = np.array([end - start for start, end in ds.boundaries], dtype=float)
        abs_mean = float(np.sum(weights * np.abs(means)) / weights.sum())
        norm_prec = sigma / abs_mean if abs_mean > 0.0 else None
        stats.append(
            LawConservationStats(idx, law.eigenvalue, means, sigma, abs_mean, norm_prec,
                                 tuple(running))
        )
    return ConservationReport(tuple(stats))


def reconstruction_error(x_recon: Trajectory, x_true: Trajectory):
    """RMS deviation of a reconstruction, in percent of the truth's spread.

    Returns ``(pooled, per_dimension)``.
    """
    if len(x_recon) != len(x_true):
        raise InvalidInputError("trajectories must have equal length")
    if abs(x_recon.dt - x_true.dt) > 1e-12 * max(x_recon.dt, x_true.dt):
        raise InvalidInputError("trajectories must share dt")
    diff = x_recon.states - x_true.states
    centred = x_true.states - x_true.states.mean(axis=0)
    denom_sq = np.mean(centred**2, axis=0)
    if np.any(denom_sq == 0.0):
        raise InvalidInputError("constant true trajectory has no spread to compare against")
    per_dim = 100.0 * np.sqrt(np.mean(diff**2, axis=0) / denom_sq)
    pooled = 100.0 * float(np.sqrt(np.mean(diff**2) / np.mean(centred**2)))
    return pooled, per_dim


def divergence_time(traj_a: Trajectory, traj_b: Trajectory, threshold: float):
    """First sampling time where the trajectories differ by more than
    ``threshold`` in any coordinate (inf-norm); None if they never do.

    Length mismatches are compared over the common prefix.
    """
    if traj_a.dim != traj_b.dim:
        raise InvalidInputError("trajectories must share dimension")
    if abs(traj_a.dt - traj_b.dt) > 1e-12 * max(traj_a.dt, traj_b.dt):
        raise InvalidInputError("trajectories must share dt")
    n = min(len(traj_a), len(traj_b))
    gap = np.max(np.abs(traj_a.states[:n] - traj_b.states[:n]), axis=1)
    hits = np.flatnonzero(gap > threshold)
    if len(hits) == 0:
        return None
    return float(hits[0] * traj_a.dt)


def max_velocity_proxy(states: np.ndarray, dt: float) -> float:
    """Largest |(x_{n+1} - x_n)/dt| over a state sequence (all dimensions)."""
    states = np.atleast_2d(np.asarray(states, dtype=float))
    if len(states) < 2:
        return 0.0
    return float(np.max(np.abs(np.diff(states, axis=0))) / dt)


@dataclass
class Report:
    """Flat bundle of the headline numbers, serializable to key=value text."""

    force_precision_pct: float | None = None
    conservation_precision: float | None = None
    reconstruction_error_pct: float | None = None
    divergence_time: float | None = None
    bounded: bool | None = None
    config_hash: str = ""
    extra: dict = field(default_factory=dict)

    def lines(self):
        out = []
        if self.config_hash:
            out.append(f"config_hash={self.config_hash}")
        for key in ("force_precision_pct", "conservation_precision",
                    "reconstruction_error_pct", "divergence_time", "bounded"):
            val = getattr(self, key)
            if val is not None:
                out.append(f"{key}={val}")
        for key in sorted(self.extra):
            out.append(f"{key}={self.extra[key]}")
        return out

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(self.lines()) + "\n")
