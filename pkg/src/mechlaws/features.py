"""The frozen random hidden layer: smooth inverse-quadratic features.

Each feature is h_i(x, v) = 1 / (|xs - cx_i|^2 + |vs - cv_i|^2 + s^2)
evaluated on scaled coordinates, where the centers (cx, cv) are drawn
once, uniformly at random, and never trained.  Only the linear output
layer on top of these features is ever fitted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset, Scaler
from .errors import InvalidInputError


@dataclass(frozen=True)
class FeatureBank:
    """Frozen first-layer weights of the random-feature network.

    ``centers_x`` and ``centers_v`` live in scaled coordinates; ``scale``
    is the shared softening s (the kernel peak value is 1/s^2).
    """

    centers_x: np.ndarray  # (n_feat, dim)
    centers_v: np.ndarray  # (n_feat, dim)
    scale: float
    seed: int
    scaler: Scaler

    def __post_init__(self):
        object.__setattr__(self, "centers_x", np.atleast_2d(np.asarray(self.centers_x, dtype=float)))
        object.__setattr__(self, "centers_v", np.atleast_2d(np.asarray(self.centers_v, dtype=float)))
        if self.centers_x.shape != self.centers_v.shape:
            raise InvalidInputError("centers_x and centers_v must have identical shapes")
        if not self.scale > 0:
            raise InvalidInputError("feature scale must be positive")
        if self.scaler.dim != self.dim:
            raise InvalidInputError("scaler dimension does not match the bank")

    @property
    def n_feat(self) -> int:
        return self.centers_x.shape[0]

    @property
    def dim(self) -> int:
        return self.centers_x.shape[1]

    def eval_scaled(self, xs: np.ndarray, vs: np.ndarray) -> np.ndarray:
        """Feature rows for already-scaled batches (M, dim) -> (M, n_feat).

        Pure elementwise broadcasting per dimension: each output row only
        depends on its own input row, so batching never changes values.
        """
        d2 = np.full((len(xs), self.n_feat), self.scale * self.scale)
        for d in range(self.dim):
            d2 += (xs[:, d : d + 1] - self.centers_x[None, :, d]) ** 2
            d2 += (vs[:, d : d + 1] - self.centers_v[None, :, d]) ** 2
        return 1.0 / d2


def sample_bank(n_feat: int, dim: int, scaler: Scaler, w03: float, seed: int,
                range_x=None, range_v=None, padding: float = 0.1) -> FeatureBank:
    """Draw a feature bank with centers uniform over the scaled ranges.

    Default ranges are [-1, 1] per dimension, padded by ``padding`` on
    both sides, so the features cover the occupied scaled phase space.
    Deterministic for a fixed seed.
    """
    if n_feat < 1:
        raise InvalidInputError("n_feat must be >= 1")
    if not w03 > 0:
        raise InvalidInputError("w03 must be positive")
    if dim != scaler.dim:
        raise InvalidInputError("dim does not match the scaler")

    def _ranges(given):
        if given is None:
            lo = np.full(dim, -1.0 - padding)
            hi = np.full(dim, 1.0 + padding)
        else:
            arr = np.asarray(given, dtype=float).reshape(dim, 2)
            lo, hi = arr[:, 0], arr[:, 1]
            if np.any(hi < lo):
                raise InvalidInputError("center ranges must satisfy lo <= hi")
        return lo, hi

    lo_x, hi_x = _ranges(range_x)
    lo_v, hi_v = _ranges(range_v)
    rng = np.random.default_rng(seed)
    centers_x = rng.uniform(lo_x, hi_x, size=(n_feat, dim))
    centers_v = rng.uniform(lo_v, hi_v, size=(n_feat, dim))
    return FeatureBank(centers_x, centers_v, float(w03), int(seed), scaler)


def features(bank: FeatureBank, x, v) -> np.ndarray:
    """Feature vector (n_feat,) of a single raw phase point."""
    x = np.asarray(x, dtype=float).reshape(-1)
    v = np.asarray(v, dtype=float).reshape(-1)
    if x.shape != (bank.dim,) or v.shape != (bank.dim,):
        raise InvalidInputError(f"phase point dimension mismatch (expected {bank.dim})")
    xs, vs = bank.scaler.transform(x, v)
    return bank.eval_scaled(xs[None, :], vs[None, :])[0]


def feature_matrix(bank: FeatureBank, ds: Dataset) -> np.ndarray:
    """Feature rows for every dataset sample, in dataset order."""
    if ds.dim != bank.dim:
        raise InvalidInputError("dataset dimension does not match the bank")
    xs, vs = bank.scaler.transform(ds.x, ds.v)
    return bank.eval_scaled(xs, vs)
