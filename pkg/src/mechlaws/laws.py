"""Training of the output layer: conserved quantities and the discrete force.

Both targets are linear combinations of the same random features.  A
conserved quantity is the unit direction that minimizes the variation of
C_n = sum_i F_ni w_i along trajectories, i.e. the smallest-eigenvalue
eigenvector of dF^T dF built from same-trajectory row pairs.  The force
weights solve the normal equations F^T F w = F^T a through a spectral
cutoff pseudoinverse because F^T F is badly conditioned.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset, Scaler
from .errors import DegenerateModelError, InvalidInputError
from .features import FeatureBank, feature_matrix, features, sample_bank
from .linalg import eigh_sym


@dataclass(frozen=True)
class ConservedLaw:
    """A unit-norm output-layer direction whose feature sum stays constant.

    ``sigma`` is the standard deviation of C_n around its own trajectory's
    mean, pooled over the training set; ``mean_per_traj`` records the
    per-trajectory means (conserved quantities distinguish motions).
    """

    weights: np.ndarray
    eigenvalue: float
    sigma: float
    mean_per_traj: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float).reshape(-1))
        object.__setattr__(self, "mean_per_traj", np.asarray(self.mean_per_traj, dtype=float).reshape(-1))


@dataclass(frozen=True)
class ForceModel:
    """Output-layer weights mapping features to acceleration components."""

    weights: np.ndarray  # (n_feat, dim)
    cutoff_eps: float
    spectrum_kept: int
    training_residual: np.ndarray  # (dim,) relative residual per component

    def __post_init__(self):
        object.__setattr__(self, "weights", np.atleast_2d(np.asarray(self.weights, dtype=float)))
        object.__setattr__(self, "training_residual",
                           np.asarray(self.training_residual, dtype=float).reshape(-1))


@dataclass(frozen=True)
class LawModel:
    """Everything the recursion needs: bank, conservation laws and force."""

    bank: FeatureBank
    laws: tuple
    force: ForceModel
    dt: float
    seed: int
    config_hash: str = ""

    def __post_init__(self):
        object.__setattr__(self, "laws", tuple(self.laws))
        n_feat = self.bank.n_feat
        if any(len(law.weights) != n_feat for law in self.laws) or self.force.weights.shape[0] != n_feat:
            raise InvalidInputError("bank, laws and force must share n_feat")

    @property
    def n_laws(self) -> int:
        return len(self.laws)

    @property
    def dim(self) -> int:
        return self.bank.dim

    def features_at(self, x, v) -> np.ndarray:
        return features(self.bank, x, v)

    def force_from_features(self, phi: np.ndarray) -> np.ndarray:
        return self.force.weights.T @ phi

    def law_values_from_features(self, phi: np.ndarray) -> np.ndarray:
        return np.array([float(phi @ law.weights) for law in self.laws])


def _fix_sign(w: np.ndarray) -> np.ndarray:
    # deterministic eigenvector orientation: largest-|component| positive
    pivot = int(np.argmax(np.abs(w)))
    return -w if w[pivot] < 0 else w


def _pair_indices(boundaries, k_sep: int):
    left, right = [], []
    for start, end in boundaries:
        m = end - start - k_sep
        if m > 0:
            left.append(np.arange(start, start + m))
            right.append(np.arange(start + k_sep, end))
    if not left:
        return None, None
    return np.concatenate(left), np.concatenate(right)


def extract_conserved(F: np.ndarray, boundaries, k_sep: int = 10, n_laws: int = 2,
                      null_floor: float = 1e-12):
    """Smallest-variation output directions of the feature matrix.

    ``boundaries`` are the per-trajectory (start, end) row ranges of F;
    difference rows F_n - F_{n+k_sep} are formed only inside a single
    trajectory.  Returns ``n_laws`` laws sorted by ascending eigenvalue
    of dF^T dF.

    Smooth kernel features make dF^T dF numerically rank deficient: its
    round-off null space is populated by directions whose feature sum is
    tiny everywhere (the trivial law in disguise), conserved to machine
    precision without describing the dynamics.  Eigenvalues at or below
    ``null_floor`` times the largest one are therefore skipped and the
    smallest eigenvalues above the floor are returned.  Pass 0 to select
    the absolute smallest eigenvalues unconditionally.
    """
    F = np.asarray(F, dtype=float)
    n_feat = F.shape[1]
    if k_sep < 1:
        raise InvalidInputError("k_sep must be >= 1")
    if n_laws < 1 or n_laws > n_feat:
        raise InvalidInputError("n_laws must be in [1, n_feat]")
    if null_floor < 0:
        raise InvalidInputError("null_floor must be >= 0")
    left, right = _pair_indices(boundaries, k_sep)
    if left is None:
        raise InvalidInputError("no trajectory is long enough for the separation index")

    dF = F[left] - F[right]
    G = dF.T @ dF
    evals, evecs = eigh_sym(G)

    above = np.flatnonzero(evals > null_floor * max(evals[-1], 0.0))
    if len(above) < n_laws:  # degenerate spectrum: fall back to the largest skipped ones
        below = np.setdiff1d(np.arange(n_feat), above)
        above = np.concatenate([below[len(below) - (n_laws - len(above)):], above])
    selected = np.sort(above)[:n_laws]

    laws = []
    for j in selected:
        w = _fix_sign(evecs[:, j])
        w = w / np.linalg.norm(w)
        C = F @ w
        means = []
        dev_sq = 0.0
        for start, end in boundaries:
            seg = C[start:end]
            mu = float(seg.mean())
            means.append(mu)
            dev_sq += float(((seg - mu) ** 2).sum())
        sigma = float(np.sqrt(dev_sq / len(C)))
        laws.append(ConservedLaw(w, float(max(evals[j], 0.0)), sigma, np.array(means)))
    return laws


def fit_force(F: np.ndarray, a: np.ndarray, eps: float = 1e-10) -> ForceModel:
    """Cutoff-pseudoinverse least-squares fit of the acceleration proxies.

    Eigenmodes of F^T F with eigenvalue ratio <= ``eps`` to the largest
    are dropped.  Raises :class:`DegenerateModelError` when the feature
    matrix has no positive spectrum at all.
    """
    F = np.asarray(F, dtype=float)
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if F.shape[0] != a.shape[0]:
        raise InvalidInputError("row counts of F and a must match")
    if not 0.0 < eps < 1.0:
        raise InvalidInputError("eps must lie in (0, 1)")

    G = F.T @ F
    b = F.T @ a
    evals, evecs = eigh_sym(G)
    lam_max = float(evals[-1])
    if not lam_max > 0.0:
        raise DegenerateModelError("all eigenvalues fall below the cutoff (zero feature matrix)")
    keep = evals / lam_max > eps
    coef = evecs.T @ b
    w = evecs[:, keep] @ (coef[keep] / evals[keep, None])

    resid = np.empty(a.shape[1])
    pred = F @ w
    for c in range(a.shape[1]):
        norm = float(np.linalg.norm(a[:, c]))
        resid[c] = float(np.linalg.norm(pred[:, c] - a[:, c])) / norm if norm > 0 else 0.0
    return ForceModel(w, float(eps), int(np.count_nonzero(keep)), resid)


def evaluate_law(model: LawModel, law_index: int, x, v) -> float:
    """C = features(x, v) . w for one stored conservation law."""
    if not 0 <= law_index < model.n_laws:
        raise InvalidInputError(f"law index {law_index} out of range [0, {model.n_laws})")
    phi = model.features_at(x, v)
    return float(phi @ model.laws[law_index].weights)


def evaluate_force(model: LawModel, x, v) -> np.ndarray:
    """Learned discrete force at a raw phase point."""
    return model.force_from_features(model.features_at(x, v))


def _padded_ranges(values: np.ndarray, padding: float) -> np.ndarray:
    lo = values.min(axis=0)
    hi = values.max(axis=0)
    pad = padding * (hi - lo) / 2.0
    return np.stack([lo - pad, hi + pad], axis=1)


def train(ds: Dataset, n_feat: int, w03: float, seed: int, n_laws: int = 2, k_sep: int = 10,
          cutoff_eps: float = 1e-10, padding: float = 0.1, feature_space: str = "raw",
          null_floor: float = 1e-12, config_hash: str = ""):
    """Run the full training pass; returns ``(model, feature_matrix)``.

    ``feature_space`` selects where the kernels live: ``"raw"`` evaluates
    them on the observed (wrapped) coordinates with centers drawn over the
    padded data ranges; ``"scaled"`` evaluates them on the [-1, 1] mapped
    coordinates.  Raw is the default: the kernel width w03 then plays
    against the physical coordinate ranges, which is what reproduces the
    reference experiments.
    """
    if feature_space == "raw":
        identity = Scaler(np.zeros(ds.dim), np.ones(ds.dim), np.zeros(ds.dim), np.ones(ds.dim),
                          ds.wrap)
        bank = sample_bank(n_feat, ds.dim, identity, w03, seed,
                           range_x=_padded_ranges(ds.x, padding),
                           range_v=_padded_ranges(ds.v, padding), padding=padding)
    elif feature_space == "scaled":
        bank = sample_bank(n_feat, ds.dim, ds.scaler, w03, seed, padding=padding)
    else:
        raise InvalidInputError(f"unknown feature_space {feature_space!r}")
    F = feature_matrix(bank, ds)
    laws = extract_conserved(F, ds.boundaries, k_sep=k_sep, n_laws=n_laws, null_floor=null_floor)
    force = fit_force(F, ds.a, eps=cutoff_eps)
    model = LawModel(bank, tuple(laws), force, float(ds.dt), int(seed), config_hash)
    return model, F


# --- model file ------------------------------------------------------------

_FORMAT = "mechlaws-model"
_VERSION = 1


def save_model(model: LawModel, path):
    """Write the versioned model file (bit-exact round trip)."""
    doc = {
        "format": _FORMAT,
        "version": _VERSION,
        "dt": model.dt,
        "seed": model.seed,
        "config_hash": model.config_hash,
        "bank": {
            "seed": model.bank.seed,
            "scale": model.bank.scale,
            "centers_x": model.bank.centers_x.tolist(),
            "centers_v": model.bank.centers_v.tolist(),
            "scaler": model.bank.scaler.to_dict(),
        },
        "laws": [
            {
                "weights": law.weights.tolist(),
                "eigenvalue": law.eigenvalue,
                "sigma": law.sigma,
                "mean_per_traj": law.mean_per_traj.tolist(),
            }
            for law in model.laws
        ],
        "force": {
            "weights": model.force.weights.tolist(),
            "cutoff_eps": model.force.cutoff_eps,
            "spectrum_kept": model.force.spectrum_kept,
            "training_residual": model.force.training_residual.tolist(),
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_model(path) -> LawModel:
    """Read a model file written by :func:`save_model`."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != _FORMAT:
        raise InvalidInputError(f"{path}: not a {_FORMAT} file")
    if doc.get("version") != _VERSION:
        raise InvalidInputError(f"{path}: unsupported model version {doc.get('version')}")
    bank_doc = doc["bank"]
    bank = FeatureBank(
        np.array(bank_doc["centers_x"]),
        np.array(bank_doc["centers_v"]),
        float(bank_doc["scale"]),
        int(bank_doc["seed"]),
        Scaler.from_dict(bank_doc["scaler"]),
    )
    laws = tuple(
        ConservedLaw(np.array(d["weights"]), float(d["eigenvalue"]), float(d["sigma"]),
                     np.array(d["mean_per_traj"]))
        for d in doc["laws"]
    )
    force_doc = doc["force"]
    force = ForceModel(
        np.array(force_doc["weights"]),
        float(force_doc["cutoff_eps"]),
        int(force_doc["spectrum_kept"]),
        np.array(force_doc["training_residual"]),
    )
    return LawModel(bank, laws, force, float(doc["dt"]), int(doc["seed"]), doc.get("config_hash", ""))
