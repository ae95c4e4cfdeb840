"""Experiment configuration: strict validation, hashing, shipped presets."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .errors import InvalidInputError
from .systems import KINDS, SystemSpec

PRESETS = ("gravity-pendulum", "double-pendulum")


def _require_keys(d: dict, allowed: set, required: set, where: str):
    unknown = set(d) - allowed
    if unknown:
        raise InvalidInputError(f"unknown key(s) {sorted(unknown)} in {where}")
    missing = required - set(d)
    if missing:
        raise InvalidInputError(f"missing key(s) {sorted(missing)} in {where}")


@dataclass
class ExperimentConfig:
    """One experiment: system, sampling, feature bank, laws, recursion."""

    system: SystemSpec
    initial_conditions: list          # [(x0 array, v0 array), ...]
    dt: float
    t_end: float
    n_feat: int
    w03: float
    feature_seed: int
    padding: float = 0.1
    feature_space: str = "raw"
    n_laws: int = 2
    k_sep: int = 10
    null_floor: float = 1e-10
    cutoff_eps: float = 1e-10
    steps: int = 1000
    tol_mult: float = 3.0
    max_projection_iters: int = 200
    initial_step: float | None = None
    step_shrink: float = 0.5
    recursion_seed: int = 0
    divergence_bound: float = 10.0
    abort_on_projection_failure: bool = True
    method: str = "high_order"
    rtol: float = 1e-10
    atol: float = 1e-12
    chaos_t_end: float | None = None
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def wrap(self) -> np.ndarray:
        flags = np.zeros(self.system.dim, dtype=bool)
        flags[list(self.system.periodic_dims)] = True
        return flags

    @property
    def config_hash(self) -> str:
        canon = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:12]


def parse_config(doc: dict) -> ExperimentConfig:
    """Validate a config document; unknown keys are rejected everywhere."""
    _require_keys(doc, {"system", "initial_conditions", "dt", "t_end", "features", "laws",
                        "force", "recursion", "integrator", "chaos_t_end"},
                  {"system", "initial_conditions", "dt", "t_end", "features"}, "config")

    sysdoc = doc["system"]
    _require_keys(sysdoc, {"kind", "params", "periodic_dims"}, {"kind"}, "system")
    if sysdoc["kind"] not in KINDS:
        raise InvalidInputError(f"unknown system kind {sysdoc['kind']!r}")
    default_periodic = {"harmonic": (), "gravity_pendulum": (0,), "double_pendulum": (0, 1)}
    spec = SystemSpec(
        sysdoc["kind"],
        sysdoc.get("params", {}),
        tuple(sysdoc.get("periodic_dims", default_periodic[sysdoc["kind"]])),
    )

    ics = []
    for i, entry in enumerate(doc["initial_conditions"]):
        _require_keys(entry, {"x0", "v0", "label"}, {"x0", "v0"}, f"initial_conditions[{i}]")
        x0 = np.asarray(entry["x0"], dtype=float).reshape(-1)
        v0 = np.asarray(entry["v0"], dtype=float).reshape(-1)
        if x0.shape != (spec.dim,) or v0.shape != (spec.dim,):
            raise InvalidInputError(f"initial_conditions[{i}] has wrong dimension")
        ics.append((x0, v0))
    if not ics:
        raise InvalidInputError("at least one initial condition is required")

    dt = float(doc["dt"])
    t_end = float(doc["t_end"])
    if not dt > 0:
        raise InvalidInputError("dt must be positive")
    if t_end < 3 * dt:
        raise InvalidInputError("t_end must cover at least 3 sampling steps")

    feat = doc["features"]
    _require_keys(feat, {"n_feat", "w03", "seed", "padding", "space"},
                  {"n_feat", "w03", "seed"}, "features")
    lawdoc = doc.get("laws", {})
    _require_keys(lawdoc, {"n_laws", "k_sep", "null_floor"}, set(), "laws")
    forcedoc = doc.get("force", {})
    _require_keys(forcedoc, {"cutoff_eps"}, set(), "force")
    rec = doc.get("recursion", {})
    _require_keys(rec, {"steps", "tol_mult", "max_projection_iters", "initial_step",
                        "step_shrink", "seed", "divergence_bound",
                        "abort_on_projection_failure"}, set(), "recursion")
    integ = doc.get("integrator", {})
    _require_keys(integ, {"method", "rtol", "atol"}, set(), "integrator")

    cfg = ExperimentConfig(
        system=spec,
        initial_conditions=ics,
        dt=dt,
        t_end=t_end,
        n_feat=int(feat["n_feat"]),
        w03=float(feat["w03"]),
        feature_seed=int(feat["seed"]),
        padding=float(feat.get("padding", 0.1)),
        feature_space=str(feat.get("space", "raw")),
        n_laws=int(lawdoc.get("n_laws", 2)),
        k_sep=int(lawdoc.get("k_sep", 10)),
        null_floor=float(lawdoc.get("null_floor", 1e-10)),
        cutoff_eps=float(forcedoc.get("cutoff_eps", 1e-10)),
        steps=int(rec.get("steps", 1000)),
        tol_mult=float(rec.get("tol_mult", 3.0)),
        max_projection_iters=int(rec.get("max_projection_iters", 200)),
        initial_step=None if rec.get("initial_step") is None else float(rec["initial_step"]),
        step_shrink=float(rec.get("step_shrink", 0.5)),
        recursion_seed=int(rec.get("seed", 0)),
        divergence_bound=float(rec.get("divergence_bound", 10.0)),
        abort_on_projection_failure=bool(rec.get("abort_on_projection_failure", True)),
        method=str(integ.get("method", "high_order")),
        rtol=float(integ.get("rtol", 1e-10)),
        atol=float(integ.get("atol", 1e-12)),
        chaos_t_end=None if doc.get("chaos_t_end") is None else float(doc["chaos_t_end"]),
        raw=doc,
    )
    if cfg.feature_space not in ("raw", "scaled"):
        raise InvalidInputError("features.space must be 'raw' or 'scaled'")
    if cfg.method not in ("high_order", "medium_order"):
        raise InvalidInputError("integrator.method must be 'high_order' or 'medium_order'")
    return cfg


def load_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidInputError(f"{path}: invalid JSON ({exc})") from exc
    return parse_config(doc)


def load_preset(name: str) -> ExperimentConfig:
    """Load one of the shipped experiment presets."""
    if name not in PRESETS:
        raise InvalidInputError(f"unknown preset {name!r}, expected one of {PRESETS}")
    fname = name.replace("-", "_") + ".json"
    text = resources.files("mechlaws").joinpath("presets", fname).read_text(encoding="utf-8")
    return parse_config(json.loads(text))
