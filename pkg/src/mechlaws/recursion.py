"""Continuation of a motion by the learned second-order recursion.

Each step evaluates x_{n+1} = 2 x_n - x_{n-1} + dt^2 f(x_n, v_n) with the
learned force, then stochastically projects x_{n+1} back onto the learned
conservation surfaces: random configuration-space directions are probed
with a shrinking step until every law value sits within kappa standard
deviations of its target.  The targets come from the seed pair, so an
unseen initial condition conserves its own values.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DivergenceError, InvalidInputError
from .laws import LawModel

COMPLETED = "completed"
DIVERGED = "diverged"
PROJECTION_FAILED = "projection_failed"


@dataclass
class RecursionConfig:
    """Knobs of the projected recursion.

    ``initial_step`` may be a scalar or per-dimension array; when None it
    defaults to 0.1 * dt * (training velocity range per dimension).
    ``divergence_bound`` is measured in the model's feature-space
    coordinates (the bank scaler's output).
    """

    steps: int
    tol_mult: float = 3.0
    max_projection_iters: int = 200
    initial_step: object = None
    step_shrink: float = 0.5
    seed: int = 0
    divergence_bound: float = 10.0
    projection: bool = True
    abort_on_projection_failure: bool = True

    def __post_init__(self):
        if self.steps < 1:
            raise InvalidInputError("steps must be >= 1")
        if not self.tol_mult > 0:
            raise InvalidInputError("tol_mult must be positive")
        if not 0.0 < self.step_shrink < 1.0:
            raise InvalidInputError("step_shrink must lie in (0, 1)")
        if self.max_projection_iters < 1:
            raise InvalidInputError("max_projection_iters must be >= 1")
        if not self.divergence_bound > 0:
            raise InvalidInputError("divergence_bound must be positive")


@dataclass
class ContinuationResult:
    """States plus per-step projection diagnostics.

    ``deviations`` holds, for every accepted step, the post-projection
    law deviations in units of each law's sigma; ``proj_iters`` the number
    of projection iterations spent on that step.
    """

    states: np.ndarray          # (n_accepted + 2, dim), seeds included
    deviations: np.ndarray      # (n_accepted, n_laws)
    proj_iters: np.ndarray      # (n_accepted,)
    status: str
    targets: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def completed(self) -> bool:
        return self.status == COMPLETED


def step_eom(model: LawModel, x_n, x_nm1) -> np.ndarray:
    """One bare equation-of-motion step, no projection."""
    x_n = np.asarray(x_n, dtype=float).reshape(-1)
    x_nm1 = np.asarray(x_nm1, dtype=float).reshape(-1)
    if x_n.shape != (model.dim,) or x_nm1.shape != (model.dim,):
        raise InvalidInputError(f"seed dimension mismatch (expected {model.dim})")
    dt = model.dt
    v_n = (x_n - x_nm1) / dt
    x_np1 = 2.0 * x_n - x_nm1 + dt * dt * model.force_from_features(model.features_at(x_n, v_n))
    if not np.all(np.isfinite(x_np1)):
        raise DivergenceError("recursion produced a non-finite state")
    return x_np1


def _sigmas(model: LawModel, targets: np.ndarray) -> np.ndarray:
    # floor exactly-conserved laws so deviations stay finite
    return np.array([max(law.sigma, 1e-15 * (1.0 + abs(t)))
                     for law, t in zip(model.laws, targets)])


def _deviations(model: LawModel, targets, sigmas, x_np1, x_n) -> np.ndarray:
    v = (x_np1 - x_n) / model.dt
    c = model.law_values_from_features(model.features_at(x_np1, v))
    return np.abs(c - targets) / sigmas


def _default_step(model: LawModel) -> np.ndarray:
    # centers span the (padded) training v-range in feature space; map the
    # span back to raw coordinates, where the projection actually moves x
    cv = model.bank.centers_v
    width = cv.max(axis=0) - cv.min(axis=0)
    gain = model.bank.scaler.gain_v
    width = width / np.where(gain == 0.0, 1.0, gain)
    width = np.where(width <= 0.0, 1.0, width)
    return 0.1 * model.dt * width


def project(model: LawModel, targets, x_np1, x_n, cfg: RecursionConfig, rng):
    """Stochastically pull x_{n+1} onto the conservation surfaces.

    Only x_{n+1} moves (x_n stays; v_{n+1} follows implicitly).  Returns
    ``(x, n_iters, deviations, ok)``; ``ok`` is False when the iteration
    budget ran out with some law still outside kappa sigma.
    """
    targets = np.asarray(targets, dtype=float)
    if targets.shape != (model.n_laws,):
        raise InvalidInputError("one target per stored law is required")
    x = np.asarray(x_np1, dtype=float).copy()
    x_n = np.asarray(x_n, dtype=float)
    sigmas = _sigmas(model, targets)
    kappa = cfg.tol_mult

    devs = _deviations(model, targets, sigmas, x, x_n)
    if np.all(devs <= kappa):
        return x, 0, devs, True

    if cfg.initial_step is None:
        step = _default_step(model)
    else:
        step = np.broadcast_to(np.asarray(cfg.initial_step, dtype=float), (model.dim,)).copy()
    step0 = step.copy()
    objective = float(np.sum(devs**2))
    for it in range(1, cfg.max_projection_iters + 1):
        direction = rng.standard_normal(model.dim)
        norm = np.linalg.norm(direction)
        if norm == 0.0:
            continue
        direction /= norm
        best_x, best_obj, best_devs = None, objective, devs
        for cand in (x + step * direction, x - step * direction):
            cand_devs = _deviations(model, targets, sigmas, cand, x_n)
            cand_obj = float(np.sum(cand_devs**2))
            if cand_obj < best_obj:
                best_x, best_obj, best_devs = cand, cand_obj, cand_devs
        if best_x is None:
            step = step * cfg.step_shrink
        else:
            x, objective, devs = best_x, best_obj, best_devs
            if np.all(devs <= kappa):
                return x, it, devs, True
            # recover scale after a success so one unlucky streak cannot
            # strand the search at a vanishing step size
            step = np.minimum(step / cfg.step_shrink, step0)
    return x, cfg.max_projection_iters, devs, False


def continue_motion(model: LawModel, x0, x1, cfg: RecursionConfig) -> ContinuationResult:
    """Iterate step_eom + project from the seed pair (x0, x1).

    Law targets are the law values of the seed pair.  Stops early with a
    partial state list when the state diverges or a projection fails.
    """
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    x1 = np.asarray(x1, dtype=float).reshape(-1)
    if x0.shape != (model.dim,) or x1.shape != (model.dim,):
        raise InvalidInputError(f"seed dimension mismatch (expected {model.dim})")
    if not (np.all(np.isfinite(x0)) and np.all(np.isfinite(x1))):
        raise InvalidInputError("seeds must be finite")

    dt = model.dt
    v1 = (x1 - x0) / dt
    targets = model.law_values_from_features(model.features_at(x1, v1))
    sigmas = _sigmas(model, targets)
    rng = np.random.default_rng(cfg.seed)

    states = [x0, x1]
    deviations = []
    iters = []
    status = COMPLETED
    for _ in range(cfg.steps):
        try:
            x_new = step_eom(model, states[-1], states[-2])
        except DivergenceError:
            status = DIVERGED
            break
        if cfg.projection:
            x_new, n_it, devs, ok = project(model, targets, x_new, states[-1], cfg, rng)
            if not ok and cfg.abort_on_projection_failure:
                status = PROJECTION_FAILED
                break
        else:
            n_it = 0
            devs = _deviations(model, targets, sigmas, x_new, states[-1])
        xs, vs = model.bank.scaler.transform(x_new, (x_new - states[-1]) / dt)
        if max(np.max(np.abs(xs)), np.max(np.abs(vs))) > cfg.divergence_bound:
            status = DIVERGED
            break
        states.append(x_new)
        deviations.append(devs)
        iters.append(n_it)

    return ContinuationResult(
        states=np.asarray(states),
        deviations=np.asarray(deviations) if deviations else np.empty((0, model.n_laws)),
        proj_iters=np.asarray(iters, dtype=int),
        status=status,
        targets=targets,
    )


def save_continuation_csv(result: ContinuationResult, dt: float, path, meta: dict | None = None):
    """Write ``n,t,x1..xN,dev_law1..dev_lawk,proj_iters,status`` rows."""
    dim = result.states.shape[1]
    n_laws = result.deviations.shape[1]
    cols = ["n", "t"] + [f"x{i + 1}" for i in range(dim)]
    cols += [f"dev_law{j + 1}" for j in range(n_laws)] + ["proj_iters", "status"]
    with open(path, "w", encoding="utf-8") as fh:
        for key, value in (meta or {}).items():
            fh.write(f"# {key}={value}\n")
        fh.write(",".join(cols) + "\n")
        for n, row in enumerate(result.states):
            vals = [str(n), format(n * dt, ".17g")]
            vals += [format(v, ".17g") for v in row]
            if n < 2:  # seeds carry no step diagnostics
                vals += [""] * n_laws + [""]
            else:
                vals += [format(v, ".17g") for v in result.deviations[n - 2]]
                vals += [str(int(result.proj_iters[n - 2]))]
            vals.append(result.status)
            fh.write(",".join(vals) + "\n")
