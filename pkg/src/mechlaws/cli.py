"""Command-line front end: simulate | train | continue | chaos-demo | demo-oscillator.

Every run is driven by a JSON experiment config (or a shipped preset) and
writes CSV/report files stamped with the config hash.  Exit codes:
0 success, 2 validation error, 3 degenerate training, 4 projection
failure, 5 divergence.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import metrics, recursion
from .config import PRESETS, ExperimentConfig, load_config, load_preset
from .dataset import build_dataset
from .errors import DegenerateModelError, DivergenceError, InvalidInputError, MechlawsError
from .integrators import integrate
from .laws import load_model, save_model, train
from .oscillator import HarmonicSpec, discrete_energy, harmonic_step, z_factor
from .trajectory import Trajectory, load_trajectory_csv, save_trajectory_csv

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_DEGENERATE = 3
EXIT_PROJECTION = 4
EXIT_DIVERGENCE = 5


def _load_cfg(args) -> ExperimentConfig:
    if args.preset:
        cfg = load_preset(args.preset)
    else:
        cfg = load_config(args.config)
    if args.seed is not None:
        cfg.feature_seed = args.seed
        cfg.recursion_seed = args.seed
    return cfg


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _traj_name(cfg: ExperimentConfig, i: int) -> str:
    label = cfg.raw["initial_conditions"][i].get("label", f"ic{i}")
    safe = "".join(c if c.isalnum() or c in "._-" else "_" for c in label)
    return f"traj_{i:02d}_{safe}.csv"


def cmd_simulate(args) -> int:
    cfg = _load_cfg(args)
    out = _outdir(args)
    meta = {"config_hash": cfg.config_hash}
    for i, (x0, v0) in enumerate(cfg.initial_conditions):
        try:
            traj = integrate(cfg.system, x0, v0, cfg.t_end, cfg.dt, method=cfg.method,
                             rtol=cfg.rtol, atol=cfg.atol, label=f"ic{i}")
        except DivergenceError as exc:
            print(f"error: trajectory {i} diverged at t={exc.time}", file=sys.stderr)
            return EXIT_DIVERGENCE
        path = out / _traj_name(cfg, i)
        save_trajectory_csv(traj, path, meta=meta)
        print(f"wrote {path} ({len(traj)} samples)")
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = _load_cfg(args)
    out = _outdir(args)
    if args.trajectories:
        paths = [Path(p) for p in args.trajectories]
    else:
        paths = sorted(out.glob("traj_*.csv"))
    if not paths:
        print("error: no trajectory files given or found in --out", file=sys.stderr)
        return EXIT_VALIDATION
    trajs = []
    for p in paths:
        try:
            trajs.append(load_trajectory_csv(p, label=p.name))
        except InvalidInputError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_VALIDATION
    dts = {t.dt for t in trajs}
    if max(dts) - min(dts) > 1e-12 * max(dts):
        offenders = ", ".join(f"{p.name} (dt={t.dt})" for p, t in zip(paths, trajs))
        print(f"error: inconsistent dt across files: {offenders}", file=sys.stderr)
        return EXIT_VALIDATION

    ds = build_dataset(trajs, wrap=cfg.wrap)
    try:
        model, F = train(ds, n_feat=cfg.n_feat, w03=cfg.w03, seed=cfg.feature_seed,
                         n_laws=cfg.n_laws, k_sep=cfg.k_sep, cutoff_eps=cfg.cutoff_eps,
                         padding=cfg.padding, feature_space=cfg.feature_space,
                         null_floor=cfg.null_floor, config_hash=cfg.config_hash)
    except DegenerateModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE

    model_path = out / "model.json"
    save_model(model, model_path)

    fp = metrics.force_precision(F @ model.force.weights, ds.a)
    crep = metrics.conservation_report(model, ds)
    report = metrics.Report(force_precision_pct=fp,
                            conservation_precision=crep.worst_normalized_precision,
                            config_hash=cfg.config_hash)
    for stat in crep.laws:
        report.extra[f"law{stat.law_index}_sigma"] = stat.pooled_sigma
        report.extra[f"law{stat.law_index}_normalized_precision"] = stat.normalized_precision
        report.extra[f"law{stat.law_index}_mean_separation_over_sigma"] = \
            stat.mean_separation_over_sigma
    report.extra["n_samples"] = len(ds)
    report.extra["spectrum_kept"] = model.force.spectrum_kept
    report.save(out / "training_report.txt")
    print(f"wrote {model_path}")
    print(f"force precision: {fp:.2f}%  conservation precision: "
          f"{crep.worst_normalized_precision:.3e}")
    return EXIT_OK


def cmd_continue(args) -> int:
    cfg = _load_cfg(args)
    out = _outdir(args)
    model = load_model(args.model)

    truth = None
    if args.traj:
        truth = load_trajectory_csv(args.traj)
        x0, x1 = truth.states[0], truth.states[1]
    elif args.x0 is not None and args.x1 is not None:
        x0 = np.array([float(v) for v in args.x0.split(",")])
        x1 = np.array([float(v) for v in args.x1.split(",")])
    else:
        print("error: provide --traj or both --x0 and --x1", file=sys.stderr)
        return EXIT_VALIDATION

    steps = args.steps if args.steps is not None else cfg.steps
    if steps < 1:
        print("error: steps must be >= 1", file=sys.stderr)
        return EXIT_VALIDATION
    rcfg = recursion.RecursionConfig(
        steps=steps, tol_mult=cfg.tol_mult, max_projection_iters=cfg.max_projection_iters,
        initial_step=cfg.initial_step, step_shrink=cfg.step_shrink, seed=cfg.recursion_seed,
        divergence_bound=cfg.divergence_bound, projection=not args.no_projection,
        abort_on_projection_failure=cfg.abort_on_projection_failure,
    )
    result = recursion.continue_motion(model, x0, x1, rcfg)
    csv_path = out / "continuation.csv"
    recursion.save_continuation_csv(result, model.dt, csv_path,
                                    meta={"config_hash": cfg.config_hash})
    print(f"wrote {csv_path} (status: {result.status}, {len(result.states)} states)")

    report = metrics.Report(config_hash=cfg.config_hash)
    report.extra["status"] = result.status
    report.extra["n_states"] = len(result.states)
    report.extra["max_velocity_proxy"] = metrics.max_velocity_proxy(result.states, model.dt)
    report.bounded = bool(result.completed and np.all(np.isfinite(result.states)))
    if truth is not None and result.completed and len(result.states) == len(truth):
        recon = Trajectory(dt=model.dt, states=result.states, label="reconstruction")
        pooled, per_dim = metrics.reconstruction_error(recon, truth)
        report.reconstruction_error_pct = pooled
        for d, val in enumerate(per_dim):
            report.extra[f"reconstruction_error_pct_x{d + 1}"] = float(val)
        print(f"reconstruction error: {pooled:.3f}%")
    report.save(out / "continuation_report.txt")

    if result.status == recursion.PROJECTION_FAILED:
        return EXIT_PROJECTION
    if result.status == recursion.DIVERGED:
        return EXIT_DIVERGENCE
    return EXIT_OK


def cmd_chaos_demo(args) -> int:
    cfg = _load_cfg(args)
    out = _outdir(args)
    t_end = cfg.chaos_t_end if cfg.chaos_t_end is not None else cfg.t_end
    x0, v0 = cfg.initial_conditions[0]
    meta = {"config_hash": cfg.config_hash}
    trajs = {}
    for method in ("high_order", "medium_order"):
        try:
            trajs[method] = integrate(cfg.system, x0, v0, t_end, cfg.dt, method=method,
                                      rtol=cfg.rtol, atol=cfg.atol, label=method)
        except DivergenceError as exc:
            print(f"error: {method} integration diverged at t={exc.time}", file=sys.stderr)
            return EXIT_DIVERGENCE
        path = out / f"chaos_{method}.csv"
        save_trajectory_csv(trajs[method], path, meta=meta)
        print(f"wrote {path}")

    t_div = metrics.divergence_time(trajs["high_order"], trajs["medium_order"],
                                    args.threshold)
    report = metrics.Report(divergence_time=t_div, config_hash=cfg.config_hash)
    report.extra["threshold"] = args.threshold
    report.extra["window"] = t_end
    report.save(out / "chaos_report.txt")
    if t_div is None:
        print(f"methods agree to within {args.threshold} over the whole window ({t_end})")
    else:
        print(f"methods diverge by >{args.threshold} at t={t_div}")
    return EXIT_OK


def cmd_demo_oscillator(args) -> int:
    spec = HarmonicSpec(omega=1.0, dt=args.dt)
    k = spec.k
    n = 200
    t = spec.dt * np.arange(n)
    x = np.sin(t)
    v = np.empty(n)
    v[1:] = (x[1:] - x[:-1]) / spec.dt
    v[0] = np.nan
    print(f"linear oscillator, omega=1, dt={spec.dt} (k={k:.4g})")
    print(f"  Z(k) = {z_factor(k):.12f}   (series: 1 - k^2/12 = {1 - k*k/12:.12f})")
    step_err = max(abs(harmonic_step(spec, x[i], x[i - 1]) - x[i + 1]) for i in range(1, n - 1))
    print(f"  recursion residual on sampled sine: {step_err:.3e}")
    energies = discrete_energy(spec, x[1:], v[1:])
    print(f"  discrete energy: mean={energies.mean():.12f}  rel std="
          f"{energies.std() / energies.mean():.3e}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mechlaws",
        description="Learn conservation laws and discrete forces from sampled trajectories, "
                    "then continue the motion stably.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, needs_config=True):
        if needs_config:
            group = p.add_mutually_exclusive_group(required=True)
            group.add_argument("--config", help="path to a JSON experiment config")
            group.add_argument("--preset", choices=PRESETS, help="shipped experiment preset")
        p.add_argument("--out", default=".", help="output directory (default: .)")
        p.add_argument("--seed", type=int, default=None,
                       help="override the feature and recursion seeds")

    p = sub.add_parser("simulate", help="integrate the configured initial conditions to CSV")
    add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("train", help="train a law model from trajectory CSV files")
    add_common(p)
    p.add_argument("trajectories", nargs="*",
                   help="trajectory CSV files (default: traj_*.csv in --out)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("continue", help="continue a motion with the projected recursion")
    add_common(p)
    p.add_argument("--model", required=True, help="model file from 'train'")
    p.add_argument("--traj", help="source trajectory CSV: seeds from its first two states, "
                                  "and ground truth for the reconstruction error")
    p.add_argument("--x0", help="comma-separated first seed configuration")
    p.add_argument("--x1", help="comma-separated second seed configuration")
    p.add_argument("--steps", type=int, default=None, help="recursion steps (default: config)")
    p.add_argument("--no-projection", action="store_true",
                   help="ablation: disable the conservation projection")
    p.set_defaults(func=cmd_continue)

    p = sub.add_parser("chaos-demo", help="integrate the first IC with both methods and "
                                          "report their divergence time")
    add_common(p)
    p.add_argument("--threshold", type=float, default=0.1,
                   help="divergence threshold in coordinate units (default: 0.1)")
    p.set_defaults(func=cmd_chaos_demo)

    p = sub.add_parser("demo-oscillator", help="print the closed-form oscillator worked example")
    p.add_argument("--dt", type=float, default=0.1)
    p.set_defaults(func=cmd_demo_oscillator)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except DegenerateModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except MechlawsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc.strerror}: {getattr(exc, 'filename', '')}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
