"""Command-line entry point.

Subcommands: gen, train, sweep, analyze, mft-curve, capacity, ou-grid.
Each takes --config (JSON, see config module) plus optional --seed,
--workers, and --out. The output directory resolves as --out, then the
config's outdir, then $GNODELAB_OUT/<config stem>. Every run leaves a
manifest.json and a copy of the config in its output directory.

Exit codes: 0 success, 2 config error, 3 numerical divergence, 4 I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from pathlib import Path

import numpy as np

from .analysis import (find_fixed_points, flow_field, generalization_probe,
                       init_spectrum_experiment, pca_report, BoundingBox,
                       starts_from_trajectories, write_fixed_points_jsonl,
                       write_flow_csv, write_pca_csv, write_spectrum_csv)
from .capacity import (ou_fit_experiment, perceptron_sequence_capacity,
                       write_capacity_csv, write_ou_csv)
from .config import (ExperimentConfig, load_config, new_manifest,
                     write_manifest)
from .data import write_batch_csv
from .errors import ConfigError, DivergenceError
from .mft import tanh_critical_curve, write_curve_csv
from .models import init_params, load_checkpoint, save_checkpoint
from .rng import stream
from .tasks import gen_flipflop, ou_batch
from .training import (SWEEP_BATCHES, SWEEP_DECAYS, SWEEP_ETAS, resolve_h0,
                       substeps_for, train, unroll, write_log_csv)

__all__ = ["main"]


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gnodelab",
        description="Train and analyze gated neural ODE models from config files.")
    sub = parser.add_subparsers(dest="command", required=True)
    specs = {
        "gen": "generate task datasets as CSV",
        "train": "train one model and save log + checkpoint",
        "sweep": "train across the hyperparameter grid",
        "analyze": "fixed points, flow fields, spectra, PCA from a checkpoint",
        "mft-curve": "tanh critical-initialization curve CSV",
        "capacity": "perceptron sequence-storage transition CSV",
        "ou-grid": "trajectory-fitting grid CSV",
    }
    for name, help_text in specs.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--workers", type=int, default=1, help="parallel jobs")
        p.add_argument("--out", default=None, help="output directory")
        if name == "analyze":
            p.add_argument("--checkpoint", default=None, help="trained model file")
    return parser


def _resolve_outdir(args, cfg: ExperimentConfig) -> Path:
    if args.out:
        return Path(args.out)
    if cfg.outdir:
        return Path(cfg.outdir)
    root = os.environ.get("GNODELAB_OUT", "runs")
    return Path(root) / Path(args.config).stem


def _override_seed(cfg: ExperimentConfig, seed: int) -> ExperimentConfig:
    optim = (dataclasses.replace(cfg.optimizer, seed=seed)
             if cfg.optimizer is not None else None)
    return dataclasses.replace(cfg, seed=seed, optimizer=optim)


def _make_batches(cfg: ExperimentConfig):
    """(train, val) TrialBatch pair for the configured task."""
    cfg.require("task")
    if cfg.task_kind == "flipflop":
        full = gen_flipflop(cfg.task, stream(cfg.seed, "task"))
        split = cfg.task.trials_train
        return (full.subset(np.arange(split)),
                full.subset(np.arange(split, cfg.task.n_trials)))
    if cfg.task_kind == "ou":
        batch = ou_batch(cfg.task, stream(cfg.seed, "ou-data"))
        return batch, batch
    raise ConfigError(f"task kind {cfg.task_kind!r} has no trial data", "task.kind")


def cmd_gen(cfg: ExperimentConfig, outdir: Path, args) -> tuple[int, dict]:
    train_b, val_b = _make_batches(cfg)
    if cfg.task_kind == "ou":
        write_batch_csv(outdir / "ou.csv", train_b)
        return 0, {"ou": "ou.csv"}
    write_batch_csv(outdir / "train.csv", train_b)
    write_batch_csv(outdir / "val.csv", val_b)
    return 0, {"train": "train.csv", "val": "val.csv"}


def _train_once(cfg: ExperimentConfig, outdir: Path):
    cfg.require("task", "model", "optimizer")
    train_b, val_b = _make_batches(cfg)
    params = init_params(cfg.model, cfg.init, stream(cfg.seed, "init"))
    log, ckpt = train(cfg.model, params, train_b, val_b, cfg.optimizer)
    write_log_csv(outdir / "train_log.csv", log)
    save_checkpoint(outdir / "checkpoint.gnl", ckpt)
    return log, {"train_log": "train_log.csv", "checkpoint": "checkpoint.gnl"}


def cmd_train(cfg: ExperimentConfig, outdir: Path, args) -> tuple[int, dict]:
    log, outputs = _train_once(cfg, outdir)
    return (3 if log.failed else 0), outputs


def _sweep_job(job):
    cfg, outdir, eta, lam, batch = job
    combo_dir = outdir / f"eta{eta:g}_wd{lam:g}_b{batch}"
    combo_dir.mkdir(parents=True, exist_ok=True)
    optim = dataclasses.replace(cfg.optimizer, eta=eta, lambda_w=lam,
                                batch_size=batch)
    combo = dataclasses.replace(cfg, optimizer=optim)
    try:
        log, _ = _train_once(combo, combo_dir)
        return {"eta": eta, "lambda_w": lam, "batch_size": batch,
                "best_val": log.best_val, "best_epoch": log.best_epoch,
                "failed": log.failed, "dir": combo_dir.name}
    except (DivergenceError, FloatingPointError) as exc:
        return {"eta": eta, "lambda_w": lam, "batch_size": batch,
                "best_val": float("inf"), "best_epoch": -1,
                "failed": True, "dir": combo_dir.name, "error": str(exc)}


def cmd_sweep(cfg: ExperimentConfig, outdir: Path, args) -> tuple[int, dict]:
    cfg.require("task", "model", "optimizer")
    jobs = [(cfg, outdir, eta, lam, batch)
            for eta in SWEEP_ETAS for lam in SWEEP_DECAYS
            for batch in SWEEP_BATCHES]
    if args.workers > 1:
        from multiprocessing import Pool
        with Pool(args.workers) as pool:
            rows = pool.map(_sweep_job, jobs)
    else:
        rows = [_sweep_job(job) for job in jobs]

    with open(outdir / "sweep_summary.csv", "w", newline="") as fh:
        fh.write("eta,lambda_w,batch_size,best_val,best_epoch,failed,dir\n")
        for r in rows:
            fh.write(f"{r['eta']!r},{r['lambda_w']!r},{r['batch_size']},"
                     f"{r['best_val']!r},{r['best_epoch']},"
                     f"{int(r['failed'])},{r['dir']}\n")
    finished = [r for r in rows if not r["failed"]]
    outputs = {"summary": "sweep_summary.csv"}
    if finished:
        best = min(finished, key=lambda r: r["best_val"])
        import json
        with open(outdir / "best.json", "w") as fh:
            json.dump(best, fh, indent=2, sort_keys=True)
            fh.write("\n")
        outputs["best"] = "best.json"
    return 0, outputs


def _val_states(cfg, spec, params):
    """Validation trajectories under the same h0 policy training used."""
    _, val_b = _make_batches(cfg)
    substeps = substeps_for(spec, val_b.bin_times)
    if spec.h0_mode == "random":
        optim = cfg.optimizer
        sigma = (optim.h0_sigma if optim is not None and optim.h0_sigma is not None
                 else np.sqrt(2.0 / (spec.state_dim + 1)))
        h0 = sigma * stream(cfg.seed, "val-h0").standard_normal(
            (val_b.n_trials, spec.state_dim))
    else:
        h0 = resolve_h0(params, spec, val_b.inputs, None)
    states, _ = unroll(params, spec, val_b.inputs, h0=h0, substeps=substeps)
    return states


def cmd_analyze(cfg: ExperimentConfig, outdir: Path, args) -> tuple[int, dict]:
    opts = cfg.analysis
    outputs: dict = {}
    needs_model = (opts.fixed_points is not None or opts.flow_field is not None
                   or opts.pca or opts.regions is not None)
    if needs_model:
        if not args.checkpoint:
            raise ConfigError("analysis needs --checkpoint", "analysis")
        ckpt = load_checkpoint(args.checkpoint)
        spec = ckpt.spec
        params = ckpt.best_params if ckpt.best_params is not None else ckpt.params

    if opts.fixed_points is not None:
        states = _val_states(cfg, spec, params)
        starts = starts_from_trajectories(
            states, opts.fixed_points.start_count(spec.state_dim),
            stream(cfg.seed, "fp-starts"))
        records = find_fixed_points(
            params, spec, starts, max_iter=opts.fixed_points.max_iter,
            tol=opts.fixed_points.tol, bbox=BoundingBox.from_trajectories(states),
            dedup_radius=opts.fixed_points.dedup)
        write_fixed_points_jsonl(outdir / "fixed_points.jsonl", records)
        outputs["fixed_points"] = "fixed_points.jsonl"

    if opts.flow_field is not None:
        ff = opts.flow_field
        grid = flow_field(params, spec, lo=ff.lo, hi=ff.hi, cells=ff.cells,
                          mode=ff.mode)
        write_flow_csv(outdir / "flow_field.csv", grid)
        outputs["flow_field"] = "flow_field.csv"

    if opts.pca:
        states = _val_states(cfg, spec, params)
        write_pca_csv(outdir / "pca.csv", pca_report(states[:, 1:]))
        outputs["pca"] = "pca.csv"

    if opts.regions is not None:
        cfg.require("task")
        mses = generalization_probe(params, spec, cfg.task, opts.regions,
                                    seed=cfg.seed, trials=opts.probe_trials)
        with open(outdir / "generalization.csv", "w", newline="") as fh:
            fh.write("r_lo,r_hi,mse\n")
            for (lo, hi), mse in sorted(mses.items()):
                fh.write(f"{lo!r},{hi!r},{mse!r}\n")
        outputs["generalization"] = "generalization.csv"

    if opts.spectra is not None:
        sp = opts.spectra
        for sz in sp.sigma_zs:
            result = init_spectrum_experiment(
                sp.arch, n=sp.n, sigma_w=sp.sigma_w, sigma_z=sz,
                relax_t=sp.relax_t, dt=sp.dt, seed=cfg.seed)
            name = f"spectrum_sigma_z_{sz:g}.csv"
            write_spectrum_csv(outdir / name, result)
            outputs[f"spectrum_sigma_z_{sz:g}"] = name
    return 0, outputs


def cmd_mft_curve(cfg: ExperimentConfig, outdir: Path, args) -> tuple[int, dict]:
    cfg.require("mft")
    opts = cfg.mft
    grid = np.asarray(opts.sigma_b_grid, dtype=np.float64)
    stars = tanh_critical_curve(grid, opts.depth, scaling=opts.scaling,
                                alpha=opts.alpha)
    write_curve_csv(outdir / "mft_curve.csv", grid, stars, opts.depth)
    return 0, {"curve": "mft_curve.csv"}


def cmd_capacity(cfg: ExperimentConfig, outdir: Path, args) -> tuple[int, dict]:
    cfg.require("task")
    if cfg.task_kind != "capacity":
        raise ConfigError("capacity command needs task kind 'capacity'", "task.kind")
    results = perceptron_sequence_capacity(cfg.task, seed=cfg.seed)
    write_capacity_csv(outdir / "capacity.csv", cfg.task, results)
    return 0, {"capacity": "capacity.csv"}


def cmd_ou_grid(cfg: ExperimentConfig, outdir: Path, args) -> tuple[int, dict]:
    cfg.require("ou_grid")
    ou = cfg.task if cfg.task_kind == "ou" else None
    rows = ou_fit_experiment(cfg.ou_grid, ou, workers=args.workers)
    write_ou_csv(outdir / "ou_grid.csv", rows)
    return 0, {"ou_grid": "ou_grid.csv"}


_COMMANDS = {
    "gen": cmd_gen,
    "train": cmd_train,
    "sweep": cmd_sweep,
    "analyze": cmd_analyze,
    "mft-curve": cmd_mft_curve,
    "capacity": cmd_capacity,
    "ou-grid": cmd_ou_grid,
}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = _override_seed(cfg, args.seed)
        outdir = _resolve_outdir(args, cfg)
        outdir.mkdir(parents=True, exist_ok=True)
        manifest = new_manifest(cfg)
        code, outputs = _COMMANDS[args.command](cfg, outdir, args)
        (outdir / "config.json").write_text(cfg.text)
        outputs["config"] = "config.json"
        manifest.outputs = outputs
        write_manifest(outdir / "manifest.json", manifest)
        return code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DivergenceError as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
