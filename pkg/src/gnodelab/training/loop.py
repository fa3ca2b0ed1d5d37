"""Epoch loop: shuffled mini-batches, AdamW, best-snapshot tracking.

Every random draw comes from a stream keyed by absolute indices (epoch,
batch), never from loop-carried generator state, so a run resumed from a
checkpoint continues bit-exactly as if it had never stopped. Wall-clock
seconds are the one non-deterministic column in the log.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..data import TrialBatch
from ..errors import DivergenceError
from ..models import Checkpoint, ModelSpec
from ..rng import stream
from .adamw import OptimState, adamw_init, adamw_step
from .backprop import bptt_grad, substeps_for, unroll
from .losses import loss_and_grad

__all__ = ["TrainConfig", "TrainLog", "train", "evaluate", "write_log_csv",
           "fisher_yates", "SWEEP_ETAS", "SWEEP_DECAYS", "SWEEP_BATCHES"]

# the built-in 27-point hyperparameter grid
SWEEP_ETAS = (1e-4, 1e-3, 1e-2)
SWEEP_DECAYS = (1e-3, 1e-2, 1e-1)
SWEEP_BATCHES = (10, 50, 100)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int
    batch_size: int
    eta: float
    lambda_w: float
    loss: str = "mse"
    lambda_reg: float = 0.0
    # stages of (epochs, prefix_bins); remaining epochs use full length
    curriculum: tuple[tuple[int, int], ...] | None = None
    h0_sigma: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 0 or self.batch_size < 1:
            raise ValueError("epochs must be >= 0 and batch_size >= 1")
        if self.curriculum is not None:
            object.__setattr__(
                self, "curriculum",
                tuple((int(e), int(p)) for e, p in self.curriculum))

    def prefix_for_epoch(self, epoch: int, n_bins: int) -> int:
        if self.curriculum is None:
            return n_bins
        done = 0
        for stage_epochs, prefix in self.curriculum:
            done += stage_epochs
            if epoch < done:
                return min(prefix, n_bins)
        return n_bins


@dataclass
class TrainLog:
    epochs: list[int] = field(default_factory=list)
    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    seconds: list[float] = field(default_factory=list)
    prefix_bins: list[int] = field(default_factory=list)
    best_epoch: int = -1
    best_val: float = float("inf")
    failed: bool = False
    fail_step: int | None = None


def fisher_yates(n: int, rng) -> np.ndarray:
    """Classic in-place shuffle of arange(n) driven by rng.integers."""
    idx = np.arange(n)
    for i in range(n - 1, 0, -1):
        j = int(rng.integers(0, i + 1))
        idx[i], idx[j] = idx[j], idx[i]
    return idx


def _default_h0_sigma(spec: ModelSpec) -> float:
    return float(np.sqrt(2.0 / (spec.state_dim + 1)))


def _draw_h0(spec, cfg, trials, *labels):
    sigma = cfg.h0_sigma if cfg.h0_sigma is not None else _default_h0_sigma(spec)
    rng = stream(cfg.seed, *labels)
    return sigma * rng.standard_normal((trials, spec.state_dim))


def evaluate(params, spec: ModelSpec, batch: TrialBatch, cfg: TrainConfig) -> float:
    """Data loss only (no decay, no activity penalty).

    Random-h0 models evaluate from a fixed draw (the "val-h0" stream), so
    the trace is comparable across epochs and across resumed runs.
    """
    h0 = None
    if spec.h0_mode == "random":
        h0 = _draw_h0(spec, cfg, batch.n_trials, "val-h0")
    substeps = substeps_for(spec, batch.bin_times)
    _, outputs = unroll(params, spec, batch.inputs, h0=h0, substeps=substeps)
    value, _ = loss_and_grad(cfg.loss, outputs, batch.targets, batch.mask)
    return value


def train(spec: ModelSpec, params, train_batch: TrialBatch, val_batch: TrialBatch,
          cfg: TrainConfig, resume: Checkpoint | None = None):
    """Run (or continue) the epoch loop; returns (TrainLog, Checkpoint).

    The checkpoint carries final params, optimizer moments, and the best
    validation snapshot. Divergence marks the log failed and returns the
    partial log instead of raising.
    """
    if resume is not None:
        params = {k: v.copy() for k, v in resume.params.items()}
        opt = adamw_init(params, cfg.eta, cfg.lambda_w)
        if resume.opt_m is not None:
            opt.m = {k: v.copy() for k, v in resume.opt_m.items()}
            opt.v = {k: v.copy() for k, v in resume.opt_v.items()}
            opt.step = resume.opt_step
        start_epoch = resume.epoch
        best_params = (None if resume.best_params is None
                       else {k: v.copy() for k, v in resume.best_params.items()})
        best_epoch, best_val = resume.best_epoch, resume.best_val
    else:
        params = {k: v.copy() for k, v in params.items()}
        opt = adamw_init(params, cfg.eta, cfg.lambda_w)
        start_epoch = 0
        best_params, best_epoch, best_val = None, -1, float("inf")

    substeps = substeps_for(spec, train_batch.bin_times)
    log = TrainLog(best_epoch=best_epoch, best_val=best_val)
    n = train_batch.n_trials

    for epoch in range(start_epoch, cfg.epochs):
        tic = time.perf_counter()
        prefix = cfg.prefix_for_epoch(epoch, train_batch.n_bins)
        tb = train_batch.prefix(prefix)
        order = fisher_yates(n, stream(cfg.seed, "shuffle", epoch))
        loss_sum, seen = 0.0, 0
        try:
            for bi in range(0, n, cfg.batch_size):
                idx = order[bi:bi + cfg.batch_size]
                sub = tb.subset(idx)
                h0 = None
                if spec.h0_mode == "random":
                    h0 = _draw_h0(spec, cfg, len(idx), "h0", epoch, bi)
                value, grads = bptt_grad(
                    params, spec, sub.inputs, sub.targets, cfg.loss,
                    h0=h0, mask=sub.mask, substeps=substeps,
                    lambda_reg=cfg.lambda_reg)
                params, opt = adamw_step(params, grads, opt)
                loss_sum += value * len(idx)
                seen += len(idx)
            val = evaluate(params, spec, val_batch, cfg)
        except DivergenceError as err:
            log.failed = True
            log.fail_step = err.step
            break
        log.epochs.append(epoch)
        log.train_loss.append(loss_sum / seen)
        log.val_loss.append(val)
        log.prefix_bins.append(prefix)
        log.seconds.append(time.perf_counter() - tic)
        if val < best_val:
            best_val = val
            best_epoch = epoch
            best_params = {k: v.copy() for k, v in params.items()}
        log.best_epoch, log.best_val = best_epoch, best_val

    ckpt = Checkpoint(
        spec=spec, params=params, opt_m=opt.m, opt_v=opt.v, opt_step=opt.step,
        epoch=(log.epochs[-1] + 1) if log.epochs else start_epoch,
        best_params=best_params, best_epoch=best_epoch, best_val=best_val,
    )
    return log, ckpt


def write_log_csv(path, log: TrainLog) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("epoch,train_loss,val_loss,seconds\n")
        for e, tr, va, sec in zip(log.epochs, log.train_loss, log.val_loss,
                                  log.seconds):
            fh.write(f"{e},{tr!r},{va!r},{sec!r}\n")
