"""Training losses, each returning (value, gradient w.r.t. outputs)."""

from __future__ import annotations

import numpy as np

from ..errors import DimensionError

__all__ = ["LOSS_KINDS", "mse_loss", "xent_loss", "loss_and_grad"]

LOSS_KINDS = ("mse", "softmax-cross-entropy")


def mse_loss(outputs: np.ndarray, targets: np.ndarray, mask: np.ndarray | None = None):
    """Mean squared error averaged over trials, bins, and output dims.

    mask (trials, bins), when given, restricts both the sum and the count
    to observed bins.
    """
    if outputs.shape != targets.shape:
        raise DimensionError(f"outputs {outputs.shape} vs targets {targets.shape}")
    err = outputs - targets
    if mask is None:
        count = err.size
    else:
        err = err * mask[:, :, None]
        count = int(mask.sum()) * outputs.shape[2]
        if count == 0:
            raise ValueError("mask excludes every bin")
    value = float(np.sum(err * err)) / count
    grad = (2.0 / count) * err
    return value, grad


def xent_loss(outputs: np.ndarray, labels: np.ndarray):
    """Softmax cross-entropy on the final bin's outputs, averaged over trials.

    outputs (trials, bins, classes); labels (trials,) integer class ids.
    """
    trials, _, classes = outputs.shape
    labels = np.asarray(labels)
    if labels.shape != (trials,):
        raise DimensionError(f"labels must be ({trials},), got {labels.shape}")
    if labels.min() < 0 or labels.max() >= classes:
        raise ValueError("label out of range")
    z = outputs[:, -1, :]
    z = z - z.max(axis=1, keepdims=True)
    logp = z - np.log(np.sum(np.exp(z), axis=1, keepdims=True))
    value = -float(np.mean(logp[np.arange(trials), labels]))
    grad = np.zeros_like(outputs)
    p = np.exp(logp)
    p[np.arange(trials), labels] -= 1.0
    grad[:, -1, :] = p / trials
    return value, grad


def loss_and_grad(kind: str, outputs, targets, mask=None):
    if kind == "mse":
        return mse_loss(outputs, targets, mask)
    if kind == "softmax-cross-entropy":
        return xent_loss(outputs, targets)
    raise ValueError(f"loss kind must be one of {LOSS_KINDS}, got {kind!r}")
