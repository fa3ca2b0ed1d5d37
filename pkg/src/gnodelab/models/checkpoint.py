"""Model checkpoints on top of the tensor container.

A checkpoint stores the parameter dict (keys prefixed "param."), optional
AdamW moments ("opt.m." / "opt.v.") plus step count, the best-so-far
parameter snapshot ("best."), and the model spec in the JSON meta. Round
trips are bit-exact: float64 in, float64 out.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..tensorio import read_container, write_container
from .init import check_params
from .spec import ModelSpec

__all__ = ["Checkpoint", "save_checkpoint", "load_checkpoint"]


@dataclass
class Checkpoint:
    spec: ModelSpec
    params: dict[str, np.ndarray]
    opt_m: dict[str, np.ndarray] | None = None
    opt_v: dict[str, np.ndarray] | None = None
    opt_step: int = 0
    epoch: int = 0
    best_params: dict[str, np.ndarray] | None = None
    best_epoch: int = -1
    best_val: float = float("inf")
    meta: dict = field(default_factory=dict)


def save_checkpoint(path, ckpt: Checkpoint) -> None:
    check_params(ckpt.spec, ckpt.params)
    tensors: dict[str, np.ndarray] = {}
    for key, arr in ckpt.params.items():
        tensors[f"param.{key}"] = arr
    if ckpt.opt_m is not None:
        for key, arr in ckpt.opt_m.items():
            tensors[f"opt.m.{key}"] = arr
        for key, arr in (ckpt.opt_v or {}).items():
            tensors[f"opt.v.{key}"] = arr
    if ckpt.best_params is not None:
        for key, arr in ckpt.best_params.items():
            tensors[f"best.{key}"] = arr
    meta = {
        "kind": "gnodelab-checkpoint",
        "model": ckpt.spec.to_dict(),
        "opt_step": int(ckpt.opt_step),
        "epoch": int(ckpt.epoch),
        "best_epoch": int(ckpt.best_epoch),
        "best_val": float(ckpt.best_val),
        "extra": ckpt.meta,
    }
    write_container(path, tensors, meta)


def load_checkpoint(path) -> Checkpoint:
    tensors, meta = read_container(path)
    if meta.get("kind") != "gnodelab-checkpoint":
        raise ValueError(f"{path}: not a model checkpoint")
    spec = ModelSpec.from_dict(meta["model"])
    params = {k[len("param."):]: v for k, v in tensors.items() if k.startswith("param.")}
    opt_m = {k[len("opt.m."):]: v for k, v in tensors.items() if k.startswith("opt.m.")}
    opt_v = {k[len("opt.v."):]: v for k, v in tensors.items() if k.startswith("opt.v.")}
    best = {k[len("best."):]: v for k, v in tensors.items() if k.startswith("best.")}
    check_params(spec, params)
    return Checkpoint(
        spec=spec,
        params=params,
        opt_m=opt_m or None,
        opt_v=opt_v or None,
        opt_step=int(meta.get("opt_step", 0)),
        epoch=int(meta.get("epoch", 0)),
        best_params=best or None,
        best_epoch=int(meta.get("best_epoch", -1)),
        best_val=float(meta.get("best_val", float("inf"))),
        meta=meta.get("extra", {}),
    )
