"""Trial-structured time-series batches and their CSV / binary round trips."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DimensionError
from .tensorio import read_container, write_container

__all__ = ["TrialBatch", "write_batch_csv", "read_batch_csv",
           "save_batch", "load_batch"]

_BATCH_KIND = "gnodelab-trialbatch"


@dataclass(frozen=True)
class TrialBatch:
    """Inputs and supervision targets on a shared time grid.

    inputs is (trials, bins, d). targets is (trials, bins, o) for regression
    or an integer (trials,) vector of class ids for classification.
    bin_times holds the time stamp of each bin in seconds and must increase
    strictly, which permits irregular sampling. mask, when present, is
    (trials, bins) with True marking observed bins.
    """

    inputs: np.ndarray
    targets: np.ndarray
    bin_times: np.ndarray
    mask: np.ndarray | None = None

    def __post_init__(self):
        inputs = np.asarray(self.inputs, dtype=np.float64)
        bin_times = np.asarray(self.bin_times, dtype=np.float64)
        if inputs.ndim != 3:
            raise DimensionError(f"inputs must be (trials, bins, d), got {inputs.shape}")
        trials, bins, _ = inputs.shape
        targets = np.asarray(self.targets)
        if targets.ndim == 1:
            if targets.shape[0] != trials:
                raise DimensionError(
                    f"label targets must have {trials} entries, got {targets.shape}")
            targets = targets.astype(np.int64)
        elif targets.ndim == 3:
            if targets.shape[:2] != (trials, bins):
                raise DimensionError(
                    f"targets {targets.shape} inconsistent with inputs {inputs.shape}")
            targets = targets.astype(np.float64)
        else:
            raise DimensionError(
                f"targets must be (trials, bins, o) or (trials,), got {targets.shape}")
        if bin_times.shape != (bins,):
            raise DimensionError(
                f"bin_times must have shape ({bins},), got {bin_times.shape}")
        if bins > 1 and not np.all(np.diff(bin_times) > 0):
            raise ValueError("bin_times must be strictly increasing")
        mask = self.mask
        if mask is not None:
            mask = np.asarray(mask, dtype=bool)
            if mask.shape != (trials, bins):
                raise DimensionError(
                    f"mask must have shape ({trials}, {bins}), got {mask.shape}")
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "bin_times", bin_times)
        object.__setattr__(self, "mask", mask)

    @property
    def n_trials(self) -> int:
        return self.inputs.shape[0]

    @property
    def n_bins(self) -> int:
        return self.inputs.shape[1]

    @property
    def input_dim(self) -> int:
        return self.inputs.shape[2]

    @property
    def has_labels(self) -> bool:
        return self.targets.ndim == 1

    @property
    def target_dim(self) -> int:
        return 0 if self.has_labels else self.targets.shape[2]

    def subset(self, idx) -> "TrialBatch":
        idx = np.asarray(idx)
        return replace(
            self,
            inputs=self.inputs[idx],
            targets=self.targets[idx],
            mask=None if self.mask is None else self.mask[idx],
        )

    def prefix(self, bins: int) -> "TrialBatch":
        """First `bins` time bins of every trial (curriculum truncation)."""
        if not 1 <= bins <= self.n_bins:
            raise ValueError(f"prefix length must be in [1, {self.n_bins}], got {bins}")
        if bins == self.n_bins:
            return self
        return replace(
            self,
            inputs=self.inputs[:, :bins],
            targets=self.targets if self.has_labels else self.targets[:, :bins],
            bin_times=self.bin_times[:bins],
            mask=None if self.mask is None else self.mask[:, :bins],
        )


def write_batch_csv(path, batch: TrialBatch) -> None:
    """One row per (trial, bin): trial, bin, t, x1..xD, y1..yO, mask.

    mask is written as 1/0 with 1 meaning observed; a missing mask writes
    all ones. Floats use repr for exact round trips.
    """
    if batch.has_labels:
        raise ValueError("label-style targets have no per-bin CSV form")
    d, o = batch.input_dim, batch.target_dim
    header = ["trial", "bin", "t"]
    header += [f"x{j + 1}" for j in range(d)]
    header += [f"y{j + 1}" for j in range(o)]
    header.append("mask")
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(batch.n_trials):
            for b in range(batch.n_bins):
                ok = 1 if batch.mask is None else int(batch.mask[i, b])
                cells = [str(i), str(b), repr(float(batch.bin_times[b]))]
                cells += [repr(float(v)) for v in batch.inputs[i, b]]
                cells += [repr(float(v)) for v in batch.targets[i, b]]
                cells.append(str(ok))
                fh.write(",".join(cells) + "\n")


def read_batch_csv(path) -> TrialBatch:
    """Inverse of write_batch_csv; an all-ones mask column reads as None."""
    with open(path, newline="") as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    base = ["trial", "bin", "t"]
    if header[:3] != base or header[-1] != "mask":
        raise ValueError(f"unrecognized batch CSV header: {header!r}")
    d = sum(1 for c in header if c.startswith("x"))
    o = sum(1 for c in header if c.startswith("y"))
    if len(header) != 3 + d + o + 1:
        raise ValueError(f"unrecognized batch CSV header: {header!r}")
    trials = max(int(r[0]) for r in rows) + 1
    bins = max(int(r[1]) for r in rows) + 1
    if len(rows) != trials * bins:
        raise ValueError(f"expected {trials * bins} rows, got {len(rows)}")
    inputs = np.zeros((trials, bins, d))
    targets = np.zeros((trials, bins, o))
    bin_times = np.zeros(bins)
    mask = np.zeros((trials, bins), dtype=bool)
    for r in rows:
        i, b = int(r[0]), int(r[1])
        bin_times[b] = float(r[2])
        inputs[i, b] = [float(v) for v in r[3:3 + d]]
        targets[i, b] = [float(v) for v in r[3 + d:3 + d + o]]
        mask[i, b] = r[-1] == "1"
    return TrialBatch(
        inputs=inputs, targets=targets, bin_times=bin_times,
        mask=None if mask.all() else mask,
    )


def save_batch(path, batch: TrialBatch) -> None:
    """Binary form of the batch in the shared tensor container."""
    tensors = {
        "inputs": batch.inputs,
        "targets": batch.targets.astype(np.float64),
        "bin_times": batch.bin_times,
    }
    if batch.mask is not None:
        tensors["mask"] = batch.mask.astype(np.float64)
    write_container(path, tensors, meta={
        "kind": _BATCH_KIND, "labels": batch.has_labels,
    })


def load_batch(path) -> TrialBatch:
    tensors, meta = read_container(path)
    if meta.get("kind") != _BATCH_KIND:
        raise ValueError(f"not a trial-batch container: kind={meta.get('kind')!r}")
    targets = tensors["targets"]
    if meta.get("labels"):
        targets = targets.astype(np.int64)
    mask = tensors.get("mask")
    return TrialBatch(
        inputs=tensors["inputs"], targets=targets,
        bin_times=tensors["bin_times"],
        mask=None if mask is None else mask.astype(bool),
    )
