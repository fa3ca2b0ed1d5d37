"""Synthetic task generators: flip-flop variants and OU trajectories."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import TrialBatch
from .errors import InsufficientDataError
from .splines import eval_spline, fit_natural_spline

__all__ = ["FLIPFLOP_VARIANTS", "FlipFlopSpec", "OUSpec", "PulseEvent",
           "gen_flipflop", "gen_ou", "ou_batch", "interpolate_missing"]

FLIPFLOP_VARIANTS = ("fixed", "uniform-box", "rectangle", "disk", "ring")
_JOINT = ("disk", "ring")


@dataclass(frozen=True)
class PulseEvent:
    bin: int
    channel: int
    amplitude: float


@dataclass(frozen=True)
class FlipFlopSpec:
    """Pulse-and-hold memory task.

    Independent variants (fixed, uniform-box, rectangle) put each pulse on
    one uniformly chosen channel; joint variants (disk, ring) pulse all
    channels at once with amplitudes drawn from an annulus or a sphere
    shell. pulse_count_mean defaults to 12 except for disk (6).
    """

    n: int = 3
    bins: int = 100
    bin_ms: float = 10.0
    pulse_width_bins: int = 2
    pulse_count_mean: float | None = None
    variant: str = "fixed"
    trials_train: int = 500
    trials_val: int = 100
    channel_scales: tuple[float, ...] = (2.0, 1.0)  # rectangle half-widths
    r_min: float = 1.0
    r_max: float = 2.0  # disk outer radius; also the ring radius

    def __post_init__(self):
        if self.variant not in FLIPFLOP_VARIANTS:
            raise ValueError(f"variant must be one of {FLIPFLOP_VARIANTS}")
        if self.n < 1 or self.bins < 1 or self.pulse_width_bins < 1:
            raise ValueError("n, bins, pulse_width_bins must be positive")
        if not 0 <= self.r_min <= self.r_max:
            raise ValueError("need 0 <= r_min <= r_max")
        if self.variant == "rectangle" and len(self.channel_scales) != self.n:
            raise ValueError(
                f"rectangle wants {self.n} channel scales, got {len(self.channel_scales)}")
        if self.pulse_count_mean is None:
            mean = 6.0 if self.variant == "disk" else 12.0
            object.__setattr__(self, "pulse_count_mean", mean)

    @property
    def n_trials(self) -> int:
        return self.trials_train + self.trials_val

    @property
    def bin_times(self) -> np.ndarray:
        return (np.arange(self.bins) + 1) * (self.bin_ms / 1000.0)


def _pulse_count(spec: FlipFlopSpec, rng) -> int:
    # a draw larger than the bin count cannot give distinct onsets: redraw
    while True:
        k = int(rng.poisson(spec.pulse_count_mean))
        if k <= spec.bins:
            return k


def _joint_amplitudes(spec: FlipFlopSpec, rng) -> np.ndarray:
    direction = rng.standard_normal(spec.n)
    norm = np.linalg.norm(direction)
    while norm == 0.0:
        direction = rng.standard_normal(spec.n)
        norm = np.linalg.norm(direction)
    direction /= norm
    if spec.variant == "ring":
        return spec.r_max * direction
    # volume-uniform radius in the annulus via inverse CDF
    u = rng.uniform()
    r = (u * (spec.r_max**spec.n - spec.r_min**spec.n) + spec.r_min**spec.n) ** (1.0 / spec.n)
    return r * direction


def _trial_events(spec: FlipFlopSpec, rng) -> list[PulseEvent]:
    k = _pulse_count(spec, rng)
    onsets = np.sort(rng.choice(spec.bins, size=k, replace=False))
    events: list[PulseEvent] = []
    for onset in onsets:
        if spec.variant in _JOINT:
            amps = _joint_amplitudes(spec, rng)
            for ch in range(spec.n):
                events.append(PulseEvent(int(onset), ch, float(amps[ch])))
        else:
            ch = int(rng.integers(0, spec.n))
            if spec.variant == "fixed":
                amp = float(2 * rng.integers(0, 2) - 1)
            elif spec.variant == "uniform-box":
                amp = float(rng.uniform(-1.0, 1.0))
            else:  # rectangle
                s = spec.channel_scales[ch]
                amp = float(rng.uniform(-s, s))
            events.append(PulseEvent(int(onset), ch, amp))
    return events


def gen_flipflop(spec: FlipFlopSpec, rng, trials: int | None = None) -> TrialBatch:
    """Generate pulse-and-hold trials.

    Inputs hold each pulse amplitude for pulse_width_bins bins (a later
    onset overwrites an overlap); targets hold the most recent pulse
    amplitude per channel from its onset bin onward, zero before the first
    pulse. The default trial count is trials_train + trials_val, ordered
    train first.
    """
    trials = spec.n_trials if trials is None else trials
    inputs = np.zeros((trials, spec.bins, spec.n))
    targets = np.zeros((trials, spec.bins, spec.n))
    width = spec.pulse_width_bins
    for i in range(trials):
        for ev in _trial_events(spec, rng):
            inputs[i, ev.bin:ev.bin + width, ev.channel] = ev.amplitude
            targets[i, ev.bin:, ev.channel] = ev.amplitude
    return TrialBatch(inputs=inputs, targets=targets, bin_times=spec.bin_times)


@dataclass(frozen=True)
class OUSpec:
    """Mean-reverting diffusion: tau dz = lam z dt + x dt + sigma dw."""

    dim: int = 30
    tau_ou: float = 1.0
    lam: float = -1.0
    drive: float = 1.0
    sigma: float = 1.0
    horizon: float = 100.0
    sample_spacing: float = 1.0
    integrator_dt: float = 1e-3

    def __post_init__(self):
        if self.lam >= 0:
            raise ValueError("lam must be negative for mean reversion")
        if self.integrator_dt <= 0 or self.integrator_dt > 0.1 * self.tau_ou:
            raise ValueError("integrator_dt must be positive and << tau_ou")
        steps = self.sample_spacing / self.integrator_dt
        if abs(steps - round(steps)) > 1e-9:
            raise ValueError("integrator_dt must divide sample_spacing")

    @property
    def n_samples(self) -> int:
        return int(round(self.horizon / self.sample_spacing))

    @property
    def stationary_mean(self) -> float:
        return -self.drive / self.lam

    @property
    def stationary_var(self) -> float:
        return self.sigma**2 / (2.0 * abs(self.lam) * self.tau_ou)


def gen_ou(spec: OUSpec, rng) -> np.ndarray:
    """Euler-Maruyama path from z(0)=0, subsampled every sample_spacing.

    Returns (n_samples, dim); the sample at row j is z((j+1)*spacing).
    """
    dt = spec.integrator_dt
    per = int(round(spec.sample_spacing / dt))
    z = np.zeros(spec.dim)
    out = np.empty((spec.n_samples, spec.dim))
    drift = dt / spec.tau_ou
    noise = (spec.sigma / spec.tau_ou) * np.sqrt(dt)
    for j in range(spec.n_samples):
        for _ in range(per):
            z = z + drift * (spec.lam * z + spec.drive) + noise * rng.standard_normal(spec.dim)
        out[j] = z
    return out


def ou_batch(spec: OUSpec, rng) -> TrialBatch:
    """The fitting target as a single-trial batch: constant drive in,
    sampled trajectory out."""
    samples = gen_ou(spec, rng)
    t = spec.n_samples
    inputs = np.full((1, t, spec.dim), spec.drive)
    targets = samples[None, :, :]
    bin_times = (np.arange(t) + 1) * spec.sample_spacing
    return TrialBatch(inputs=inputs, targets=targets, bin_times=bin_times)


def interpolate_missing(batch: TrialBatch) -> TrialBatch:
    """Fill masked-out input bins with natural cubic spline values.

    Knots are the observed (time, value) pairs per trial and channel;
    observed bins pass through untouched. The mask is preserved so callers
    can still restrict supervision to observed bins.
    """
    if batch.mask is None:
        return batch
    inputs = batch.inputs.copy()
    times = batch.bin_times
    for i in range(batch.n_trials):
        obs = batch.mask[i]
        if obs.all():
            continue
        if obs.sum() < 2:
            raise InsufficientDataError(
                f"trial {i} channel 0: needs >= 2 observed bins, has {int(obs.sum())}")
        missing = ~obs
        for ch in range(batch.input_dim):
            spline = fit_natural_spline(times[obs], batch.inputs[i, obs, ch])
            inputs[i, missing, ch] = eval_spline(spline, times[missing])
    return TrialBatch(inputs=inputs, targets=batch.targets,
                      bin_times=batch.bin_times, mask=batch.mask)
