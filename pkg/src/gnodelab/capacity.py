"""Expressivity probes.

Two empirical measurements: how long a random +-1 pattern sequence a linear
threshold map F(xi) = sign(N^{-1/2} J xi) can store (sharp transition at
T/N = 2), and how well each architecture fits a single Ornstein-Uhlenbeck
trajectory across network sizes and time constants.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .models import InitScheme, ModelSpec, init_params
from .rng import stream
from .tasks import OUSpec, ou_batch
from .training import SWEEP_DECAYS, SWEEP_ETAS, TrainConfig, train

__all__ = [
    "CapacityProbeSpec", "perceptron_sequence_capacity", "crossing_alpha",
    "write_capacity_csv", "OuGridSpec", "OuCell", "ou_run", "ou_fit_experiment",
    "best_mse_table", "write_ou_csv",
]


@dataclass(frozen=True)
class CapacityProbeSpec:
    """Sequence-storage probe: per alpha, draw T = alpha*N patterns and train
    each row of J by the perceptron rule on the T-1 transitions."""

    n: int = 200
    alphas: tuple = (0.5, 1.5, 2.5, 3.0)
    trials: int = 50
    max_sweeps: int | None = None   # default 1e4 * n, i.e. 1e4*N updates/row
    margin: float = 0.0
    stall_sweeps: int | None = 10_000

    def __post_init__(self):
        if self.n < 10:
            raise ValueError(f"n must be at least 10, got {self.n}")
        if not self.alphas or any(a <= 0 for a in self.alphas):
            raise ValueError("alphas must be positive")
        if self.trials < 1 or (self.max_sweeps is not None and self.max_sweeps < 1):
            raise ValueError("trials and max_sweeps must be positive")
        if self.margin < 0:
            raise ValueError("margin must be non-negative")

    @property
    def sweep_budget(self) -> int:
        return 10_000 * self.n if self.max_sweeps is None else self.max_sweeps


def _store_sequence(n, length, margin, max_sweeps, stall_sweeps, rng) -> bool:
    """One storage attempt. Returns True when every transition constraint
    xi_i^{t+1} (N^{-1/2} J_i . xi^t) > margin holds within the sweep budget.

    Rows of J are independent perceptrons sharing the patterns, so the
    bookkeeping is done on the margin matrix directly: all quantities are
    integer-valued (exactly representable in float64), making the margin
    comparison at 0 exact. Each sweep updates every violated row on its
    first violated transition; one update adds a Gram row to that row's
    margins, so the per-row update budget equals max_sweeps. A row whose
    constraints are all satisfied never updates again, so the count of
    unsolved rows is non-increasing; the stall cutoff abandons an attempt
    once that count has gone stall_sweeps sweeps without dropping, which is
    what terminates above-capacity attempts long before the raw budget.
    """
    xi = (rng.integers(0, 2, size=(length, n)) * 2 - 1).astype(np.float64)
    prev = xi[:-1]                      # (P, n), P = length-1 transitions
    labels = xi[1:].T                   # (n, P); labels[i, t] = xi_i^{t+1}
    gram = prev @ prev.T                # integer-valued
    # margins holds labels * (Jt @ prev.T) for Jt = sqrt(N) J, which grows by
    # one Gram row per update; the true field margin is margins / N.
    margins = np.zeros((n, length - 1))
    threshold = margin * n
    fewest_unsolved = n + 1
    since_drop = 0
    for _ in range(max_sweeps):
        viol = margins <= threshold
        rows = np.nonzero(viol.any(axis=1))[0]
        if rows.size == 0:
            return True
        first = np.argmax(viol[rows], axis=1)
        margins[rows] += labels[rows] * labels[rows, first][:, None] * gram[first]
        if rows.size < fewest_unsolved:
            fewest_unsolved = rows.size
            since_drop = 0
        else:
            since_drop += 1
            if stall_sweeps is not None and since_drop >= stall_sweeps:
                return False
    return False


def perceptron_sequence_capacity(spec: CapacityProbeSpec, seed: int = 0) -> list[tuple]:
    """Mean storage success per alpha. Returns [(alpha, success_fraction)]."""
    out = []
    for alpha in spec.alphas:
        length = max(2, int(round(alpha * spec.n)))
        wins = 0
        for trial in range(spec.trials):
            rng = stream(seed, "capacity", repr(float(alpha)), trial)
            wins += _store_sequence(spec.n, length, spec.margin,
                                    spec.sweep_budget, spec.stall_sweeps, rng)
        out.append((float(alpha), wins / spec.trials))
    return out


def crossing_alpha(results) -> float:
    """Linearly interpolated alpha where the success curve crosses 0.5.

    Expects results sorted by alpha with success starting above 0.5 and
    ending below; raises ValueError when no bracket exists.
    """
    for (a0, f0), (a1, f1) in zip(results, results[1:]):
        if f0 >= 0.5 >= f1:
            if f0 == f1:
                return (a0 + a1) / 2
            return a0 + (f0 - 0.5) * (a1 - a0) / (f0 - f1)
    raise ValueError("success curve does not cross 0.5 on the sampled grid")


def write_capacity_csv(path, spec: CapacityProbeSpec, results) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("alpha,N,trials,success_fraction\n")
        for alpha, frac in results:
            fh.write(f"{alpha!r},{spec.n},{spec.trials},{frac!r}\n")


@dataclass(frozen=True)
class OuCell:
    family: str
    n: int
    h: int      # hidden width, 0 for single-layer families
    l: int      # depth of the state net
    tau: float


@dataclass(frozen=True)
class OuGridSpec:
    """Grid of (family, N, H, L, tau) cells, each swept over the eta and
    weight-decay combinations with one net per (cell, seed, combo)."""

    families: tuple = ("vanilla-rnn", "gru", "gnode")
    n_grid: tuple = (10, 32, 100, 316)
    h_grid: tuple = (100, 316, 1000)
    l_grid: tuple = (2,)
    tau_grid: tuple = (1.0, 10.0, 30.0, 100.0)
    etas: tuple = SWEEP_ETAS
    decays: tuple = SWEEP_DECAYS
    epochs: int = 2000
    seeds: tuple = (0, 1, 2, 3, 4)

    def __post_init__(self):
        for name in ("families", "n_grid", "h_grid", "l_grid", "tau_grid",
                     "etas", "decays", "seeds"):
            if not getattr(self, name):
                raise ValueError(f"{name} must be non-empty")
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")

    def cells(self) -> list[OuCell]:
        out = []
        for family in self.families:
            deep = family in ("node", "gnode")
            for n in self.n_grid:
                for tau in self.tau_grid:
                    if deep:
                        for h, depth in product(self.h_grid, self.l_grid):
                            out.append(OuCell(family, n, h, depth, float(tau)))
                    else:
                        out.append(OuCell(family, n, 0, 1, float(tau)))
        return out


def _cell_spec(cell: OuCell, ou: OUSpec) -> ModelSpec:
    n = cell.n + (cell.n % 2) if cell.family == "lem" else cell.n
    # Glorot-initialized node/gnode pair with a linear final F layer; the
    # bounded variant belongs to the critical scheme. Other families use
    # phi_h as their cell nonlinearity and keep tanh.
    phi_h = "identity" if cell.family in ("node", "gnode") else "tanh"
    return ModelSpec(
        arch=cell.family, n=n, d=ou.dim, out_dim=ou.dim,
        l_h=cell.l, hidden=cell.h if cell.l > 1 else 0,
        phi_a="tanh", phi_h=phi_h,
        tau=cell.tau, dt=min(ou.sample_spacing, cell.tau), h0_mode="learned")


def ou_run(cell: OuCell, eta: float, lambda_w: float, seed: int,
           epochs: int, ou: OUSpec | None = None) -> float:
    """Train one net on one OU trajectory; returns the minimum MSE reached
    over epochs, or nan when the run diverged before improving."""
    ou = ou or OUSpec()
    batch = ou_batch(ou, stream(seed, "ou-data"))
    spec = _cell_spec(cell, ou)
    init_rng = stream(seed, "ou-init", cell.family, cell.n, cell.h, cell.l,
                      repr(cell.tau))
    params = init_params(spec, InitScheme(), init_rng)
    cfg = TrainConfig(epochs=epochs, batch_size=1, eta=eta,
                      lambda_w=lambda_w, loss="mse", seed=seed)
    log, _ = train(spec, params, batch, batch, cfg)
    return log.best_val if np.isfinite(log.best_val) else float("nan")


def ou_fit_experiment(grid: OuGridSpec, ou: OUSpec | None = None,
                      workers: int = 1, progress=None) -> list[dict]:
    """Full sweep. One result row per (cell, seed, eta, lambda_w); divergent
    runs carry best_mse = nan so minima can skip them."""
    ou = ou or OUSpec()
    jobs = [(cell, eta, lam, seed)
            for cell in grid.cells()
            for seed in grid.seeds
            for eta in grid.etas
            for lam in grid.decays]

    def run_one(job):
        cell, eta, lam, seed = job
        return {
            "family": cell.family, "N": cell.n, "H": cell.h, "L": cell.l,
            "tau": cell.tau, "eta": eta, "lambda_w": lam, "seed": seed,
            "best_mse": ou_run(cell, eta, lam, seed, grid.epochs, ou),
        }

    if workers > 1:
        from multiprocessing import Pool
        with Pool(workers) as pool:
            rows = pool.map(_OuJob(grid, ou), jobs)
    else:
        rows = []
        for i, job in enumerate(jobs):
            rows.append(run_one(job))
            if progress is not None:
                progress(i + 1, len(jobs), rows[-1])
    return rows


class _OuJob:
    """Picklable per-job runner for the worker pool."""

    def __init__(self, grid: OuGridSpec, ou: OUSpec):
        self.epochs = grid.epochs
        self.ou = ou

    def __call__(self, job):
        cell, eta, lam, seed = job
        return {
            "family": cell.family, "N": cell.n, "H": cell.h, "L": cell.l,
            "tau": cell.tau, "eta": eta, "lambda_w": lam, "seed": seed,
            "best_mse": ou_run(cell, eta, lam, seed, self.epochs, self.ou),
        }


def best_mse_table(rows) -> dict:
    """(family, N, H, L, tau, seed) -> min finite best_mse over combos."""
    table: dict = {}
    for row in rows:
        mse = row["best_mse"]
        if not np.isfinite(mse):
            continue
        key = (row["family"], row["N"], row["H"], row["L"], row["tau"], row["seed"])
        if key not in table or mse < table[key]:
            table[key] = mse
    return table


def write_ou_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("family,N,H,L,tau,eta,lambda_w,seed,best_mse\n")
        for r in rows:
            fh.write(f"{r['family']},{r['N']},{r['H']},{r['L']},{r['tau']!r},"
                     f"{r['eta']!r},{r['lambda_w']!r},{r['seed']},{r['best_mse']!r}\n")
