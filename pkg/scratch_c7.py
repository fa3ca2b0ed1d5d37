"""Throwaway: criterion-7 direction check (median |abscissa| gnode vs vanilla)."""
import time

import numpy as np

from gnodelab.analysis import (BoundingBox, find_fixed_points,
                               starts_from_trajectories)
from gnodelab.models import InitScheme, ModelSpec, init_params
from gnodelab.rng import stream
from gnodelab.tasks import FlipFlopSpec, gen_flipflop
from gnodelab.training import TrainConfig, substeps_for, train, unroll

task = FlipFlopSpec(n=3, variant="uniform-box")
full = gen_flipflop(task, stream(0, "task"))
tr = full.subset(np.arange(task.trials_train))
va = full.subset(np.arange(task.trials_train, task.n_trials))


def ff_model(arch):
    kw = dict(arch=arch, n=6, d=3, out_dim=3, tau=0.01, dt=0.01,
              h0_mode="random")
    if arch in ("node", "gnode"):
        kw.update(l_h=4, hidden=100)
    return ModelSpec(**kw)


def run(arch, eta, lam):
    spec = ff_model(arch)
    params = init_params(spec, InitScheme(), stream(0, "init", arch))
    cfg = TrainConfig(epochs=600, batch_size=100, eta=eta, lambda_w=lam,
                      loss="mse", seed=0)
    t0 = time.time()
    log, ckpt = train(spec, params, tr, va, cfg)
    print(f"{arch}: best={log.best_val:.6f}@{log.best_epoch} "
          f"({time.time()-t0:.0f}s)", flush=True)
    substeps = substeps_for(spec, va.bin_times)
    h0 = np.sqrt(2.0 / (spec.state_dim + 1)) * stream(0, "val-h0").\
        standard_normal((va.n_trials, spec.state_dim))
    states, _ = unroll(ckpt.best_params, spec, va.inputs, h0=h0,
                       substeps=substeps)
    pool = starts_from_trajectories(states, 1000, stream(0, "fp-starts"))
    records = find_fixed_points(ckpt.best_params, spec, pool,
                                bbox=BoundingBox.from_trajectories(states),
                                tol=0.01, max_iter=100, dedup_radius=1e-2)
    kept = [abs(r.spectral_abscissa) for r in records
            if r.converged and r.stability_class != "unknown"]
    classes = {}
    for r in records:
        if r.converged:
            classes[r.stability_class] = classes.get(r.stability_class, 0) + 1
    print(f"{arch}: {len(records)} records, classes={classes}, "
          f"median |abscissa| = {np.median(kept):.4f} over {len(kept)}",
          flush=True)
    return float(np.median(kept))


m_g = run("gnode", 1e-3, 1e-1)
m_v = run("vanilla-rnn", 1e-2, 1e-3)
print(f"C7 medians gnode={m_g:.4f} vanilla={m_v:.4f} "
      f"{'PASS' if m_g < m_v else 'FAIL'}", flush=True)
