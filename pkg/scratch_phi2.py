"""Re-measure acceptance legs under phi_h=identity for node/gnode."""
import time

import numpy as np

from gnodelab.analysis import BoundingBox, find_fixed_points, starts_from_trajectories
from gnodelab.models import InitScheme, ModelSpec, init_params
from gnodelab.rng import stream
from gnodelab.tasks import FlipFlopSpec, gen_flipflop
from gnodelab.training import TrainConfig, substeps_for, train, unroll


def ff_model(arch):
    kw = dict(arch=arch, n=6, d=3, out_dim=3, tau=0.01, dt=0.01,
              h0_mode="random")
    if arch in ("node", "gnode"):
        kw.update(l_h=4, hidden=100, phi_h="identity")
    return ModelSpec(**kw)


def train_ff(arch, task, epochs, eta, lambda_w, batch=100, seed=0):
    spec = ff_model(arch)
    full = gen_flipflop(task, stream(seed, "task"))
    tr = full.subset(np.arange(task.trials_train))
    va = full.subset(np.arange(task.trials_train, task.n_trials))
    params = init_params(spec, InitScheme(), stream(seed, "init", arch))
    cfg = TrainConfig(epochs=epochs, batch_size=batch, eta=eta,
                      lambda_w=lambda_w, loss="mse", seed=seed)
    log, ckpt = train(spec, params, tr, va, cfg)
    return spec, log, ckpt, va


def fp_records(spec, params, val_batch, seed, starts=1000):
    substeps = substeps_for(spec, val_batch.bin_times)
    h0 = np.sqrt(2.0 / (spec.state_dim + 1)) * stream(seed, "val-h0").\
        standard_normal((val_batch.n_trials, spec.state_dim))
    states, _ = unroll(params, spec, val_batch.inputs, h0=h0, substeps=substeps)
    pool = starts_from_trajectories(states, starts, stream(seed, "fp-starts"))
    return find_fixed_points(params, spec, pool,
                             bbox=BoundingBox.from_trajectories(states),
                             tol=0.01, max_iter=100, dedup_radius=1e-2)


def main():
    # -- criterion 5: fixed-amp gnode, acceptance config, + FP census
    t0 = time.time()
    task = FlipFlopSpec(n=3, variant="fixed")
    spec, log, ckpt, va = train_ff("gnode", task, epochs=200, eta=1e-3,
                                   lambda_w=1e-1)
    recs = fp_records(spec, ckpt.best_params, va, seed=0)
    classes: dict[str, int] = {}
    for r in recs:
        if r.converged:
            classes[r.stability_class] = classes.get(r.stability_class, 0) + 1
    print(f"fixed gnode I: best={log.best_val:.6f}@{log.best_epoch} "
          f"classes={classes} ({time.time()-t0:.0f}s)", flush=True)

    # -- criterion 6 + 7: variable-amp gnode 600 epochs, then abscissas
    t0 = time.time()
    task = FlipFlopSpec(n=3, variant="uniform-box")
    spec, log, ckpt, va = train_ff("gnode", task, epochs=600, eta=1e-3,
                                   lambda_w=1e-1)
    recs = fp_records(spec, ckpt.best_params, va, seed=0)
    kept = [abs(r.spectral_abscissa) for r in recs
            if r.converged and r.stability_class != "unknown"]
    med = float(np.median(kept)) if kept else float("nan")
    print(f"variable gnode I: best={log.best_val:.6f}@{log.best_epoch} "
          f"median|a|={med:.4f} n={len(kept)} ({time.time()-t0:.0f}s)",
          flush=True)

    # -- criterion 8: disk config mini-sweep at identity
    from gnodelab.analysis import generalization_probe
    task = FlipFlopSpec(n=2, variant="disk")
    dspec = ModelSpec(arch="gnode", n=2, d=2, out_dim=2, l_h=3, hidden=316,
                      tau=0.01, dt=0.01, h0_mode="learned", phi_h="identity")
    full = gen_flipflop(task, stream(0, "task"))
    tr = full.subset(np.arange(task.trials_train))
    va = full.subset(np.arange(task.trials_train, task.n_trials))
    for eta, lam, batch in ((1e-3, 1e-2, 100), (1e-3, 1e-1, 50),
                            (1e-3, 1e-1, 10), (1e-4, 1e-1, 100)):
        t0 = time.time()
        params = init_params(dspec, InitScheme(), stream(0, "init", "gnode"))
        cfg = TrainConfig(epochs=200, batch_size=batch, eta=eta,
                          lambda_w=lam, loss="mse", seed=0)
        log, ckpt = train(dspec, params, tr, va, cfg)
        mses = generalization_probe(ckpt.best_params, dspec, task,
                                    ((0.5, 1.0), (0.0, 0.5), (2.0, 4.0)),
                                    seed=0)
        reg = {k: round(v, 4) for k, v in mses.items()}
        print(f"disk I eta={eta:g} lam={lam:g} B={batch}: "
              f"best={log.best_val:.6f}@{log.best_epoch} regions={reg} "
              f"({time.time()-t0:.0f}s)", flush=True)

    print("PHI2 DONE", flush=True)


if __name__ == "__main__":
    main()
