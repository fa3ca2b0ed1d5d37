"""Throwaway: full 27-config variable-amplitude sweep, gnode + vanilla."""
import sys, time
sys.path.insert(0, "src")
import numpy as np
from gnodelab.tasks import FlipFlopSpec, gen_flipflop
from gnodelab.rng import stream
from gnodelab.models import ModelSpec, InitScheme, init_params
from gnodelab.training import TrainConfig, train

task = FlipFlopSpec(variant="uniform-box")
batch = gen_flipflop(task, stream(0, "task"))
train_b = batch.subset(np.arange(task.trials_train))
val_b = batch.subset(np.arange(task.trials_train, task.n_trials))

ETAS = (1e-4, 1e-3, 1e-2)
DECAYS = (1e-3, 1e-2, 1e-1)
BATCHES = (10, 50, 100)

for arch, extra in [("vanilla-rnn", dict(l_h=1, hidden=0)),
                    ("gnode", dict(l_h=4, hidden=100))]:
    best = np.inf
    for bsz in (100, 50, 10):          # cheap configs first
        for eta in ETAS:
            for lam in DECAYS:
                spec = ModelSpec(arch=arch, n=6, d=3, out_dim=3,
                                 phi_a="tanh", phi_h="tanh", tau=0.01,
                                 dt=0.01, h0_mode="random", **extra)
                params = init_params(spec, InitScheme(), stream(0, "init"))
                cfg = TrainConfig(epochs=600, batch_size=bsz, eta=eta,
                                  lambda_w=lam, loss="mse", seed=0)
                t0 = time.time()
                log, ckpt = train(spec, params, train_b, val_b, cfg)
                best = min(best, log.best_val)
                print(f"{arch} eta={eta} lam={lam} B={bsz}: "
                      f"best={log.best_val:.6f}@{log.best_epoch} "
                      f"({time.time()-t0:.0f}s) failed={log.failed}",
                      flush=True)
    print(f"BEST27 {arch}: {best:.6f}", flush=True)
print("SWEEP27 DONE", flush=True)
