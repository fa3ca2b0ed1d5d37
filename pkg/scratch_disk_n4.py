"""Throwaway: disk-task positive control at N=4 (acceptance streams)."""
import numpy as np

from gnodelab.analysis import generalization_probe
from gnodelab.models import InitScheme, ModelSpec, init_params
from gnodelab.rng import stream
from gnodelab.tasks import FlipFlopSpec, gen_flipflop
from gnodelab.training import TrainConfig, train

task = FlipFlopSpec(n=2, variant="disk")
full = gen_flipflop(task, stream(0, "task"))
tr = full.subset(np.arange(task.trials_train))
va = full.subset(np.arange(task.trials_train, task.n_trials))

for n in (4, 8):
    spec = ModelSpec(arch="gnode", n=n, d=2, out_dim=2, l_h=3, hidden=316,
                     tau=0.01, dt=0.01, h0_mode="learned")
    params = init_params(spec, InitScheme(), stream(0, "init", "gnode"))
    cfg = TrainConfig(epochs=200, batch_size=100, eta=1e-2, lambda_w=1e-2,
                      loss="mse", seed=0)
    log, ckpt = train(spec, params, tr, va, cfg)
    mses = generalization_probe(ckpt.best_params, spec, task,
                                ((0.5, 1.0), (0.0, 0.5), (2.0, 4.0)), seed=0)
    print(f"N={n}: best_val={log.best_val:.6f}@{log.best_epoch} "
          f"regions={ {k: round(v, 4) for k, v in mses.items()} }", flush=True)
print("N4 CONTROL DONE", flush=True)
