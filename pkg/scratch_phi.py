"""Throwaway: identity final nonlinearity for F under glorot init."""
import time

import numpy as np

from gnodelab.analysis import generalization_probe
from gnodelab.models import InitScheme, ModelSpec, init_params
from gnodelab.rng import stream
from gnodelab.tasks import FlipFlopSpec, gen_flipflop
from gnodelab.training import TrainConfig, train

# 1. fixed-amplitude 3-bit, gnode N=6 (acceptance streams)
task = FlipFlopSpec(n=3, variant="fixed")
full = gen_flipflop(task, stream(0, "task"))
tr = full.subset(np.arange(task.trials_train))
va = full.subset(np.arange(task.trials_train, task.n_trials))
spec = ModelSpec(arch="gnode", n=6, d=3, out_dim=3, l_h=4, hidden=100,
                 tau=0.01, dt=0.01, h0_mode="random", phi_h="identity")
params = init_params(spec, InitScheme(), stream(0, "init", "gnode"))
cfg = TrainConfig(epochs=200, batch_size=100, eta=1e-3, lambda_w=1e-1,
                  loss="mse", seed=0)
t0 = time.time()
log, ck = train(spec, params, tr, va, cfg)
print(f"fixed gnode N=6 phi_h=I: best={log.best_val:.6f}@{log.best_epoch} "
      f"({time.time()-t0:.0f}s)", flush=True)

# 2. disk task, gnode N=2 (acceptance streams), two configs
dtask = FlipFlopSpec(n=2, variant="disk")
dfull = gen_flipflop(dtask, stream(0, "task"))
dtr = dfull.subset(np.arange(dtask.trials_train))
dva = dfull.subset(np.arange(dtask.trials_train, dtask.n_trials))
for eta, lam in ((1e-2, 1e-2), (1e-3, 1e-1)):
    dspec = ModelSpec(arch="gnode", n=2, d=2, out_dim=2, l_h=3, hidden=316,
                      tau=0.01, dt=0.01, h0_mode="learned", phi_h="identity")
    dparams = init_params(dspec, InitScheme(), stream(0, "init", "gnode"))
    dcfg = TrainConfig(epochs=200, batch_size=100, eta=eta, lambda_w=lam,
                       loss="mse", seed=0)
    t0 = time.time()
    dlog, dck = train(dspec, dparams, dtr, dva, dcfg)
    mses = generalization_probe(dck.best_params, dspec, dtask,
                                ((0.5, 1.0), (0.0, 0.5), (2.0, 4.0)), seed=0)
    print(f"disk gnode phi_h=I eta={eta} lam={lam}: "
          f"best={dlog.best_val:.6f}@{dlog.best_epoch} ({time.time()-t0:.0f}s) "
          f"regions={ {k: round(v, 4) for k, v in mses.items()} }", flush=True)
print("PHI PROBE DONE", flush=True)
