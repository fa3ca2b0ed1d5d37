"""Throwaway: diagnose the disk-task plateau."""
import time

import numpy as np

from gnodelab.models import InitScheme, ModelSpec, init_params
from gnodelab.rng import stream
from gnodelab.tasks import FlipFlopSpec, gen_flipflop
from gnodelab.training import TrainConfig, train

task = FlipFlopSpec(n=2, variant="disk")
full = gen_flipflop(task, stream(0, "task"))
tr = full.subset(np.arange(task.trials_train))
va = full.subset(np.arange(task.trials_train, task.n_trials))
print("target var per element:", float(va.targets.var()), flush=True)

# 1. is the learned-h0 path actually training?
spec = ModelSpec(arch="gnode", n=2, d=2, out_dim=2, l_h=3, hidden=316,
                 tau=0.01, dt=0.01, h0_mode="learned")
params = init_params(spec, InitScheme(), stream(0, "diag-init"))
before = {k: params[k].copy() for k in params if k.startswith("h0.")}
cfg = TrainConfig(epochs=2, batch_size=100, eta=1e-3, lambda_w=1e-3,
                  loss="mse", seed=0)
log, ck = train(spec, params, tr, va, cfg)
for k, v in before.items():
    delta = float(np.abs(ck.params[k] - v).max())
    print(f"h0 param {k}: max |delta| after 2 epochs = {delta:.3e}", flush=True)

# 2. mgru baseline at N=2 (other nets should sit ~0.05-0.1, not 0.3)
for arch in ("mgru", "gru"):
    s = ModelSpec(arch=arch, n=2, d=2, out_dim=2, tau=0.01, dt=0.01,
                  h0_mode="learned")
    p = init_params(s, InitScheme(), stream(0, "diag", arch))
    c = TrainConfig(epochs=200, batch_size=100, eta=1e-2, lambda_w=1e-1,
                    loss="mse", seed=0)
    t0 = time.time()
    lg, _ = train(s, p, tr, va, c)
    print(f"{arch} N=2 disk: best={lg.best_val:.6f}@{lg.best_epoch} "
          f"({time.time()-t0:.0f}s)", flush=True)

# 3. gnode with zeros h0, same budget slice as the learned-h0 runs
spec0 = ModelSpec(arch="gnode", n=2, d=2, out_dim=2, l_h=3, hidden=316,
                  tau=0.01, dt=0.01, h0_mode="zeros")
p0 = init_params(spec0, InitScheme(), stream(0, "diag-zeros"))
c0 = TrainConfig(epochs=100, batch_size=100, eta=1e-3, lambda_w=1e-3,
                 loss="mse", seed=0)
t0 = time.time()
lg0, _ = train(spec0, p0, tr, va, c0)
print(f"gnode zeros-h0 100ep: best={lg0.best_val:.6f}@{lg0.best_epoch} "
      f"({time.time()-t0:.0f}s)", flush=True)
print("DIAG DONE", flush=True)
