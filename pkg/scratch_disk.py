"""Disk-task evidence: train gnode N=2 L=3 H=316 learned-h0, probe regions."""
import time

import numpy as np

from gnodelab.models import InitScheme, ModelSpec, init_params
from gnodelab.rng import stream
from gnodelab.tasks import FlipFlopSpec, gen_flipflop
from gnodelab.training import TrainConfig, train
from gnodelab.analysis import generalization_probe

task = FlipFlopSpec(n=2, variant="disk")
tr = gen_flipflop(task, stream(0, "disk-train"), trials=task.trials_train)
va = gen_flipflop(task, stream(0, "disk-val"), trials=task.trials_val)
spec = ModelSpec(arch="gnode", n=2, d=2, out_dim=2, l_h=3, hidden=316,
                 tau=0.01, dt=0.01, h0_mode="learned")

REGIONS = ((0.5, 1.0), (0.0, 0.5), (2.0, 4.0))
best = (np.inf, None, None)
for eta in (1e-3, 1e-2):
    for lam in (1e-3, 1e-2):
        t0 = time.time()
        params = init_params(spec, InitScheme(), stream(0, "disk-init", repr(eta), repr(lam)))
        cfg = TrainConfig(epochs=200, batch_size=10, eta=eta, lambda_w=lam,
                          loss="mse", seed=0)
        log, ck = train(spec, params, tr, va, cfg)
        el = time.time() - t0
        print(f"eta={eta} lam={lam} B=10: best_val={log.best_val:.6g} "
              f"(epoch {log.best_epoch}) {el:.0f}s", flush=True)
        if log.best_val < best[0]:
            best = (log.best_val, ck.best_params, (eta, lam))

print("BEST", best[2], best[0], flush=True)
mses = generalization_probe(best[1], spec, task, REGIONS, seed=0, trials=100)
for k, v in mses.items():
    print(f"region {k}: mse={v:.6g}", flush=True)
ok = (mses[(0.5, 1.0)] < mses[(0.0, 0.5)] < mses[(2.0, 4.0)]
      and mses[(0.5, 1.0)] < 0.02)
print("ORDERING+FLOOR PASS" if ok else "ORDERING+FLOOR FAIL", flush=True)
