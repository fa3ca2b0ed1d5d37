"""Throwaway: cheap directional preview of the OU ordering criteria."""
import time

from gnodelab.capacity import OuGridSpec, best_mse_table, ou_fit_experiment

grid = OuGridSpec(families=("vanilla-rnn", "gru", "gnode"),
                  n_grid=(10, 100), h_grid=(100,), l_grid=(2,),
                  tau_grid=(1.0, 30.0, 100.0),
                  etas=(1e-3,), decays=(1e-2,),
                  epochs=300, seeds=(0,))

t0 = time.time()
rows = ou_fit_experiment(grid, progress=lambda i, n, row: print(
    f"[{i}/{n}] {row['family']} N={row['N']} H={row['H']} tau={row['tau']} "
    f"-> {row['best_mse']:.5f} ({time.time()-t0:.0f}s)", flush=True))
table = best_mse_table(rows)


def best(family, tau, n=None):
    vals = [v for (f, N, H, L, t, s), v in table.items()
            if f == family and t == tau and (n is None or N == n)]
    return min(vals)


for fam in grid.families:
    a, c = best(fam, 1.0), best(fam, 100.0)
    print(f"(a) {fam}: tau1={a:.5f} tau100={c:.5f} "
          f"{'PASS' if a < c else 'FAIL'}", flush=True)
for tau in (1.0, 30.0):
    g, r = best("gnode", tau, 10), best("gru", tau, 10)
    print(f"(b) tau={tau}: gnode={g:.5f} gru={r:.5f} "
          f"{'PASS' if g <= r else 'FAIL'}", flush=True)
gap_mid = best("vanilla-rnn", 30.0) - best("gnode", 30.0)
gap_matched = best("vanilla-rnn", 1.0) - best("gnode", 1.0)
print(f"(c) gap30={gap_mid:.5f} gap1={gap_matched:.5f} "
      f"{'PASS' if gap_mid > gap_matched else 'FAIL'}", flush=True)
print("OU PREVIEW DONE", flush=True)
