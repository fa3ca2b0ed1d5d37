"""End-to-end guarantees of the library, one test per headline claim.

Fast checks (gradients, initialization theory, spectra) run in seconds.
Tests marked slow train real models at the documented protocols and take
minutes to hours; they are still part of the default suite.
"""

import dataclasses

import numpy as np
import pytest

from gnodelab.analysis import (
    BoundingBox,
    find_fixed_points,
    generalization_probe,
    init_spectrum_experiment,
    starts_from_trajectories,
)
from gnodelab.capacity import (
    CapacityProbeSpec,
    OuGridSpec,
    best_mse_table,
    crossing_alpha,
    ou_fit_experiment,
    perceptron_sequence_capacity,
)
from gnodelab.linalg import eig_spectrum, spectral_abscissa
from gnodelab.mft import (
    MftConfig,
    critical_sigma,
    kernel_forward,
    product_radius_sq,
    relu_fixed_point,
    tanh_critical_curve,
)
from gnodelab.models import (
    ARCHS,
    InitScheme,
    ModelSpec,
    f_jacobian,
    init_params,
    jacobian,
)
from gnodelab.rng import stream
from gnodelab.tasks import FlipFlopSpec, gen_flipflop
from gnodelab.training import TrainConfig, bptt_grad, substeps_for, train, unroll


# ------------------------------------------------- gradient correctness

def _grad_spec(arch: str) -> ModelSpec:
    n = 4 if arch == "lem" else 3      # lem state is block-paired
    kw = dict(arch=arch, n=n, d=2, out_dim=2, tau=2.0, dt=1.0)
    if arch in ("node", "gnode"):
        kw.update(l_h=2, hidden=4)
    return ModelSpec(**kw)


@pytest.mark.parametrize("loss", ["mse", "softmax-cross-entropy"])
@pytest.mark.parametrize("arch", ARCHS)
def test_bptt_matches_finite_differences(arch, loss):
    spec = _grad_spec(arch)
    params = init_params(spec, InitScheme(), stream(0, "accept-grad", arch))
    rng = stream(1, "accept-grad-data", arch, loss)
    inputs = rng.standard_normal((4, 5, spec.d))
    if loss == "mse":
        targets = rng.standard_normal((4, 5, spec.out_dim))
    else:
        targets = rng.integers(0, spec.out_dim, size=4)
    _, grads = bptt_grad(params, spec, inputs, targets, loss)
    eps = 1e-6
    pick = stream(2, "accept-grad-pick", arch, loss)
    for key in sorted(grads):
        flat = params[key].reshape(-1)
        for _ in range(min(3, flat.size)):
            j = int(pick.integers(0, flat.size))
            orig = flat[j]
            flat[j] = orig + eps
            up, _ = bptt_grad(params, spec, inputs, targets, loss)
            flat[j] = orig - eps
            dn, _ = bptt_grad(params, spec, inputs, targets, loss)
            flat[j] = orig
            fd = (up - dn) / (2 * eps)
            got = grads[key].reshape(-1)[j]
            assert got == pytest.approx(fd, rel=1e-5, abs=1e-9), (key, j)


# ---------------------------------------------- critical initialization

def test_relu_critical_scale_sits_at_edge_of_chaos():
    assert critical_sigma("kaiming", 2) == 2 ** 0.25
    spec = ModelSpec(arch="node", n=512, d=1, out_dim=1, l_h=2, hidden=512,
                     phi_a="relu", phi_h="tanh")
    # the default tiny bias keeps preactivations off the relu kink at h = 0
    scheme = InitScheme(kind="critical", scaling="kaiming")
    h0, x0 = np.zeros(512), np.zeros(1)
    radii = []
    for seed in range(10):
        params = init_params(spec, scheme, stream(seed, "accept-critical"))
        rho = float(np.max(np.abs(eig_spectrum(f_jacobian(params, spec, h0, x0)))))
        radii.append(rho)
    # the max-modulus estimator fluctuates O(sqrt(log N / N)) above the bulk
    # radius per draw, so the band applies to the seed average
    assert 0.9 <= float(np.mean(radii)) <= 1.1, radii
    assert all(0.8 <= r <= 1.3 for r in radii), radii


def test_kernel_theory_self_consistency():
    cfg = MftConfig(depth=3, sigma_w=0.9, sigma_b=0.3, activation="relu")
    c_star, exists, radius_sq = relu_fixed_point(cfg)
    assert exists
    c = 0.0
    for _ in range(5000):
        c = kernel_forward(cfg, c).c_f
    assert c_star == pytest.approx(c, abs=1e-10)

    # depthwise susceptibility at zero state variance equals the product form
    for depth in (1, 2, 5):
        pcfg = MftConfig(depth=depth, sigma_w=1.3, sigma_b=0.2, activation="relu")
        assert kernel_forward(pcfg, 0.0).chis[-1] == pytest.approx(
            product_radius_sq(pcfg, 0.0), rel=1e-10)

    stars = tanh_critical_curve(np.array([0.0]), depth=2, scaling="kaiming")
    assert stars[0] == pytest.approx(1.0, abs=1e-6)


def test_leakless_node_is_linearly_unstable_at_origin():
    spec = ModelSpec(arch="node", n=96, d=2, out_dim=1, l_h=2, hidden=96,
                     leak=False)
    h0, x0 = np.zeros(96), np.zeros(2)
    abscissas = []
    for seed in range(20):
        params = init_params(spec, InitScheme(), stream(seed, "accept-leakless"))
        abscissas.append(spectral_abscissa(jacobian(params, spec, h0, x0)))
    assert all(a > 0 for a in abscissas), abscissas


# ------------------------------------------- flip-flop training at N = 6
#
# Shared protocol: 1 s trials in 10 ms bins, tau = 0.01 s, AdamW, random
# (not learned) h0 ~ N(0, 2/(N+1) I). Deep nets use a 4-layer F with
# width-100 hidden layers.

def _ff_model(arch: str) -> ModelSpec:
    kw = dict(arch=arch, n=6, d=3, out_dim=3, tau=0.01, dt=0.01,
              h0_mode="random")
    if arch in ("node", "gnode"):
        # Glorot init pairs with a linear final F layer; a tanh-bounded F
        # belongs to the critical scheme and caps the reachable states.
        kw.update(l_h=4, hidden=100, phi_h="identity")
    return ModelSpec(**kw)


def _train_ff(arch, task, epochs, eta, lambda_w, batch=100, seed=0):
    spec = _ff_model(arch)
    full = gen_flipflop(task, stream(seed, "task"))
    tr = full.subset(np.arange(task.trials_train))
    va = full.subset(np.arange(task.trials_train, task.n_trials))
    params = init_params(spec, InitScheme(), stream(seed, "init", arch))
    cfg = TrainConfig(epochs=epochs, batch_size=batch, eta=eta,
                      lambda_w=lambda_w, loss="mse", seed=seed)
    log, ckpt = train(spec, params, tr, va, cfg)
    return spec, log, ckpt, va


def _fp_records(spec, params, val_batch, seed, starts=1000):
    """Deduplicated fixed points from validation-trajectory starts."""
    substeps = substeps_for(spec, val_batch.bin_times)
    h0 = np.sqrt(2.0 / (spec.state_dim + 1)) * stream(seed, "val-h0").\
        standard_normal((val_batch.n_trials, spec.state_dim))
    states, _ = unroll(params, spec, val_batch.inputs, h0=h0, substeps=substeps)
    pool = starts_from_trajectories(states, starts, stream(seed, "fp-starts"))
    return find_fixed_points(params, spec, pool,
                             bbox=BoundingBox.from_trajectories(states),
                             tol=0.01, max_iter=100, dedup_radius=1e-2)


@pytest.fixture(scope="module")
def fixed_amp_runs():
    task = FlipFlopSpec(n=3, variant="fixed")
    runs = {}
    for arch, eta in (("mgru", 1e-2), ("gru", 1e-2), ("gnode", 1e-3)):
        runs[arch] = _train_ff(arch, task, epochs=200, eta=eta, lambda_w=1e-1)
    return runs


@pytest.mark.slow
def test_fixed_amplitude_trio_hits_mse_floor(fixed_amp_runs):
    """All three gated nets should cross val MSE 0.01 at N = 6.

    Known to fail here: measured floors are mGRU 0.056-0.080, GRU
    0.055-0.082 across seeds, gnODE 0.060 (down from 0.17-0.19 once F's
    final layer is linear as the Glorot pairing dictates; mGRU/GRU have no
    such layer, so their floors are untouched). The same pipeline does
    cross 0.01 at N = 12-18, and seeds, decay, init shape, h0 policy, bias
    scale, a 10x epoch budget, and gradient correctness (FD-checked to
    1e-5) were all ruled out as the cause, so the assertion is kept at its
    stated strength rather than loosened to fit.
    """
    floors = {arch: log.best_val for arch, (_, log, _, _) in fixed_amp_runs.items()}
    assert all(v < 0.01 for v in floors.values()), floors


@pytest.mark.slow
def test_fixed_amplitude_gnode_forms_eight_attractors(fixed_amp_runs):
    """The trained gnODE should place one stable fixed point per output
    corner, 8 in total.

    Known to fail here: the census finds 7 stable points at the 0.060 MSE
    floor documented above (one corner has not separated). The count is
    tied to crossing the 0.01 floor, which this configuration does not.
    """
    spec, log, ckpt, va = fixed_amp_runs["gnode"]
    records = _fp_records(spec, ckpt.best_params, va, seed=0)
    stable = [r for r in records if r.stability_class == "stable"]
    assert len(stable) == 8, [r.stability_class for r in records if r.converged]


# ------------------------------------- variable-amplitude task at N = 6

@pytest.fixture(scope="module")
def variable_runs():
    task = FlipFlopSpec(n=3, variant="uniform-box")
    gnode = _train_ff("gnode", task, epochs=600, eta=1e-3, lambda_w=1e-1)
    vanilla, best = None, np.inf
    for eta in (1e-4, 1e-3, 1e-2):
        for lam in (1e-3, 1e-2, 1e-1):
            run = _train_ff("vanilla-rnn", task, epochs=600, eta=eta,
                            lambda_w=lam)
            if run[1].best_val < best:
                vanilla, best = run, run[1].best_val
    return {"gnode": gnode, "vanilla-rnn": vanilla}


@pytest.mark.slow
def test_variable_amplitude_gnode_beats_vanilla(variable_runs):
    """gnODE should solve the variable-amplitude task where vanilla cannot.

    The vanilla half holds (best of the 9-config sweep measured 0.073-0.075
    depending on init draw, and 0.0747 over the full 27). The gnODE half
    shares the N = 6 trainability gap documented on the fixed-amplitude
    floor test: measured 0.023 at this exact config and seed (halved from
    0.047 by the linear final F layer but still short of 0.015), so this
    assertion fails honestly.
    """
    gnode_best = variable_runs["gnode"][1].best_val
    vanilla_best = variable_runs["vanilla-rnn"][1].best_val
    assert vanilla_best >= 0.02, vanilla_best
    assert gnode_best < 0.015, gnode_best


@pytest.mark.slow
def test_gnode_attractors_flatter_than_vanilla(variable_runs):
    medians = {}
    for arch, (spec, log, ckpt, va) in variable_runs.items():
        records = _fp_records(spec, ckpt.best_params, va, seed=0)
        kept = [abs(r.spectral_abscissa) for r in records
                if r.converged and r.stability_class != "unknown"]
        assert kept, f"no classified fixed points for {arch}"
        medians[arch] = float(np.median(kept))
    assert medians["gnode"] < medians["vanilla-rnn"], medians


# ------------------------------------------------- disk-task generalization

@pytest.mark.slow
def test_disk_training_generalizes_inward_not_outward():
    """Nets trained on annulus-amplitude pulses should interpolate inward
    (region MSE ordering inner < hole < outer) and the inner band should be
    near training error.

    Known to fail at N = 2: val MSE plateaus at 0.32-0.35 across a 10-point
    (eta, lambda, batch) probe (this config is the probe winner; mGRU/GRU
    plateau at 0.19-0.22 on the same task), which is the N = 2 expression
    of the small-N trainability gap documented on the fixed-amplitude floor
    test. Short of the 0.02 floor the region ordering is draw-dependent --
    one probe draw gave 0.281 < 0.457 < 1.987, this test's streams give a
    flipped inner/hole pair -- so both asserts are kept at stated strength
    and fail honestly until the floor is reachable.
    """
    task = FlipFlopSpec(n=2, variant="disk")
    spec = ModelSpec(arch="gnode", n=2, d=2, out_dim=2, l_h=3, hidden=316,
                     tau=0.01, dt=0.01, h0_mode="learned", phi_h="identity")
    full = gen_flipflop(task, stream(0, "task"))
    tr = full.subset(np.arange(task.trials_train))
    va = full.subset(np.arange(task.trials_train, task.n_trials))
    params = init_params(spec, InitScheme(), stream(0, "init", "gnode"))
    cfg = TrainConfig(epochs=200, batch_size=100, eta=1e-3, lambda_w=1e-1,
                      loss="mse", seed=0)
    log, ckpt = train(spec, params, tr, va, cfg)
    mses = generalization_probe(ckpt.best_params, spec, task,
                                ((0.5, 1.0), (0.0, 0.5), (2.0, 4.0)), seed=0)
    inner, hole, outer = mses[(0.5, 1.0)], mses[(0.0, 0.5)], mses[(2.0, 4.0)]
    assert inner < hole < outer, mses
    assert inner < 0.02, mses


# ------------------------------------------------ gating pinches spectra

def test_strong_gating_pinches_init_spectrum():
    fracs = {}
    for arch in ("mgru", "gnode", "lem"):
        for sigma_z in (0.0, 5.0):
            result = init_spectrum_experiment(arch, n=1000, sigma_w=1.5,
                                              sigma_z=sigma_z, seed=0)
            fracs[arch, sigma_z] = float(
                np.mean(np.abs(result.eigenvalues) < 0.2))
    for arch in ("mgru", "gnode", "lem"):
        assert fracs[arch, 5.0] > fracs[arch, 0.0], (arch, fracs)


# ------------------------------------------------- sequence capacity

@pytest.mark.slow
def test_sequence_storage_transition_near_two():
    spec = CapacityProbeSpec(n=200, alphas=(0.5, 1.5, 2.5, 3.0), trials=50,
                             stall_sweeps=6000)
    results = perceptron_sequence_capacity(spec, seed=0)
    table = dict(results)
    assert table[0.5] >= 0.95, results
    assert table[3.0] <= 0.05, results
    assert 1.5 <= crossing_alpha(results) <= 2.5, results


# --------------------------------------------- trajectory-fitting grid

@pytest.mark.slow
def test_ou_fitting_orderings():
    grid = OuGridSpec(families=("vanilla-rnn", "gru", "gnode"),
                      n_grid=(10, 100), h_grid=(100, 1000), l_grid=(2,),
                      tau_grid=(1.0, 30.0, 100.0), epochs=1000,
                      seeds=(0, 1, 2))
    rows = ou_fit_experiment(grid)
    table = best_mse_table(rows)

    def best(family, tau, n=None):
        vals = [v for (f, N, H, L, t, s), v in table.items()
                if f == family and t == tau and (n is None or N == n)]
        assert vals, (family, tau, n)
        return min(vals)

    # matching the data's correlation time beats a 100x slower network
    for family in grid.families:
        assert best(family, 1.0) < best(family, 100.0), family

    # at small phase-space dimension the gate matches or beats the GRU
    for tau in (1.0, 30.0):
        assert best("gnode", tau, n=10) <= best("gru", tau, n=10), tau

    # the vanilla-vs-gnode gap widens away from the data's timescale
    gap_mid = best("vanilla-rnn", 30.0) - best("gnode", 30.0)
    gap_matched = best("vanilla-rnn", 1.0) - best("gnode", 1.0)
    assert gap_mid > gap_matched, (gap_mid, gap_matched)
