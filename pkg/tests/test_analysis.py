"""Fixed-point finding, flow fields, spectra, and report serialization.

The scalar and product-form nets below have fixed points solvable by
bisection inline, giving the Newton pipeline an oracle that never touches
the code under test.
"""

import numpy as np
import pytest

from gnodelab.analysis import (
    BoundingBox,
    FixedPointRecord,
    classify_stability,
    components_for,
    find_fixed_points,
    flow_field,
    generalization_probe,
    init_spectrum_experiment,
    pca_report,
    read_fixed_points_jsonl,
    starts_from_trajectories,
    write_fixed_points_jsonl,
    write_flow_csv,
    write_pca_csv,
    write_spectrum_csv,
)
from gnodelab.errors import SingularReadoutError
from gnodelab.models import ModelSpec, velocity
from gnodelab.rng import stream
from gnodelab.tasks import FlipFlopSpec

from conftest import tiny_params


def scalar_tanh_net(gain=2.0):
    """vanilla-rnn with dh/dt = -h + gain*tanh(h): roots 0 and +-h*.

    The vanilla F is affine in the activated state, so the scalar fixed
    points solve h = gain*tanh(h)."""
    spec = ModelSpec(arch="vanilla-rnn", n=1, d=1, out_dim=1, phi_a="tanh",
                     phi_h="tanh", tau=1.0, dt=0.1)
    params = tiny_params(spec)
    for key in params:
        params[key] = np.zeros_like(params[key])
    params["f.w0"] = np.array([[gain]])
    params["out.w"] = np.array([[1.0]])
    return spec, params


def bisect_root(f, lo, hi, iters=200):
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if f(lo) * f(mid) <= 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def test_scalar_tanh_fixed_points():
    spec, params = scalar_tanh_net()
    h_star = bisect_root(lambda h: 2 * np.tanh(h) - h, 1.5, 2.5)
    starts = np.array([[-2.6], [-0.4], [0.0], [0.3], [2.4]])
    recs = find_fixed_points(params, spec, starts, tol=1e-10)
    conv = [r for r in recs if r.converged]
    locs = sorted(float(r.location[0]) for r in conv)
    assert locs == pytest.approx([-h_star, 0.0, h_star], abs=1e-8)
    by_loc = {round(float(r.location[0]), 4): r for r in conv}
    # J = -1 + 2(1 - tanh^2 h*) = 1 - h*^2/2 at the outer roots, +1 at 0
    outer = by_loc[round(h_star, 4)]
    assert outer.spectral_abscissa == pytest.approx(1 - h_star**2 / 2, abs=1e-8)
    assert outer.stability_class == "stable"
    assert by_loc[0.0].stability_class == "unstable"
    assert by_loc[0.0].spectral_abscissa == pytest.approx(1.0, abs=1e-8)
    for r in conv:
        assert r.residual < 1e-10
        assert r.eigenvalues.shape == (1,)


def test_pure_leak_single_fixed_point():
    spec, params = scalar_tanh_net(gain=0.0)
    starts = stream(3, "t").standard_normal((20, 1))
    recs = find_fixed_points(params, spec, starts, tol=1e-9)
    conv = [r for r in recs if r.converged]
    assert len(conv) == 1
    assert conv[0].location == pytest.approx([0.0], abs=1e-9)
    assert conv[0].spectral_abscissa == pytest.approx(-1.0, abs=1e-9)
    assert conv[0].stability_class == "stable"


def product_net():
    """Two decoupled scalar tanh units: 9 fixed points on a 3x3 grid."""
    spec = ModelSpec(arch="vanilla-rnn", n=2, d=2, out_dim=2, phi_a="tanh",
                     phi_h="tanh", tau=1.0, dt=0.1)
    params = tiny_params(spec)
    for key in params:
        params[key] = np.zeros_like(params[key])
    params["f.w0"] = np.diag([2.0, 2.0])
    params["out.w"] = np.eye(2)
    return spec, params


def test_product_net_nine_points_dedup_and_classes():
    spec, params = product_net()
    h_star = bisect_root(lambda h: 2 * np.tanh(h) - h, 1.5, 2.5)
    axis = np.linspace(-2.5, 2.5, 5)
    g1, g2 = np.meshgrid(axis, axis)
    starts = np.stack([g1.ravel(), g2.ravel()], axis=1)
    recs = find_fixed_points(params, spec, starts, tol=1e-10)
    conv = [r for r in recs if r.converged]
    assert len(conv) == 9
    # dedup: no two survivors within the dedup radius
    for i, a in enumerate(conv):
        for b in conv[i + 1:]:
            assert np.linalg.norm(a.location - b.location) > 1e-2
    classes = sorted(r.stability_class for r in conv)
    assert classes.count("stable") == 4      # the four saturated corners
    assert classes.count("unstable") == 5    # origin plus the four edges
    grid = sorted((round(float(l), 3) for r in conv for l in r.location))
    vals = sorted({-round(h_star, 3), 0.0, round(h_star, 3)})
    assert set(grid) == set(vals)


def test_bounding_box_behavior():
    states = np.array([[[-1.0, 0.5], [0.25, 1.0]]])
    box = BoundingBox.from_trajectories(states)
    assert box.q == -1.0 and box.r == 1.0
    assert box.admits(np.array([1.9, -1.9]))
    assert not box.admits(np.array([2.1, 0.0]))
    with pytest.raises(ValueError):
        BoundingBox(q=1.0, r=0.0)


def test_bounding_box_excludes_outer_points():
    spec, params = scalar_tanh_net()
    tight = BoundingBox(q=-0.1, r=0.1)  # admits only |h| < 0.2
    starts = np.array([[-1.5], [0.0], [1.5]])
    recs = find_fixed_points(params, spec, starts, tol=1e-10, bbox=tight)
    conv_kept = [r for r in recs if r.converged and r.stability_class != "unknown"]
    assert len(conv_kept) == 1
    assert conv_kept[0].location == pytest.approx([0.0], abs=1e-9)
    # the outer roots converge but are rejected by the box: returned with
    # converged=True and no spectrum attached
    rejected = [r for r in recs if r.converged and r.stability_class == "unknown"]
    assert len(rejected) == 2


def test_classify_stability_bands():
    assert classify_stability(-0.5) == "stable"
    assert classify_stability(-0.100001) == "stable"
    assert classify_stability(-0.05) == "marginal"
    assert classify_stability(0.0) == "marginal"
    assert classify_stability(0.1) == "marginal"
    assert classify_stability(0.11) == "unstable"
    assert classify_stability(0.3, margin=0.5) == "marginal"


def readout_net():
    spec = ModelSpec(arch="vanilla-rnn", n=2, d=2, out_dim=2, phi_a="tanh",
                     phi_h="tanh", tau=1.0, dt=0.1)
    params = tiny_params(spec, seed=5)
    params["out.w"] = np.array([[2.0, 0.0], [0.0, 0.5]])
    params["out.b"] = np.array([0.3, -0.2])
    return spec, params


def test_flow_field_output_mode_matches_direct_map():
    spec, params = readout_net()
    grid = flow_field(params, spec, lo=-1.0, hi=1.0, cells=5, mode="output")
    assert np.array_equal(grid.y1, np.linspace(-1.0, 1.0, 5))
    assert grid.velocity.shape == (5, 5, 2)
    w, b = params["out.w"], params["out.b"]
    x = np.zeros((1, 2))
    for i in (0, 2, 4):
        for j in (1, 3):
            y = np.array([grid.y1[i], grid.y2[j]])
            h = np.linalg.solve(w, y - b)
            v_expect = w @ velocity(params, spec, h[None, :], x)[0]
            assert grid.velocity[i, j] == pytest.approx(v_expect, abs=1e-12)
            assert grid.speed[i, j] == pytest.approx(
                np.linalg.norm(v_expect), abs=1e-12)
    # vanilla gate is identically one, so the gate norm is sqrt(2)
    assert grid.gate_norm == pytest.approx(np.sqrt(2.0), abs=1e-12)
    assert grid.mode == "output"


def test_flow_field_state_mode():
    spec, params = readout_net()
    grid = flow_field(params, spec, lo=-0.5, hi=0.5, cells=3, mode="state")
    x = np.zeros((1, 2))
    h = np.array([grid.y1[2], grid.y2[0]])
    v_expect = velocity(params, spec, h[None, :], x)[0]
    assert grid.velocity[2, 0] == pytest.approx(v_expect, abs=1e-14)


def test_flow_field_errors():
    spec, params = readout_net()
    params["out.w"] = np.array([[1.0, 0.0], [0.0, 0.0]])
    with pytest.raises(SingularReadoutError):
        flow_field(params, spec, mode="output")
    with pytest.raises(ValueError):
        flow_field(params, spec, mode="phase")
    big = ModelSpec(arch="vanilla-rnn", n=3, d=2, out_dim=2, phi_a="tanh",
                    phi_h="tanh", tau=1.0, dt=0.1)
    with pytest.raises(ValueError):
        flow_field(tiny_params(big), big, mode="state")
    wide = ModelSpec(arch="vanilla-rnn", n=2, d=2, out_dim=3, phi_a="tanh",
                     phi_h="tanh", tau=1.0, dt=0.1)
    with pytest.raises(ValueError):
        flow_field(tiny_params(wide), wide, mode="output")


def test_starts_from_trajectories():
    states = np.arange(24, dtype=np.float64).reshape(2, 4, 3)
    rows = {tuple(r) for r in states.reshape(-1, 3)}
    picks = starts_from_trajectories(states, 5, stream(0, "t"))
    assert picks.shape == (5, 3)
    assert all(tuple(p) in rows for p in picks)
    many = starts_from_trajectories(states, 20, stream(0, "t"))
    assert many.shape == (20, 3)  # draws with replacement past the pool size


def test_init_spectrum_experiment_shapes():
    res = init_spectrum_experiment("mgru", n=40, sigma_w=1.5, sigma_z=0.0,
                                   relax_t=30.0, dt=1.0, seed=0)
    assert res.eigenvalues.shape == (40,)
    assert np.iscomplexobj(res.eigenvalues)
    assert np.isfinite(res.residual)
    assert res.stationary == (res.residual <= 1e-3)
    assert res.final_state.shape == (40,)
    g = init_spectrum_experiment("gnode", n=16, sigma_w=1.5, sigma_z=5.0,
                                 relax_t=10.0, dt=1.0, seed=1)
    assert g.eigenvalues.shape == (16,)


def test_fixed_points_jsonl_roundtrip(tmp_path):
    spec, params = scalar_tanh_net()
    starts = np.array([[1.2], [0.0], [50.0]])
    recs = find_fixed_points(params, spec, starts, tol=1e-10, max_iter=4,
                             bbox=BoundingBox(q=-1.0, r=1.0))
    path = tmp_path / "fps.jsonl"
    write_fixed_points_jsonl(path, recs)
    rows = read_fixed_points_jsonl(path)
    assert len(rows) == len(recs)
    for rec, row in zip(recs, rows):
        assert row["location"] == pytest.approx(list(rec.location))
        assert row["converged"] == rec.converged
        assert row["class"] == rec.stability_class
        if np.isnan(rec.spectral_abscissa):
            assert row["abscissa"] is None
        else:
            assert row["abscissa"] == pytest.approx(rec.spectral_abscissa)
            np.testing.assert_allclose(
                np.array(row["eigenvalues"]),
                np.array([[e.real, e.imag] for e in rec.eigenvalues]))


def test_pca_report_and_components_for():
    rng = stream(11, "t")
    latents = rng.standard_normal((300, 2)) * np.array([3.0, 1.0])
    mixing = np.array([[1.0, 0.0, 0.5], [0.0, 1.0, -0.5]])
    trajs = (latents @ mixing).reshape(6, 50, 3)
    cum = pca_report(trajs)
    assert cum.shape == (3,)
    assert np.all(np.diff(cum) >= -1e-12)
    assert cum[-1] == pytest.approx(1.0, abs=1e-9)
    assert cum[1] == pytest.approx(1.0, abs=1e-9)  # rank-2 data
    assert components_for(cum, 0.9) <= 2
    assert components_for(cum, 1.1) == 3  # unreachable fraction: all of them
    assert components_for(np.array([0.95, 1.0]), 0.9) == 1


def test_generalization_probe_regions():
    task = FlipFlopSpec(n=2, variant="disk", r_min=0.0, r_max=1.0)
    spec = ModelSpec(arch="vanilla-rnn", n=4, d=2, out_dim=2, phi_a="tanh",
                     phi_h="tanh", tau=0.01, dt=0.01)
    params = tiny_params(spec, seed=2)
    out = generalization_probe(params, spec, task,
                               regions=[(0.0, 0.5), (2.0, 4.0)], trials=20)
    assert set(out) == {(0.0, 0.5), (2.0, 4.0)}
    assert all(v > 0 for v in out.values())
    # an untrained net outputs near zero, so distant annuli cost more
    assert out[(2.0, 4.0)] > out[(0.0, 0.5)]


def test_write_flow_csv(tmp_path):
    spec, params = readout_net()
    grid = flow_field(params, spec, lo=-0.5, hi=0.5, cells=3, mode="state")
    path = tmp_path / "flow.csv"
    write_flow_csv(path, grid)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "y1,y2,v1,v2,speed,gate_norm"
    assert len(lines) == 1 + 9
    first = [float(v) for v in lines[1].split(",")]
    assert first[0] == grid.y1[0] and first[1] == grid.y2[0]
    assert first[2:4] == pytest.approx(list(grid.velocity[0, 0]))
    assert "np." not in path.read_text()


def test_write_spectrum_csv(tmp_path):
    res = init_spectrum_experiment("mgru", n=12, relax_t=5.0, seed=0)
    path = tmp_path / "spec.csv"
    write_spectrum_csv(path, res)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "re,im"
    assert len(lines) == 13
    re, im = (float(v) for v in lines[1].split(","))
    assert complex(re, im) == pytest.approx(complex(res.eigenvalues[0]))


def test_write_pca_csv(tmp_path):
    path = tmp_path / "pca.csv"
    write_pca_csv(path, np.array([0.6, 0.9, 1.0]))
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "component,cumulative_variance"
    assert lines[1] == "1,0.6"
    assert lines[3].startswith("3,")
