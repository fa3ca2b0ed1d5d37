"""Euler unrolls and exact reverse-mode gradients through them.

The forward pass is the discrete system from the models module; gradients
differentiate that discrete unroll directly (no continuous-time adjoint),
so a finite-difference check on the discrete loss must agree to first
order. Backward steps consume the step caches produced by step_forward
and recover activation derivatives from stored activation values.
"""

from __future__ import annotations

import numpy as np

from ..errors import DivergenceError
from ..models import ModelSpec
from ..models.forward import dact_from_value, readout, step_forward
from .losses import loss_and_grad

__all__ = ["unroll", "bptt_grad", "substeps_for"]


def substeps_for(spec: ModelSpec, bin_times: np.ndarray) -> int:
    """Euler steps per bin; spec.dt must divide the (uniform) bin spacing."""
    bin_times = np.asarray(bin_times, dtype=np.float64)
    if bin_times.size < 2:
        return 1
    gaps = np.diff(bin_times)
    if not np.allclose(gaps, gaps[0], rtol=1e-9, atol=1e-12):
        raise ValueError("bin spacing must be uniform for unrolling")
    ratio = gaps[0] / spec.dt
    n = int(round(ratio))
    if n < 1 or abs(ratio - n) > 1e-6:
        raise ValueError(
            f"dt={spec.dt} must divide the bin spacing {gaps[0]} exactly")
    return n


def resolve_h0(params, spec: ModelSpec, inputs: np.ndarray, h0=None) -> np.ndarray:
    """Initial state per spec.h0_mode.

    learned: affine map of the first-bin input (overriding h0 is an error);
    zeros: the origin; random: the caller must supply the draw.
    """
    trials = inputs.shape[0]
    if spec.h0_mode == "learned":
        if h0 is not None:
            raise ValueError("learned h0_mode computes h0 from params")
        return inputs[:, 0, :] @ params["h0.a"].T + params["h0.c"]
    if h0 is not None:
        h0 = np.asarray(h0, dtype=np.float64)
        if h0.shape != (trials, spec.state_dim):
            raise ValueError(f"h0 must be ({trials}, {spec.state_dim}), got {h0.shape}")
        return h0
    if spec.h0_mode == "random":
        raise ValueError("random h0_mode needs an explicit h0 draw")
    return np.zeros((trials, spec.state_dim))


def unroll(params, spec: ModelSpec, inputs: np.ndarray, h0=None,
           substeps: int = 1, want_cache: bool = False):
    """Integrate through all bins; states (B, T+1, S), outputs (B, T, O).

    Each bin advances `substeps` Euler steps holding that bin's input
    fixed; the readout is applied to the post-bin state. A non-finite
    state aborts with the 1-based Euler step index.
    """
    inputs = np.asarray(inputs, dtype=np.float64)
    if inputs.ndim != 3:
        raise ValueError(f"inputs must be (trials, bins, d), got {inputs.shape}")
    trials, bins, _ = inputs.shape
    h = resolve_h0(params, spec, inputs, h0)
    states = np.empty((trials, bins + 1, spec.state_dim))
    states[:, 0] = h
    caches = [] if want_cache else None
    for t in range(bins):
        x = inputs[:, t, :]
        for s in range(substeps):
            h, cache = step_forward(params, spec, h, x, want_cache=want_cache)
            if want_cache:
                caches.append(cache)
            if not np.all(np.isfinite(h)):
                raise DivergenceError(
                    f"non-finite state at Euler step {t * substeps + s + 1}",
                    step=t * substeps + s + 1)
        states[:, t + 1] = h
    outputs = states[:, 1:] @ params["out.w"].T + params["out.b"]
    if want_cache:
        return states, outputs, caches
    return states, outputs


def _mlp_backward(params, grads, prefix, n_layers, phi_hidden, phi_out,
                  acts, h, x, d_out):
    """Adjoint of mlp_forward; accumulates into grads, returns dL/dh."""
    ds = d_out
    for ell in range(n_layers - 1, -1, -1):
        phi = phi_out if ell == n_layers - 1 else phi_hidden
        dz = ds * dact_from_value(phi, acts[ell])
        if ell > 0:
            grads[f"{prefix}.w{ell}"] += dz.T @ acts[ell - 1]
            grads[f"{prefix}.b{ell}"] += dz.sum(axis=0)
            ds = dz @ params[f"{prefix}.w{ell}"]
        else:
            grads[f"{prefix}.w0"] += dz.T @ h
            grads[f"{prefix}.u"] += dz.T @ x
            grads[f"{prefix}.b0"] += dz.sum(axis=0)
            return dz @ params[f"{prefix}.w0"]
    raise AssertionError("unreachable")


def _backward_gated(params, spec, cache, dhn, grads):
    h, x, cf, f, cg, g, r = cache
    k = spec.dt / spec.tau
    dh = dhn.copy()
    if spec.gated:
        dr = k * g * dhn
        dg = k * r * dhn
        dh += _mlp_backward(params, grads, "g", spec.l_z, spec.phi_a,
                            "sigmoid", cg, h, x, dg)
    else:
        dr = k * dhn
    df = dr
    if spec.leak:
        dh -= dr
    if cf[0] == "vanilla":
        ph = cf[1]
        grads["f.w0"] += df.T @ ph
        grads["f.u"] += df.T @ x
        grads["f.b0"] += df.sum(axis=0)
        dh += (df @ params["f.w0"]) * dact_from_value(spec.phi_h, ph)
    else:
        dh += _mlp_backward(params, grads, "f", spec.l_h, spec.phi_a,
                            spec.phi_h, cf[1], h, x, df)
    return dh


def _backward_gru(params, spec, cache, dhn, grads):
    h, x, (r, z, c, rh) = cache
    k = spec.dt / spec.tau
    du = k * dhn
    dh = (1.0 - k) * dhn
    dz = du * (c - h)
    dc = du * z
    dh += du * (1.0 - z)
    dzc = dc * (1.0 - c * c)
    grads["gru.wc"] += dzc.T @ rh
    grads["gru.uc"] += dzc.T @ x
    grads["gru.bc"] += dzc.sum(axis=0)
    drh = dzc @ params["gru.wc"]
    dh += drh * r
    dr = drh * h
    dzz = dz * z * (1.0 - z)
    grads["gru.wz"] += dzz.T @ h
    grads["gru.uz"] += dzz.T @ x
    grads["gru.bz"] += dzz.sum(axis=0)
    dh += dzz @ params["gru.wz"]
    dzr = dr * r * (1.0 - r)
    grads["gru.wr"] += dzr.T @ h
    grads["gru.ur"] += dzr.T @ x
    grads["gru.br"] += dzr.sum(axis=0)
    dh += dzr @ params["gru.wr"]
    return dh


def _backward_lstm(params, spec, cache, dsn, grads):
    s, x, (h, c, gi, gf, go, gg, cn, tcn) = cache
    n = spec.n
    k = spec.dt / spec.tau
    dhn = k * dsn[:, :n]
    dh = (1.0 - k) * dsn[:, :n]
    dc = (1.0 - k) * dsn[:, n:]
    dgo = dhn * tcn
    dcn = k * dsn[:, n:] + dhn * go * (1.0 - tcn * tcn)
    dgf = dcn * c
    dc += dcn * gf
    dgi = dcn * gg
    dgg = dcn * gi
    for name, dgate, val, kind in (
        ("i", dgi, gi, "sigmoid"), ("f", dgf, gf, "sigmoid"),
        ("o", dgo, go, "sigmoid"), ("g", dgg, gg, "tanh"),
    ):
        dz = dgate * dact_from_value(kind, val)
        grads[f"lstm.w{name}"] += dz.T @ h
        grads[f"lstm.u{name}"] += dz.T @ x
        grads[f"lstm.b{name}"] += dz.sum(axis=0)
        dh += dz @ params[f"lstm.w{name}"]
    return np.concatenate([dh, dc], axis=1)


def _backward_lem(params, spec, cache, dsn, grads):
    h1, h2, x, g, c1, h1n, c2 = cache
    half = spec.n // 2
    k = spec.dt / spec.tau
    g1, g2 = g[:, :half], g[:, half:]
    dh1n = dsn[:, :half].copy()
    dh2n = dsn[:, half:]
    # second block: h2n = h2 + k g2 (c2 - h2); c2 reads the updated h1
    dg2 = k * dh2n * (c2 - h2)
    dc2 = k * g2 * dh2n
    dh2 = (1.0 - k * g2) * dh2n
    dz2 = dc2 * dact_from_value(spec.phi_h, c2)
    grads["lem.b"] += dz2.T @ h1n
    dh1n += dz2 @ params["lem.b"]
    # first block: h1n = h1 + k g1 (c1 - h1); c1 reads the old h2
    dg1 = k * dh1n * (c1 - h1)
    dc1 = k * g1 * dh1n
    dh1 = (1.0 - k * g1) * dh1n
    dz1 = dc1 * dact_from_value(spec.phi_h, c1)
    grads["lem.a"] += dz1.T @ h2
    dh2 += dz1 @ params["lem.a"]
    # shared input map feeds both candidate blocks
    dux = np.concatenate([dz1, dz2], axis=1)
    grads["f.u"] += dux.T @ x
    grads["f.b0"] += dux.sum(axis=0)
    # gate (both halves) reads the pre-update h1
    dg = np.concatenate([dg1, dg2], axis=1)
    dzg = dg * g * (1.0 - g)
    grads["g.w0"] += dzg.T @ h1
    grads["g.u"] += dzg.T @ x
    grads["g.b0"] += dzg.sum(axis=0)
    dh1 += dzg @ params["g.w0"]
    return np.concatenate([dh1, dh2], axis=1)


_BACKWARD = {
    "vanilla-rnn": _backward_gated,
    "node": _backward_gated,
    "gnode": _backward_gated,
    "mgru": _backward_gated,
    "gru": _backward_gru,
    "lstm": _backward_lstm,
    "lem": _backward_lem,
}


def bptt_grad(params, spec: ModelSpec, inputs, targets, loss_kind: str = "mse",
              h0=None, mask=None, substeps: int = 1, lambda_reg: float = 0.0):
    """Loss and exact gradients of the discrete unroll.

    Returns (loss_value, grads dict matching params). lambda_reg adds an
    activity penalty lambda_reg * mean(h^2) over post-step states, included
    in the returned loss value.
    """
    inputs = np.asarray(inputs, dtype=np.float64)
    states, outputs, caches = unroll(
        params, spec, inputs, h0=h0, substeps=substeps, want_cache=True)
    value, d_out = loss_and_grad(loss_kind, outputs, targets, mask)
    grads = {key: np.zeros_like(p) for key, p in params.items()}
    trials, bins, _ = inputs.shape

    # readout is applied to every post-bin state
    flat_dout = d_out.reshape(trials * bins, -1)
    flat_states = states[:, 1:].reshape(trials * bins, -1)
    grads["out.w"] += flat_dout.T @ flat_states
    grads["out.b"] += flat_dout.sum(axis=0)

    reg_scale = 0.0
    if lambda_reg:
        traj = states[:, 1:]
        value += lambda_reg * float(np.mean(traj * traj))
        reg_scale = 2.0 * lambda_reg / traj.size

    backward = _BACKWARD[spec.arch]
    dh = np.zeros((trials, spec.state_dim))
    step = len(caches)
    for t in range(bins - 1, -1, -1):
        dh += d_out[:, t, :] @ params["out.w"]
        if reg_scale:
            dh += reg_scale * states[:, t + 1]
        for _ in range(substeps):
            step -= 1
            dh = backward(params, spec, caches[step], dh, grads)
    if spec.h0_mode == "learned":
        grads["h0.a"] += dh.T @ inputs[:, 0, :]
        grads["h0.c"] += dh.sum(axis=0)
    return value, grads
