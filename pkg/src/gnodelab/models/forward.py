"""Velocity fields and Euler steps.

All public entry points accept a single state (S,) or a batch (B, S) and
return matching shapes. Internals are strictly batched. Step caches hold
post-activation values only: every activation in the family (relu, tanh,
sigmoid, identity) has a derivative recoverable from its output, with the
relu subgradient at 0 fixed to 0 everywhere.
"""

from __future__ import annotations

import numpy as np

from .spec import ModelSpec

__all__ = ["velocity", "cell_step", "step_forward", "gate_values", "readout"]


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _act(name: str, z: np.ndarray) -> np.ndarray:
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "tanh":
        return np.tanh(z)
    if name == "identity":
        return z
    if name == "sigmoid":
        return _sigmoid(z)
    raise ValueError(f"unknown activation {name!r}")


def dact_from_value(name: str, s: np.ndarray) -> np.ndarray:
    """Activation derivative recovered from the activation value."""
    if name == "relu":
        return (s > 0).astype(np.float64)
    if name == "tanh":
        return 1.0 - s * s
    if name == "identity":
        return np.ones_like(s)
    if name == "sigmoid":
        return s * (1.0 - s)
    raise ValueError(f"unknown activation {name!r}")


def mlp_forward(params, prefix: str, n_layers: int, phi_hidden: str, phi_out: str,
                h: np.ndarray, x: np.ndarray):
    """Fully connected net: layer 0 mixes h and x, deeper layers are plain.

    Returns (output, activations) where activations is the list of
    post-activation values per layer (the last entry is the output).
    """
    z = h @ params[f"{prefix}.w0"].T + x @ params[f"{prefix}.u"].T + params[f"{prefix}.b0"]
    s = _act(phi_out if n_layers == 1 else phi_hidden, z)
    acts = [s]
    for ell in range(1, n_layers):
        z = s @ params[f"{prefix}.w{ell}"].T + params[f"{prefix}.b{ell}"]
        s = _act(phi_out if ell == n_layers - 1 else phi_hidden, z)
        acts.append(s)
    return s, acts


def _f_forward(params, spec: ModelSpec, h, x):
    """F(h, x) with cache for the architectures that own an F net."""
    if spec.arch == "vanilla-rnn":
        # Footnote form: activation on the state, affine outside.
        ph = _act(spec.phi_h, h)
        f = ph @ params["f.w0"].T + x @ params["f.u"].T + params["f.b0"]
        return f, ("vanilla", ph)
    out, acts = mlp_forward(params, "f", spec.l_h, spec.phi_a, spec.phi_h, h, x)
    return out, ("mlp", acts)


def _g_forward(params, spec: ModelSpec, h, x):
    out, acts = mlp_forward(params, "g", spec.l_z, spec.phi_a, "sigmoid", h, x)
    return out, acts


def _gru_parts(params, h, x):
    r = _sigmoid(h @ params["gru.wr"].T + x @ params["gru.ur"].T + params["gru.br"])
    z = _sigmoid(h @ params["gru.wz"].T + x @ params["gru.uz"].T + params["gru.bz"])
    rh = r * h
    c = np.tanh(rh @ params["gru.wc"].T + x @ params["gru.uc"].T + params["gru.bc"])
    u = (1.0 - z) * h + z * c
    return u, (r, z, c, rh)


def _lstm_parts(params, s, x):
    n = s.shape[1] // 2
    h, c = s[:, :n], s[:, n:]
    gi = _sigmoid(h @ params["lstm.wi"].T + x @ params["lstm.ui"].T + params["lstm.bi"])
    gf = _sigmoid(h @ params["lstm.wf"].T + x @ params["lstm.uf"].T + params["lstm.bf"])
    go = _sigmoid(h @ params["lstm.wo"].T + x @ params["lstm.uo"].T + params["lstm.bo"])
    gg = np.tanh(h @ params["lstm.wg"].T + x @ params["lstm.ug"].T + params["lstm.bg"])
    cn = gf * c + gi * gg
    tcn = np.tanh(cn)
    hn = go * tcn
    u = np.concatenate([hn, cn], axis=1)
    return u, (h, c, gi, gf, go, gg, cn, tcn)


def _lem_gate(params, spec, h1, x):
    zg = h1 @ params["g.w0"].T + x @ params["g.u"].T + params["g.b0"]
    return _sigmoid(zg)


def _lem_candidates(params, spec, h1, h2, x):
    half = spec.n // 2
    ux = x @ params["f.u"].T + params["f.b0"]
    c1 = _act(spec.phi_h, h2 @ params["lem.a"].T + ux[:, :half])
    c2 = _act(spec.phi_h, h1 @ params["lem.b"].T + ux[:, half:])
    return c1, c2


def velocity(params, spec: ModelSpec, h: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Continuous-time dh/dt at (h, x), including the 1/tau factor.

    For the gated family this is G(h,x) * (-h + F(h,x)) / tau; the gate is
    identically one for vanilla-rnn and node, and node keeps the leak unless
    the spec disables it. GRU and LSTM embed their discrete cell u as
    (u(h,x) - h) / tau. LEM's velocity is the constrained-mGRU field (the
    forward-backward split only exists in the discrete step).
    """
    h2, x2, squeeze = _normalize(spec, h, x)
    v = _velocity_b(params, spec, h2, x2)
    return v[0] if squeeze else v


def _normalize(spec, h, x):
    h2 = np.atleast_2d(np.asarray(h, dtype=np.float64))
    x2 = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x2.shape[0] == 1 and h2.shape[0] > 1:
        x2 = np.broadcast_to(x2, (h2.shape[0], x2.shape[1]))
    if h2.shape[1] != spec.state_dim:
        raise ValueError(f"state has dim {h2.shape[1]}, spec wants {spec.state_dim}")
    if x2.shape[1] != spec.d:
        raise ValueError(f"input has dim {x2.shape[1]}, spec wants {spec.d}")
    return h2, x2, np.asarray(h).ndim == 1


def _velocity_b(params, spec, h, x):
    inv_tau = 1.0 / spec.tau
    if spec.arch in ("vanilla-rnn", "node", "gnode", "mgru"):
        f, _ = _f_forward(params, spec, h, x)
        r = f - h if spec.leak else f
        if spec.gated:
            g, _ = _g_forward(params, spec, h, x)
            return inv_tau * g * r
        return inv_tau * r
    if spec.arch == "gru":
        u, _ = _gru_parts(params, h, x)
        return inv_tau * (u - h)
    if spec.arch == "lstm":
        u, _ = _lstm_parts(params, h, x)
        return inv_tau * (u - h)
    if spec.arch == "lem":
        half = spec.n // 2
        h1, h2 = h[:, :half], h[:, half:]
        g = _lem_gate(params, spec, h1, x)
        c1, c2 = _lem_candidates(params, spec, h1, h2, x)
        return inv_tau * g * (np.concatenate([c1, c2], axis=1) - h)
    raise ValueError(f"unknown architecture {spec.arch!r}")


def step_forward(params, spec: ModelSpec, h: np.ndarray, x: np.ndarray,
                 want_cache: bool = False):
    """One forward-Euler step h -> h' (batched, 2-D in and out).

    h' = h + (dt/tau) * tau * velocity for every architecture except LEM,
    which steps its first state block, then the second block using the
    already-updated first (forward-backward split). Returns (h', cache);
    cache is None unless requested.
    """
    k = spec.dt / spec.tau
    if spec.arch in ("vanilla-rnn", "node", "gnode", "mgru"):
        f, cf = _f_forward(params, spec, h, x)
        r = f - h if spec.leak else f
        if spec.gated:
            g, cg = _g_forward(params, spec, h, x)
            hn = h + k * g * r
            return hn, ((h, x, cf, f, cg, g, r) if want_cache else None)
        hn = h + k * r
        return hn, ((h, x, cf, f, None, None, r) if want_cache else None)
    if spec.arch == "gru":
        u, parts = _gru_parts(params, h, x)
        hn = h + k * (u - h)
        return hn, ((h, x, parts) if want_cache else None)
    if spec.arch == "lstm":
        u, parts = _lstm_parts(params, h, x)
        hn = h + k * (u - h)
        return hn, ((h, x, parts) if want_cache else None)
    if spec.arch == "lem":
        half = spec.n // 2
        h1, h2 = h[:, :half], h[:, half:]
        g = _lem_gate(params, spec, h1, x)
        g1, g2 = g[:, :half], g[:, half:]
        ux = x @ params["f.u"].T + params["f.b0"]
        c1 = _act(spec.phi_h, h2 @ params["lem.a"].T + ux[:, :half])
        h1n = h1 + k * g1 * (c1 - h1)
        c2 = _act(spec.phi_h, h1n @ params["lem.b"].T + ux[:, half:])
        h2n = h2 + k * g2 * (c2 - h2)
        hn = np.concatenate([h1n, h2n], axis=1)
        return hn, ((h1, h2, x, g, c1, h1n, c2) if want_cache else None)
    raise ValueError(f"unknown architecture {spec.arch!r}")


def cell_step(params, spec: ModelSpec, h: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Public single-step map; shape-preserving like velocity."""
    h2, x2, squeeze = _normalize(spec, h, x)
    hn, _ = step_forward(params, spec, h2, x2)
    return hn[0] if squeeze else hn


def gate_values(params, spec: ModelSpec, h: np.ndarray, x: np.ndarray) -> np.ndarray:
    """G(h, x) for gated architectures; all-ones for the ungated ones."""
    h2, x2, squeeze = _normalize(spec, h, x)
    if spec.arch in ("gnode", "mgru"):
        g, _ = _g_forward(params, spec, h2, x2)
    elif spec.arch == "lem":
        g = _lem_gate(params, spec, h2[:, : spec.n // 2], x2)
    else:
        g = np.ones_like(h2)
    return g[0] if squeeze else g


def readout(params, h: np.ndarray) -> np.ndarray:
    """Affine readout y = W h + b applied along the last axis."""
    return h @ params["out.w"].T + params["out.b"]
