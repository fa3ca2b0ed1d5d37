"""Analytic Jacobians of the velocity field.

`jacobian` differentiates the full velocity (gate products, leak, 1/tau and
all) at a single state; `f_jacobian` is the input-to-output Jacobian of the
F net alone, the object whose spectral radius the mean-field initialization
theory pins at 1. Both share the relu'(0) = 0 convention with the forward
pass and BPTT.
"""

from __future__ import annotations

import numpy as np

from .forward import (
    _f_forward,
    _g_forward,
    _gru_parts,
    _lem_candidates,
    _lem_gate,
    _lstm_parts,
    _normalize,
    dact_from_value,
)
from .spec import ModelSpec

__all__ = ["jacobian", "f_jacobian"]


def _single(spec, h, x):
    h2, x2, _ = _normalize(spec, np.atleast_1d(h), x)
    if h2.shape[0] != 1:
        raise ValueError("jacobian expects a single state, not a batch")
    return h2, x2


def _mlp_jacobian(params, prefix, n_layers, phi_hidden, phi_out, acts, h_dim):
    """Chain product D_L W_{L-1} ... D_1 W_0 from cached activations."""
    w0 = params[f"{prefix}.w0"]
    d1 = dact_from_value(phi_out if n_layers == 1 else phi_hidden, acts[0][0])
    m = d1[:, None] * w0
    for ell in range(1, n_layers):
        w = params[f"{prefix}.w{ell}"]
        d = dact_from_value(phi_out if ell == n_layers - 1 else phi_hidden, acts[ell][0])
        m = (d[:, None] * w) @ m
    return m


def f_jacobian(params, spec: ModelSpec, h: np.ndarray, x: np.ndarray) -> np.ndarray:
    """dF/dh at (h, x) for architectures with an explicit F net."""
    h2, x2 = _single(spec, h, x)
    if spec.arch == "vanilla-rnn":
        ph = np.asarray(np.tanh(h2[0]) if spec.phi_h == "tanh" else h2[0])
        return params["f.w0"] * dact_from_value(spec.phi_h, ph)[None, :]
    if spec.arch in ("node", "gnode", "mgru"):
        _, (_, acts) = _f_forward(params, spec, h2, x2)
        return _mlp_jacobian(params, "f", spec.l_h, spec.phi_a, spec.phi_h, acts, spec.n)
    raise ValueError(f"{spec.arch} has no standalone F net")


def jacobian(params, spec: ModelSpec, h: np.ndarray, x: np.ndarray) -> np.ndarray:
    """d(velocity)/dh at a single state, shape (state_dim, state_dim)."""
    h2, x2 = _single(spec, h, x)
    inv_tau = 1.0 / spec.tau
    n = spec.n

    if spec.arch in ("vanilla-rnn", "node", "gnode", "mgru"):
        f, _ = _f_forward(params, spec, h2, x2)
        jf = f_jacobian(params, spec, h2[0], x2)
        eye = np.eye(n)
        if spec.leak:
            r = (f - h2)[0]
            core = jf - eye
        else:
            r = f[0]
            core = jf
        if not spec.gated:
            return inv_tau * core
        g, (gacts) = _g_forward(params, spec, h2, x2)
        jg = _mlp_jacobian(params, "g", spec.l_z, spec.phi_a, "sigmoid", gacts, n)
        return inv_tau * (jg * r[:, None] + g[0][:, None] * core)

    if spec.arch == "gru":
        _, (r, z, c, _) = _gru_parts(params, h2, x2)
        r, z, c = r[0], z[0], c[0]
        hv = h2[0]
        wr, wz, wc = params["gru.wr"], params["gru.wz"], params["gru.wc"]
        m_rh = np.diag(r) + (hv * r * (1.0 - r))[:, None] * wr
        dc = (1.0 - c * c)[:, None] * (wc @ m_rh)
        du = np.diag(1.0 - z) + (z * (1.0 - z) * (c - hv))[:, None] * wz + z[:, None] * dc
        return inv_tau * (du - np.eye(n))

    if spec.arch == "lstm":
        _, (hv, cv, gi, gf, go, gg, cn, tcn) = _lstm_parts(params, h2, x2)
        hv, cv = hv[0], cv[0]
        gi, gf, go, gg, cn, tcn = gi[0], gf[0], go[0], gg[0], cn[0], tcn[0]
        wi, wf, wo, wg = (params[f"lstm.w{k}"] for k in ("i", "f", "o", "g"))
        dcn_dh = (
            (gf * (1.0 - gf) * cv)[:, None] * wf
            + (gi * (1.0 - gi) * gg)[:, None] * wi
            + (gi * (1.0 - gg * gg))[:, None] * wg
        )
        s_cn = go * (1.0 - tcn * tcn)
        dhn_dh = (go * (1.0 - go) * tcn)[:, None] * wo + s_cn[:, None] * dcn_dh
        dhn_dc = np.diag(s_cn * gf)
        du = np.block([[dhn_dh, dhn_dc], [dcn_dh, np.diag(gf)]])
        return inv_tau * (du - np.eye(2 * n))

    if spec.arch == "lem":
        half = n // 2
        h1, h2b = h2[:, :half], h2[:, half:]
        g = _lem_gate(params, spec, h1, x2)[0]
        c1, c2 = (c[0] for c in _lem_candidates(params, spec, h2[:, :half], h2b, x2))
        r = np.concatenate([c1, c2]) - h2[0]
        wg = params["g.w0"]
        gd = g * (1.0 - g)
        d1 = dact_from_value(spec.phi_h, c1)
        d2 = dact_from_value(spec.phi_h, c2)
        j = np.zeros((n, n))
        j[:, :half] += (gd * r)[:, None] * wg
        j[:half, :half] -= np.diag(g[:half])
        j[:half, half:] += g[:half, None] * (d1[:, None] * params["lem.a"])
        j[half:, :half] += g[half:, None] * (d2[:, None] * params["lem.b"])
        j[half:, half:] -= np.diag(g[half:])
        return inv_tau * j

    raise ValueError(f"unknown architecture {spec.arch!r}")
