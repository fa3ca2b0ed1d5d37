"""AdamW with decoupled weight decay over named parameter dicts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["OptimState", "adamw_init", "adamw_step"]


@dataclass
class OptimState:
    """Adam moments plus hyperparameters. m and v mirror the param dict."""

    m: dict
    v: dict
    step: int
    eta: float
    lambda_w: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def adamw_init(params: dict, eta: float, lambda_w: float, **kw) -> OptimState:
    return OptimState(
        m={k: np.zeros_like(p) for k, p in params.items()},
        v={k: np.zeros_like(p) for k, p in params.items()},
        step=0, eta=eta, lambda_w=lambda_w, **kw,
    )


def adamw_step(params: dict, grads: dict, state: OptimState):
    """One update: p <- p - eta * (m_hat / (sqrt(v_hat) + eps) + lambda_w p).

    Decay is decoupled (applied to p directly, not through the moments), so
    k zero-gradient steps scale every parameter by (1 - eta*lambda_w)^k
    exactly. Keys are visited in sorted order; updates are pure (fresh
    arrays), leaving the inputs untouched.
    """
    if set(grads) != set(params):
        raise KeyError("grads and params must share keys")
    t = state.step + 1
    bc1 = 1.0 - state.beta1**t
    bc2 = 1.0 - state.beta2**t
    new_p, new_m, new_v = {}, {}, {}
    for key in sorted(params):
        g = grads[key]
        m = state.beta1 * state.m[key] + (1.0 - state.beta1) * g
        v = state.beta2 * state.v[key] + (1.0 - state.beta2) * (g * g)
        m_hat = m / bc1
        v_hat = v / bc2
        p = params[key]
        new_p[key] = p - state.eta * (m_hat / (np.sqrt(v_hat) + state.eps)
                                      + state.lambda_w * p)
        new_m[key] = m
        new_v[key] = v
    next_state = OptimState(
        m=new_m, v=new_v, step=t, eta=state.eta, lambda_w=state.lambda_w,
        beta1=state.beta1, beta2=state.beta2, eps=state.eps,
    )
    return new_p, next_state
