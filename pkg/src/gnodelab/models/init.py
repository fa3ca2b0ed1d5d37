"""Parameter allocation and random initialization.

Parameters are a flat dict of named float64 arrays; the key set is fixed by
(arch, depths, widths) and doubles as the checkpoint tensor naming. Keys are
always drawn in sorted order from a single generator, so two specs with the
same key set and shapes initialize bit-identically from the same stream
(in particular a gnode with l_h = l_z = 1 matches the mgru path exactly).
"""

from __future__ import annotations

import numpy as np

from ..errors import DimensionError
from .spec import InitScheme, ModelSpec

__all__ = ["param_shapes", "init_params", "critical_sigma_for"]

_SQRT2 = float(np.sqrt(2.0))


def param_shapes(spec: ModelSpec) -> dict[str, tuple[int, ...]]:
    """The full named-parameter layout for a spec."""
    n, d, s = spec.n, spec.d, spec.state_dim
    shapes: dict[str, tuple[int, ...]] = {}

    if spec.arch in ("node", "gnode", "mgru"):
        w = spec.f_widths
        for ell in range(spec.l_h):
            shapes[f"f.w{ell}"] = (w[ell + 1], w[ell])
            shapes[f"f.b{ell}"] = (w[ell + 1],)
        shapes["f.u"] = (w[1], d)
    elif spec.arch == "vanilla-rnn":
        shapes["f.w0"] = (n, n)
        shapes["f.b0"] = (n,)
        shapes["f.u"] = (n, d)
    elif spec.arch == "lem":
        half = n // 2
        shapes["lem.a"] = (half, half)
        shapes["lem.b"] = (half, half)
        shapes["f.b0"] = (n,)
        shapes["f.u"] = (n, d)
    elif spec.arch == "gru":
        for gate in ("r", "z", "c"):
            shapes[f"gru.w{gate}"] = (n, n)
            shapes[f"gru.u{gate}"] = (n, d)
            shapes[f"gru.b{gate}"] = (n,)
    elif spec.arch == "lstm":
        for gate in ("i", "f", "o", "g"):
            shapes[f"lstm.w{gate}"] = (n, n)
            shapes[f"lstm.u{gate}"] = (n, d)
            shapes[f"lstm.b{gate}"] = (n,)

    if spec.arch in ("gnode", "mgru"):
        gw = spec.g_widths
        for ell in range(spec.l_z):
            shapes[f"g.w{ell}"] = (gw[ell + 1], gw[ell])
            shapes[f"g.b{ell}"] = (gw[ell + 1],)
        shapes["g.u"] = (gw[1], d)
    elif spec.arch == "lem":
        shapes["g.w0"] = (n, n // 2)
        shapes["g.b0"] = (n,)
        shapes["g.u"] = (n, d)

    shapes["out.w"] = (spec.out_dim, s)
    shapes["out.b"] = (spec.out_dim,)
    if spec.h0_mode == "learned":
        shapes["h0.a"] = (s, d)
        shapes["h0.c"] = (s,)
    return shapes


def critical_sigma_for(scheme: InitScheme, spec: ModelSpec) -> float:
    """Critical sigma_w for the spec's F depth under the scheme's fan rule."""
    from ..mft import critical_sigma  # local import to avoid a cycle

    depth = spec.l_h
    alpha = 0.0
    if scheme.scaling == "glorot":
        alpha = (spec.hidden / spec.n) if depth >= 2 else 1.0
    return critical_sigma(scheme.scaling, depth, alpha)


def _fan_family(scheme: InitScheme) -> str:
    if scheme.kind == "glorot-normal":
        return "glorot"
    if scheme.kind == "kaiming-normal":
        return "kaiming"
    return scheme.scaling  # critical follows its stated fan rule


def _weight_std(family: str, sigma: float, fan_in: int, fan_out: int) -> float:
    if family == "glorot":
        return sigma / np.sqrt(fan_in + fan_out)
    return sigma / np.sqrt(fan_in)


def init_params(
    spec: ModelSpec, scheme: InitScheme, rng: np.random.Generator
) -> dict[str, np.ndarray]:
    """Draw a fresh parameter dict for spec under scheme.

    The critical scheme only makes sense for the mean-field setup it was
    derived in: phi_a must be relu and phi_h tanh, otherwise this raises.
    """
    if scheme.kind == "critical":
        if spec.phi_a != "relu":
            raise ValueError(
                f"critical init requires phi_a='relu', spec has {spec.phi_a!r}"
            )
        if spec.phi_h != "tanh":
            raise ValueError(
                f"critical init requires phi_h='tanh', spec has {spec.phi_h!r}"
            )
        sigma_w = critical_sigma_for(scheme, spec)
    else:
        sigma_w = scheme.sigma_w if scheme.sigma_w is not None else _SQRT2
    if scheme.sigma_z is not None:
        sigma_z = scheme.sigma_z
    else:
        sigma_z = _SQRT2 if scheme.kind == "critical" else sigma_w

    family = _fan_family(scheme)
    shapes = param_shapes(spec)
    n, d = spec.n, spec.d
    params: dict[str, np.ndarray] = {}
    for key in sorted(shapes):
        shape = shapes[key]
        if key.startswith("f.b") or key.startswith("g.b") or key.endswith(("br", "bz", "bc", "bi", "bf", "bo", "bg")):
            std = scheme.sigma_b
        elif key in ("f.u", "g.u") or ".u" in key:
            std = scheme.sigma_u / np.sqrt(d) if d > 0 else 0.0
        elif key.startswith("f.w"):
            ell = int(key[3:])
            w = spec.f_widths if spec.arch != "vanilla-rnn" else [n, n]
            std = _weight_std(family, sigma_w, w[ell], w[ell + 1])
        elif key.startswith("g.w"):
            if spec.arch == "lem":
                std = _weight_std(family, sigma_z, n, n)
            else:
                ell = int(key[3:])
                gw = spec.g_widths
                std = _weight_std(family, sigma_z, gw[ell], gw[ell + 1])
        elif key in ("lem.a", "lem.b"):
            # Nonzero blocks of the constrained full matrix keep the full-layer fan.
            std = _weight_std(family, sigma_w, n, n)
        elif key.startswith(("gru.w", "lstm.w")):
            std = _weight_std(family, sigma_w, n, n)
        elif key == "out.w":
            std = _SQRT2 / np.sqrt(spec.state_dim + spec.out_dim)
        elif key == "out.b":
            std = 0.0
        elif key == "h0.a":
            std = _SQRT2 / np.sqrt(spec.state_dim + d) if d > 0 else 0.0
        elif key == "h0.c":
            std = 0.0
        else:  # pragma: no cover - exhaustiveness guard
            raise KeyError(f"no init rule for parameter {key}")
        if std == 0.0:
            params[key] = np.zeros(shape)
        else:
            params[key] = rng.normal(0.0, std, size=shape)
    return params


def check_params(spec: ModelSpec, params: dict[str, np.ndarray]) -> None:
    """Validate that params matches the spec's layout exactly."""
    shapes = param_shapes(spec)
    missing = sorted(set(shapes) - set(params))
    extra = sorted(set(params) - set(shapes))
    if missing or extra:
        raise DimensionError(f"parameter keys mismatch: missing={missing} extra={extra}")
    for key, shape in shapes.items():
        got = np.shape(params[key])
        if tuple(got) != tuple(shape):
            raise DimensionError(f"{key}: expected shape {shape}, got {got}")
