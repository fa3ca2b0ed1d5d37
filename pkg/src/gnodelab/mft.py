"""Mean-field kernel recursions and critical initializations.

Equal-time theory for wide fully connected F nets inside a leaky recurrent
loop. The layer-ell kernel K^ell is the variance of pre-activations, the
susceptibility chi_ell tracks how squared perturbations propagate, and the
squared spectral radius of the input-output Jacobian at a self-consistent
state equals chi_L. Aspect ratios follow the symmetric convention
(alpha, beta, ..., beta, alpha): Glorot uses alpha = H/N and beta = 1,
Kaiming sets both to zero, and a single square layer under Glorot has
aspect 1.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConvergenceError
from .quadrature import gauss_expect

__all__ = [
    "MftConfig",
    "KernelState",
    "kernel_forward",
    "product_radius_sq",
    "fixed_point_c_h",
    "relu_fixed_point",
    "relu_c_phi_pair",
    "critical_sigma",
    "tanh_critical_curve",
    "write_curve_csv",
]


@dataclass(frozen=True)
class MftConfig:
    """Ensemble description for the kernel recursion.

    depth is the number of affine layers L in F; sigma_w, sigma_b, sigma_u
    are the weight/bias/input scales; c_x the input autocorrelation fed into
    layer 1; activation is the hidden nonlinearity (the output layer is
    linear); scaling picks the fan rule, with alpha = H/N only used by
    glorot.
    """

    depth: int
    sigma_w: float
    sigma_b: float = 0.0
    sigma_u: float = 0.0
    c_x: float = 0.0
    activation: str = "relu"
    scaling: str = "kaiming"
    alpha: float = 0.0

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError(f"depth must be >= 1, got {self.depth}")
        if min(self.sigma_w, self.sigma_b, self.sigma_u) < 0 or self.c_x < 0:
            raise ValueError("scales and c_x must be non-negative")
        if self.scaling == "glorot" and self.alpha <= 0:
            raise ValueError("glorot scaling needs a positive aspect ratio")
        if self.activation not in ("relu", "tanh"):
            raise ValueError(f"activation must be relu or tanh, got {self.activation!r}")
        if self.scaling not in ("kaiming", "glorot"):
            raise ValueError(f"scaling must be kaiming or glorot, got {self.scaling!r}")

    @property
    def aspects(self) -> np.ndarray:
        """Per-layer aspect ratios (alpha, beta, ..., beta, alpha)."""
        if self.scaling == "kaiming":
            return np.zeros(self.depth)
        if self.depth == 1:
            return np.ones(1)
        a = np.ones(self.depth)
        a[0] = self.alpha
        a[-1] = self.alpha
        return a


@dataclass(frozen=True)
class KernelState:
    kernels: np.ndarray  # K^1 .. K^L
    chis: np.ndarray     # chi_1 .. chi_L
    c_h: float           # state autocorrelation the recursion started from

    @property
    def c_f(self) -> float:
        """Output kernel: the last-layer value, which equals the state
        autocorrelation at self-consistency."""
        return float(self.kernels[-1])

    @property
    def radius_sq(self) -> float:
        """rho(J)^2 at this state: the depth-L susceptibility."""
        return float(self.chis[-1])


def _c_phi(activation: str, k: float) -> float:
    if activation == "relu":
        return 0.5 * k
    return gauss_expect(np.tanh, k)


def _c_dphi(activation: str, k: float) -> float:
    if activation == "relu":
        return 0.5
    return gauss_expect(lambda z: 1.0 - np.tanh(z) ** 2, k)


def kernel_forward(cfg: MftConfig, c_h: float) -> KernelState:
    """Run the kernel and susceptibility recursions from state variance c_h.

    K^1 = sigma_w^2/(1+a_1) c_h + sigma_u^2 c_x + sigma_b^2, deeper layers
    K^(l+1) = sigma_w^2/(1+a_(l+1)) C_phi(K^l) + sigma_b^2, and
    chi_(l+1) = sigma_w^2/(1+a_(l+1)) C_phi'(K^l) chi_l with
    chi_1 = sigma_w^2/(1+a_1).
    """
    if c_h < 0:
        raise ValueError(f"c_h must be non-negative, got {c_h}")
    a = cfg.aspects
    sw2 = cfg.sigma_w**2
    kern = np.zeros(cfg.depth)
    chi = np.zeros(cfg.depth)
    kern[0] = sw2 / (1.0 + a[0]) * c_h + cfg.sigma_u**2 * cfg.c_x + cfg.sigma_b**2
    chi[0] = sw2 / (1.0 + a[0])
    for ell in range(1, cfg.depth):
        scale = sw2 / (1.0 + a[ell])
        kern[ell] = scale * _c_phi(cfg.activation, kern[ell - 1]) + cfg.sigma_b**2
        chi[ell] = scale * _c_dphi(cfg.activation, kern[ell - 1]) * chi[ell - 1]
    return KernelState(kernels=kern, chis=chi, c_h=float(c_h))


def product_radius_sq(cfg: MftConfig, c_h: float) -> float:
    """rho(J)^2 via the explicit product form (independent of the chi
    recursion): sigma_w^(2L) prod_l 1/(1+a_l) prod_{l<L} C_phi'(K^l)."""
    state = kernel_forward(cfg, c_h)
    a = cfg.aspects
    out = cfg.sigma_w ** (2 * cfg.depth) * float(np.prod(1.0 / (1.0 + a)))
    for ell in range(cfg.depth - 1):
        out *= _c_dphi(cfg.activation, float(state.kernels[ell]))
    return out


def _k_last(cfg: MftConfig, c_h: float) -> float:
    return kernel_forward(cfg, c_h).c_f


def fixed_point_c_h(
    cfg: MftConfig,
    tol: float = 1e-10,
    max_iter: int = 1_000_000,
    damping: float = 0.5,
    method: str = "iterate",
) -> float:
    """Self-consistent state variance C_h = K^L(C_h).

    method="iterate" is damped fixed-point iteration (the default contract);
    method="bisect" solves K^L(C) - C = 0 by bracketing, which stays fast
    arbitrarily close to criticality and picks the largest root (the one the
    iteration converges to from above). tanh configs always admit a root
    because K^L is bounded.
    """
    if method == "bisect":
        hi = cfg.sigma_w**2 + cfg.sigma_b**2 + cfg.sigma_u**2 * cfg.c_x + 1.0
        while _k_last(cfg, hi) > hi:
            hi *= 2.0
            if hi > 1e12:
                raise ConvergenceError("no upper bracket for the kernel fixed point")
        lo = 1e-12
        if _k_last(cfg, lo) <= lo:
            return 0.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if _k_last(cfg, mid) > mid:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-14 * max(1.0, hi):
                break
        return 0.5 * (lo + hi)

    c = 1.0
    for _ in range(max_iter):
        nxt = (1.0 - damping) * c + damping * _k_last(cfg, c)
        if abs(nxt - c) < tol:
            return nxt
        c = nxt
    raise ConvergenceError(
        f"kernel fixed point did not converge within {max_iter} iterations"
    )


def relu_fixed_point(cfg: MftConfig) -> tuple[float, bool, float]:
    """Closed-form relu self-consistent variance.

    Returns (c_h, exists, radius_sq) with radius_sq = 2 a1^2 a2^(L-2), the
    squared Jacobian spectral radius at the fixed point; exists is the
    condition radius_sq < 1. The layer-1 kernel includes the bias variance,
    matching kernel_forward exactly.
    """
    if cfg.activation != "relu":
        raise ValueError("relu_fixed_point requires activation='relu'")
    alpha = float(cfg.aspects[0])
    beta = 1.0 if cfg.scaling == "glorot" else 0.0  # interior-layer aspect
    sw2, b = cfg.sigma_w**2, cfg.sigma_b**2
    ux = cfg.sigma_u**2 * cfg.c_x
    a1 = sw2 / (2.0 * (1.0 + alpha))
    if cfg.depth == 1:
        radius_sq = 2.0 * a1
        exists = radius_sq < 1.0
        c_h = (ux + b) / (1.0 - radius_sq) if exists else float("inf")
        return c_h, exists, radius_sq
    a2 = sw2 / (2.0 * (1.0 + beta))
    pow_a2 = a2 ** (cfg.depth - 2)
    geo = float(cfg.depth - 2) if a2 == 1.0 else (1.0 - pow_a2) / (1.0 - a2)
    radius_sq = 2.0 * a1**2 * pow_a2
    exists = radius_sq < 1.0
    if not exists:
        return float("inf"), False, radius_sq
    c_h = (a1 * pow_a2 * (ux + b) + a1 * geo * b + b) / (1.0 - radius_sq)
    return c_h, True, radius_sq


def relu_c_phi_pair(k0: float, ktau: float) -> tuple[float, float]:
    """Two-time relu correlators (C_phi, C_phi') for equal variances k0 and
    cross-covariance ktau, |ktau| <= k0.

    C_phi = E[phi(x)phi(y)], C_phi' = E[phi'(x)phi'(y)]. The equal-time
    limits are k0/2 and 1/2; independent variables give k0/(2 pi) and 1/4.
    """
    if k0 < 0 or abs(ktau) > k0:
        raise ValueError(f"need |ktau| <= k0 and k0 >= 0, got k0={k0} ktau={ktau}")
    if k0 == 0.0:
        return 0.0, 0.25
    disc = k0 * k0 - ktau * ktau
    if disc <= 0.0:
        # equal-time (or perfectly anticorrelated) limit
        ang = np.pi / 2.0 if ktau > 0 else -np.pi / 2.0
        root = 0.0
    else:
        root = float(np.sqrt(disc))
        ang = float(np.arctan(ktau / root))
    c_phi = 0.25 * ktau * (1.0 + 2.0 / np.pi * ang) + root / (2.0 * np.pi)
    c_dphi = 0.25 * (1.0 + 2.0 / np.pi * ang)
    return float(c_phi), float(c_dphi)


def critical_sigma(scaling: str, depth: int, alpha: float = 0.0) -> float:
    """Critical weight scale sigma_w* for relu hidden layers.

    General form (1+alpha)^(1/L) sqrt(2^(1-1/L) (1+beta)^(1-2/L)) with
    beta = 1 for glorot and 0 for kaiming; kaiming reduces to
    sqrt(2^(1-1/L)) and glorot to 2^(1-3/(2L)) (1+alpha)^(1/L).
    """
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    if scaling == "kaiming":
        if alpha not in (0, 0.0):
            raise ValueError("kaiming scaling has alpha = 0")
        return float(np.sqrt(2.0 ** (1.0 - 1.0 / depth)))
    if scaling == "glorot":
        if alpha < 0:
            raise ValueError("alpha must be non-negative")
        return float(2.0 ** (1.0 - 3.0 / (2.0 * depth)) * (1.0 + alpha) ** (1.0 / depth))
    raise ValueError(f"scaling must be kaiming or glorot, got {scaling!r}")


def tanh_critical_curve(
    sigma_b_grid,
    depth: int,
    scaling: str = "kaiming",
    alpha: float = 0.0,
    bracket: tuple[float, float] = (0.05, 8.0),
    tol: float = 1e-6,
) -> np.ndarray:
    """sigma_w*(sigma_b) where the depth-L susceptibility at the
    self-consistent state variance crosses 1 (edge of chaos, tanh hidden
    layers, no external input).

    At sigma_b = 0 the state fixed point sits at 0, so the susceptibility is
    evaluated directly there (the classic sigma_w* = 1 under kaiming for any
    depth, since tanh'(0) = 1); elsewhere the self-consistent variance comes
    from the damped iteration. Depth 1 has no hidden derivative factors, so
    its susceptibility never depends on the state variance. Raises if the
    bracket does not straddle the crossing for some grid point.
    """

    def chi_at_fp(sigma_w: float, sigma_b: float) -> float:
        cfg = MftConfig(
            depth=depth, sigma_w=sigma_w, sigma_b=sigma_b,
            activation="tanh", scaling=scaling, alpha=alpha,
        )
        if sigma_b == 0.0 or depth == 1:
            return kernel_forward(cfg, 0.0).radius_sq
        c_star = fixed_point_c_h(cfg)
        return kernel_forward(cfg, c_star).radius_sq

    out = np.zeros(len(sigma_b_grid))
    for i, sb in enumerate(sigma_b_grid):
        lo, hi = bracket
        if chi_at_fp(lo, sb) >= 1.0 or chi_at_fp(hi, sb) <= 1.0:
            raise ValueError(
                f"bracket {bracket} does not straddle the critical point at sigma_b={sb}"
            )
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if chi_at_fp(mid, sb) < 1.0:
                lo = mid
            else:
                hi = mid
        out[i] = 0.5 * (lo + hi)
    return out


def write_curve_csv(path, sigma_b_grid, sigma_w_star, depth: int) -> None:
    """CSV rows (sigma_b, sigma_w_star, L) for downstream plotting."""
    with open(path, "w", newline="") as fh:
        fh.write("sigma_b,sigma_w_star,L\n")
        for sb, sw in zip(sigma_b_grid, sigma_w_star):
            fh.write(f"{float(sb)!r},{float(sw)!r},{depth}\n")
