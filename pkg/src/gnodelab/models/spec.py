"""Model specifications for the gated-ODE architecture family.

The family is built around

    tau * dh/dt = G(h, x) * (-h + F(h, x))

where F and G are fully connected nets. Architectures are special cases:
vanilla-rnn and nODE drop the gate, mGRU restricts both nets to one layer,
GRU and LSTM embed the textbook discrete cells as tau*dh = u(h,x) - h, and
LEM is a block-constrained mGRU stepped with a forward-backward split.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

from ..errors import DimensionError

__all__ = ["ARCHS", "ModelSpec", "InitScheme"]

ARCHS = ("vanilla-rnn", "node", "gnode", "mgru", "gru", "lstm", "lem")

_GATED = {"gnode", "mgru", "lem"}
_MLP_F = {"node", "gnode", "mgru"}


@dataclass(frozen=True)
class ModelSpec:
    """Static architecture description.

    n is the phase-space dimension of h (an LSTM carries [h; c], so its full
    state is 2n). l_h and l_z are the depths of F and G; hidden layers all
    have width `hidden` (`hidden_z` for the gate net). phi_a is the hidden
    activation, phi_h the final activation of F. dt must not exceed tau so
    the forward Euler step h + (dt/tau) * (...) stays a proper discretization.
    """

    arch: str
    n: int
    d: int
    out_dim: int
    l_h: int = 1
    l_z: int = 1
    hidden: int = 0
    hidden_z: int = 0
    phi_a: str = "tanh"
    phi_h: str = "tanh"
    tau: float = 1.0
    dt: float = 1.0
    h0_mode: str = "zeros"
    leak: bool = True

    def __post_init__(self):
        if self.arch not in ARCHS:
            raise ValueError(f"unknown architecture {self.arch!r}, expected one of {ARCHS}")
        if self.n < 1 or self.d < 0 or self.out_dim < 1:
            raise DimensionError(f"bad sizes n={self.n} d={self.d} out_dim={self.out_dim}")
        if self.phi_a not in ("relu", "tanh"):
            raise ValueError(f"phi_a must be 'relu' or 'tanh', got {self.phi_a!r}")
        if self.phi_h not in ("identity", "tanh"):
            raise ValueError(f"phi_h must be 'identity' or 'tanh', got {self.phi_h!r}")
        if self.tau <= 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not 0 < self.dt <= self.tau:
            raise ValueError(f"dt must satisfy 0 < dt <= tau, got dt={self.dt} tau={self.tau}")
        if self.h0_mode not in ("zeros", "random", "learned"):
            raise ValueError(f"unknown h0_mode {self.h0_mode!r}")
        if self.l_h < 1 or self.l_z < 1:
            raise ValueError("l_h and l_z must be at least 1")
        if self.arch == "mgru" and (self.l_h != 1 or self.l_z != 1):
            raise ValueError("mgru requires l_h = l_z = 1")
        if self.arch == "lem":
            if self.n % 2 != 0:
                raise DimensionError(f"lem needs even n, got {self.n}")
            if self.l_h != 1 or self.l_z != 1:
                raise ValueError("lem requires l_h = l_z = 1")
        if self.arch in ("vanilla-rnn", "gru", "lstm") and self.l_h != 1:
            raise ValueError(f"{self.arch} has no deep F net; set l_h = 1")
        if self.l_h > 1 and self.hidden < 1:
            raise ValueError("hidden width required when l_h > 1")
        if self.l_z > 1 and self.hidden_z < 1:
            raise ValueError("hidden_z width required when l_z > 1")
        if not self.leak and self.arch not in ("node", "gnode"):
            raise ValueError("leak can only be disabled for node/gnode")

    @property
    def state_dim(self) -> int:
        return 2 * self.n if self.arch == "lstm" else self.n

    @property
    def gated(self) -> bool:
        return self.arch in _GATED

    @property
    def f_widths(self) -> list[int]:
        """Layer output widths of F, input side first: [n, hidden, ..., n]."""
        if self.l_h == 1:
            return [self.n, self.n]
        return [self.n] + [self.hidden] * (self.l_h - 1) + [self.n]

    @property
    def g_widths(self) -> list[int]:
        if self.l_z == 1:
            return [self.n, self.n]
        return [self.n] + [self.hidden_z] * (self.l_z - 1) + [self.n]

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSpec":
        return cls(**d)


@dataclass(frozen=True)
class InitScheme:
    """Weight initialization scheme.

    kind selects the variance rule for recurrent/hidden weights:
      glorot-normal   var = sigma_w^2 / (fan_in + fan_out)
      kaiming-normal  var = sigma_w^2 / fan_in
      critical        sigma_w is replaced by the mean-field critical scale
                      for the configured depth (requires phi_a = relu and
                      phi_h = tanh), applied with `scaling` fan rule.

    sigma_w defaults to sqrt(2) (the textbook Glorot/Kaiming gain). Input
    weights are N(0, sigma_u^2 / d), biases N(0, sigma_b^2), gate weights use
    sigma_z (defaulting to sigma_w) under the same fan rule. The readout and
    learned-h0 maps always use textbook Glorot with zero bias.
    """

    kind: str = "glorot-normal"
    scaling: str = "kaiming"
    sigma_w: float | None = None
    sigma_b: float = 1e-3
    sigma_u: float = 1.0
    sigma_z: float | None = None

    def __post_init__(self):
        if self.kind not in ("glorot-normal", "kaiming-normal", "critical"):
            raise ValueError(f"unknown init kind {self.kind!r}")
        if self.scaling not in ("kaiming", "glorot"):
            raise ValueError(f"unknown scaling {self.scaling!r}")
        if self.sigma_w is not None and self.sigma_w < 0:
            raise ValueError("sigma_w must be non-negative")
        if self.sigma_b < 0 or self.sigma_u < 0:
            raise ValueError("sigma_b and sigma_u must be non-negative")
        if self.sigma_z is not None and self.sigma_z < 0:
            raise ValueError("sigma_z must be non-negative")
