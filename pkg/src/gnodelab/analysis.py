"""Post-training interpretability: fixed points, spectra, flow fields, PCA.

All searches and spectra run with zero input, matching how the trained
dynamics are probed: the question is what the autonomous system does
between pulses.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .data import TrialBatch
from .errors import SingularReadoutError
from .linalg import eig_spectrum
from .models import InitScheme, ModelSpec, gate_values, init_params, jacobian, velocity
from .pca import pca
from .rng import stream
from .tasks import FlipFlopSpec, gen_flipflop
from .training import loss_and_grad, substeps_for, unroll

__all__ = [
    "BoundingBox", "FixedPointRecord", "FlowFieldGrid", "SpectrumResult",
    "classify_stability", "find_fixed_points", "flow_field",
    "starts_from_trajectories", "init_spectrum_experiment", "pca_report",
    "components_for", "generalization_probe", "write_fixed_points_jsonl",
    "read_fixed_points_jsonl", "write_flow_csv", "write_spectrum_csv",
    "write_pca_csv",
]

STABILITY_MARGIN = 0.1


@dataclass(frozen=True)
class BoundingBox:
    """Global elementwise min/max q, r of reference trajectories; accepted
    fixed points must satisfy 2q < h_i < 2r."""

    q: float
    r: float

    def __post_init__(self):
        if self.q > self.r:
            raise ValueError(f"need q <= r, got {self.q} > {self.r}")

    @classmethod
    def from_trajectories(cls, states: np.ndarray) -> "BoundingBox":
        return cls(q=float(np.min(states)), r=float(np.max(states)))

    def admits(self, h: np.ndarray) -> bool:
        return bool(np.all(h > 2 * self.q) and np.all(h < 2 * self.r))


@dataclass
class FixedPointRecord:
    location: np.ndarray
    residual: float
    eigenvalues: np.ndarray  # complex; empty when not computed
    spectral_abscissa: float
    stability_class: str
    converged: bool
    origin: int
    used_pinv: bool = False


def classify_stability(abscissa: float, margin: float = STABILITY_MARGIN) -> str:
    """stable below -margin, marginal within +-margin, else unstable."""
    if abscissa < -margin:
        return "stable"
    if abs(abscissa) <= margin:
        return "marginal"
    return "unstable"


def _newton_polish(params, spec, h0, max_iter, tol):
    """Damped Newton on the zero-input velocity from one start.

    Returns (h, residual_norm, used_pinv). Steps solve J dh = -f with up to
    10 halvings of the step until the residual norm decreases; a singular
    Jacobian falls back to the pseudo-inverse step.
    """
    x = np.zeros(spec.d)
    h = np.asarray(h0, dtype=np.float64).copy()
    f = velocity(params, spec, h, x)
    fn = float(np.linalg.norm(f))
    used_pinv = False
    for _ in range(max_iter):
        if fn < tol:
            break
        jac = jacobian(params, spec, h, x)
        try:
            step = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            step = -np.linalg.pinv(jac) @ f
            used_pinv = True
        scale = 1.0
        improved = False
        for _ in range(11):  # full step plus at most 10 halvings
            cand = h + scale * step
            fc = velocity(params, spec, cand, x)
            fcn = float(np.linalg.norm(fc))
            if np.isfinite(fcn) and fcn < fn:
                h, f, fn = cand, fc, fcn
                improved = True
                break
            scale *= 0.5
        if not improved:
            break  # stuck on a residual plateau
    return h, fn, used_pinv


def _dedup_clusters(records: list[FixedPointRecord], radius: float):
    """Transitive-closure clustering of record locations within radius.

    Locations are first collapsed on a grid much finer than the radius
    (best residual kept per cell), which keeps the exact pairwise pass
    small when thousands of starts land on the same attractor.
    """
    cell = radius / 10.0
    cells: dict[tuple, FixedPointRecord] = {}
    for rec in records:
        key = tuple(np.round(rec.location / cell).astype(np.int64).tolist())
        old = cells.get(key)
        if old is None or rec.residual < old.residual:
            cells[key] = rec
    reps = sorted(cells.values(), key=lambda r: tuple(r.location.tolist()))
    clusters: list[list[FixedPointRecord]] = []
    for rec in reps:
        touching = [
            i for i, cl in enumerate(clusters)
            if any(np.linalg.norm(rec.location - m.location) <= radius for m in cl)
        ]
        if not touching:
            clusters.append([rec])
        else:
            merged = [rec]
            for i in touching:
                merged.extend(clusters[i])
            clusters = [cl for i, cl in enumerate(clusters) if i not in touching]
            clusters.append(merged)
    return [min(cl, key=lambda r: r.residual) for cl in clusters]


def find_fixed_points(params, spec: ModelSpec, starts, max_iter: int = 100,
                      tol: float = 0.01, bbox: BoundingBox | None = None,
                      dedup_radius: float = 1e-2,
                      margin: float = STABILITY_MARGIN) -> list[FixedPointRecord]:
    """Newton-polish every start; dedup and classify the accepted points.

    Accepted records (converged, inside the doubled bounding box) are
    deduplicated by transitive closure at dedup_radius, eigendecomposed,
    classified, and returned sorted by location. Failed starts are returned
    after them with converged=False and no spectrum.
    """
    x = np.zeros(spec.d)
    accepted: list[FixedPointRecord] = []
    failed: list[FixedPointRecord] = []
    for si, h0 in enumerate(np.atleast_2d(np.asarray(starts, dtype=np.float64))):
        h, fn, used_pinv = _newton_polish(params, spec, h0, max_iter, tol)
        ok = fn < tol and (bbox is None or bbox.admits(h))
        rec = FixedPointRecord(
            location=h, residual=fn, eigenvalues=np.empty(0, dtype=complex),
            spectral_abscissa=float("nan"), stability_class="unknown",
            converged=fn < tol, origin=si, used_pinv=used_pinv)
        (accepted if ok else failed).append(rec)
    unique = _dedup_clusters(accepted, dedup_radius) if accepted else []
    for rec in unique:
        rec.eigenvalues = eig_spectrum(jacobian(params, spec, rec.location, x))
        rec.spectral_abscissa = float(np.max(rec.eigenvalues.real))
        rec.stability_class = classify_stability(rec.spectral_abscissa, margin)
    unique.sort(key=lambda r: tuple(r.location.tolist()))
    return unique + failed


def starts_from_trajectories(states: np.ndarray, count: int, rng) -> np.ndarray:
    """Sample Newton starts from visited states (any leading shape)."""
    flat = np.asarray(states, dtype=np.float64).reshape(-1, states.shape[-1])
    replace_draw = count > flat.shape[0]
    idx = rng.choice(flat.shape[0], size=count, replace=replace_draw)
    return flat[idx]


@dataclass(frozen=True)
class FlowFieldGrid:
    y1: np.ndarray           # grid axis, ascending
    y2: np.ndarray
    velocity: np.ndarray     # (len(y1), len(y2), 2)
    speed: np.ndarray        # (len(y1), len(y2))
    gate_norm: np.ndarray    # (len(y1), len(y2))
    mode: str                # "output" or "state"


def flow_field(params, spec: ModelSpec, lo: float = -2.5, hi: float = 2.5,
               cells: int = 41, mode: str = "output") -> FlowFieldGrid:
    """Velocity field on a square grid for two-dimensional systems.

    mode="output" places the grid in readout space: h = W^{ -1}(y - b),
    and reports W @ velocity(h). Requires an invertible 2x2 readout;
    otherwise a SingularReadoutError points at mode="state", which grids
    raw state coordinates directly.
    """
    if spec.state_dim != 2:
        raise ValueError(f"flow fields need a 2-dimensional state, got {spec.state_dim}")
    axis = np.linspace(lo, hi, cells)
    g1, g2 = np.meshgrid(axis, axis, indexing="ij")
    pts = np.stack([g1.ravel(), g2.ravel()], axis=1)
    x = np.zeros((1, spec.d))
    if mode == "output":
        if spec.out_dim != 2:
            raise ValueError("output-space grids need a 2-dimensional readout")
        w = params["out.w"]
        if abs(np.linalg.det(w)) < 1e-12:
            raise SingularReadoutError(
                "readout matrix is singular; use mode='state' for a raw grid")
        h = (pts - params["out.b"]) @ np.linalg.inv(w).T
        vel = velocity(params, spec, h, x) @ w.T
    elif mode == "state":
        h = pts
        vel = velocity(params, spec, h, x)
    else:
        raise ValueError(f"mode must be 'output' or 'state', got {mode!r}")
    gate = gate_values(params, spec, h, x)
    shape = (cells, cells)
    return FlowFieldGrid(
        y1=axis, y2=axis.copy(),
        velocity=vel.reshape(*shape, 2),
        speed=np.linalg.norm(vel, axis=1).reshape(shape),
        gate_norm=np.linalg.norm(gate, axis=1).reshape(shape),
        mode=mode,
    )


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray  # complex
    residual: float          # ||velocity|| at the relaxed state
    stationary: bool         # residual <= 1e-3
    final_state: np.ndarray


def init_spectrum_experiment(arch: str, n: int = 1000, sigma_w: float = 1.5,
                             sigma_z: float = 0.0, relax_t: float = 1000.0,
                             dt: float = 1.0, seed: int = 0) -> SpectrumResult:
    """Spectrum of the velocity Jacobian after relaxing a random init.

    tanh activations throughout, kaiming-scaled weights at sigma_w with the
    gate net scaled by sigma_z (sigma_z = 0 pins every gate to 1/2), zero
    biases, tau = 1. The state relaxes from a standard-normal start with
    zero input for relax_t; a steady state is not guaranteed, so the result
    carries a stationarity flag instead of erroring.
    """
    kwargs = dict(n=n, d=1, out_dim=1, phi_a="tanh", phi_h="tanh", tau=1.0, dt=dt)
    if arch == "gnode":
        kwargs.update(l_h=3, hidden=n)
    spec = ModelSpec(arch=arch, **kwargs)
    scheme = InitScheme(kind="kaiming-normal", sigma_w=sigma_w, sigma_b=0.0,
                        sigma_u=1.0, sigma_z=sigma_z)
    params = init_params(spec, scheme, stream(seed, "spectrum", arch, "params"))
    h = stream(seed, "spectrum", arch, "state").standard_normal(spec.state_dim)
    x = np.zeros(spec.d)
    steps = int(round(relax_t / dt))
    for _ in range(steps):
        h = h + dt * velocity(params, spec, h, x)
    v = velocity(params, spec, h, x)
    residual = float(np.linalg.norm(v))
    eig = eig_spectrum(jacobian(params, spec, h, x))
    return SpectrumResult(eigenvalues=eig, residual=residual,
                          stationary=residual <= 1e-3, final_state=h)


def pca_report(trajectories: np.ndarray) -> np.ndarray:
    """Cumulative variance-explained curve over pooled state samples."""
    flat = np.asarray(trajectories, dtype=np.float64)
    flat = flat.reshape(-1, flat.shape[-1])
    result = pca(flat, k=1)
    return np.cumsum(result.variance_ratios)


def components_for(cumulative: np.ndarray, fraction: float) -> int:
    """Smallest component count whose cumulative ratio reaches fraction."""
    hits = np.nonzero(cumulative >= fraction)[0]
    return int(hits[0]) + 1 if hits.size else len(cumulative)


def generalization_probe(params, spec: ModelSpec, task: FlipFlopSpec,
                         regions, seed: int = 0, trials: int = 100) -> dict:
    """MSE on fresh joint-amplitude trials confined to radius regions.

    regions is an iterable of (r_lo, r_hi); each gets its own annulus-
    restricted task. Returns {(r_lo, r_hi): mse}.
    """
    out = {}
    substeps = None
    for r_lo, r_hi in regions:
        probe_task = replace(task, variant="disk", r_min=float(r_lo), r_max=float(r_hi))
        batch = gen_flipflop(probe_task, stream(seed, "probe", repr(r_lo), repr(r_hi)),
                             trials=trials)
        if substeps is None:
            substeps = substeps_for(spec, batch.bin_times)
        _, outputs = unroll(params, spec, batch.inputs, substeps=substeps)
        mse, _ = loss_and_grad("mse", outputs, batch.targets)
        out[(float(r_lo), float(r_hi))] = mse
    return out


def write_fixed_points_jsonl(path, records: list[FixedPointRecord]) -> None:
    with open(path, "w") as fh:
        for rec in records:
            row = {
                "location": [float(v) for v in rec.location],
                "residual": rec.residual,
                "abscissa": None if np.isnan(rec.spectral_abscissa)
                            else rec.spectral_abscissa,
                "eigenvalues": [[float(e.real), float(e.imag)]
                                for e in rec.eigenvalues],
                "class": rec.stability_class,
                "converged": rec.converged,
            }
            fh.write(json.dumps(row) + "\n")


def read_fixed_points_jsonl(path) -> list[dict]:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def write_flow_csv(path, grid: FlowFieldGrid) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("y1,y2,v1,v2,speed,gate_norm\n")
        for i, a in enumerate(grid.y1):
            for j, b in enumerate(grid.y2):
                v1, v2 = grid.velocity[i, j]
                cells = (a, b, v1, v2, grid.speed[i, j], grid.gate_norm[i, j])
                fh.write(",".join(repr(float(c)) for c in cells) + "\n")


def write_spectrum_csv(path, result: SpectrumResult) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("re,im\n")
        for e in result.eigenvalues:
            fh.write(f"{float(e.real)!r},{float(e.imag)!r}\n")


def write_pca_csv(path, cumulative: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("component,cumulative_variance\n")
        for i, c in enumerate(cumulative, start=1):
            fh.write(f"{i},{float(c)!r}\n")
