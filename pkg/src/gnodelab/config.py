"""Declarative experiment configs and run manifests.

Configs are JSON files with up to seven top-level keys: seed, outdir, task,
model, optimizer, analysis, and the command-specific sections mft / ou_grid.
Parsing is strict: any key that does not name a field of the target section
fails with the offending dotted path, and no silent defaults are filled in
for misspelled names. The manifest records enough (config bytes hash, seed,
library versions, output index) to re-run a job bit-identically, and the
config file itself is copied into the output directory alongside it.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field, fields
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .capacity import CapacityProbeSpec, OuGridSpec
from .errors import ConfigError
from .models import InitScheme, ModelSpec
from .tasks import FlipFlopSpec, OUSpec
from .training import TrainConfig

__all__ = [
    "ExperimentConfig", "FixedPointOptions", "FlowFieldOptions",
    "SpectraOptions", "AnalysisOptions", "MftCurveOptions", "RunManifest",
    "parse_config", "load_config", "config_hash", "new_manifest",
    "write_manifest", "load_manifest",
]

TASK_KINDS = {"flipflop": FlipFlopSpec, "ou": OUSpec, "capacity": CapacityProbeSpec}

_TOP_KEYS = ("seed", "outdir", "task", "model", "optimizer", "analysis",
             "mft", "ou_grid")


def _freeze(value):
    """JSON arrays arrive as lists; specs store tuples."""
    if isinstance(value, list):
        return tuple(_freeze(v) for v in value)
    return value


def _build(cls, data: dict, path: str):
    """Instantiate a dataclass from a config section, strictly."""
    if not isinstance(data, dict):
        raise ConfigError(f"expected an object, got {type(data).__name__}", path)
    names = {f.name for f in fields(cls)}
    kwargs = {}
    for key, value in data.items():
        if key not in names:
            raise ConfigError(f"unknown key {key!r}", f"{path}.{key}")
        kwargs[key] = _freeze(value)
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc), path) from exc


@dataclass(frozen=True)
class FixedPointOptions:
    starts: int | None = None   # None: 1000 for state dim <= 6, else 10000
    tol: float = 0.01
    max_iter: int = 100
    dedup: float = 1e-2

    def start_count(self, state_dim: int) -> int:
        if self.starts is not None:
            return self.starts
        return 1_000 if state_dim <= 6 else 10_000


@dataclass(frozen=True)
class FlowFieldOptions:
    lo: float = -2.5
    hi: float = 2.5
    cells: int = 41
    mode: str = "output"


@dataclass(frozen=True)
class SpectraOptions:
    arch: str = "mgru"
    n: int = 1000
    sigma_w: float = 1.5
    sigma_zs: tuple = (0.0, 5.0)
    relax_t: float = 1000.0
    dt: float = 1.0


@dataclass(frozen=True)
class AnalysisOptions:
    fixed_points: FixedPointOptions | None = None
    flow_field: FlowFieldOptions | None = None
    spectra: SpectraOptions | None = None
    pca: bool = False
    regions: tuple | None = None    # annulus (r_lo, r_hi) pairs
    probe_trials: int = 100


@dataclass(frozen=True)
class MftCurveOptions:
    depth: int = 2
    scaling: str = "kaiming"
    alpha: float = 0.0
    sigma_b_grid: tuple = (0.0, 0.25, 0.5, 0.75, 1.0)


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 0
    outdir: str | None = None
    task_kind: str | None = None
    task: FlipFlopSpec | OUSpec | CapacityProbeSpec | None = None
    model: ModelSpec | None = None
    init: InitScheme = field(default_factory=InitScheme)
    optimizer: TrainConfig | None = None
    analysis: AnalysisOptions = field(default_factory=AnalysisOptions)
    mft: MftCurveOptions | None = None
    ou_grid: OuGridSpec | None = None
    text: str = ""   # raw config file text, hashed into the manifest

    def require(self, *sections: str) -> "ExperimentConfig":
        """Fail with the section name when a command needs a missing part."""
        for name in sections:
            if getattr(self, name) is None:
                raise ConfigError(f"missing required section {name!r}", name)
        return self


def _parse_task(data: dict):
    if not isinstance(data, dict) or "kind" not in data:
        raise ConfigError("task section needs a 'kind' key", "task.kind")
    data = dict(data)
    kind = data.pop("kind")
    if kind not in TASK_KINDS:
        raise ConfigError(
            f"unknown task kind {kind!r}, expected one of {sorted(TASK_KINDS)}",
            "task.kind")
    return kind, _build(TASK_KINDS[kind], data, "task")


def _parse_model(data: dict):
    data = dict(data) if isinstance(data, dict) else data
    init_data = data.pop("init", {}) if isinstance(data, dict) else {}
    spec = _build(ModelSpec, data, "model")
    scheme = _build(InitScheme, init_data, "model.init")
    return spec, scheme


def _parse_optimizer(data: dict, seed: int) -> TrainConfig:
    if isinstance(data, dict) and "seed" in data:
        raise ConfigError("set the top-level seed instead", "optimizer.seed")
    data = dict(data) if isinstance(data, dict) else data
    cfg = _build(TrainConfig, data, "optimizer")
    return dataclasses.replace(cfg, seed=seed)


def _parse_analysis(data: dict) -> AnalysisOptions:
    if not isinstance(data, dict):
        raise ConfigError(f"expected an object, got {type(data).__name__}", "analysis")
    data = dict(data)
    parts = {}
    for name, cls in (("fixed_points", FixedPointOptions),
                      ("flow_field", FlowFieldOptions),
                      ("spectra", SpectraOptions)):
        if name in data:
            section = data.pop(name)
            if section is True:
                parts[name] = cls()
            elif section in (False, None):
                parts[name] = None
            else:
                parts[name] = _build(cls, section, f"analysis.{name}")
    return dataclasses.replace(_build(AnalysisOptions, data, "analysis"), **parts)


def parse_config(text: str) -> ExperimentConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}", "") from exc
    if not isinstance(data, dict):
        raise ConfigError("top level must be an object", "")
    for key in data:
        if key not in _TOP_KEYS:
            raise ConfigError(f"unknown key {key!r}", key)
    seed = data.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError("seed must be an integer", "seed")
    outdir = data.get("outdir")
    if outdir is not None and not isinstance(outdir, str):
        raise ConfigError("outdir must be a string", "outdir")

    kind, task = _parse_task(data["task"]) if "task" in data else (None, None)
    model, init = _parse_model(data["model"]) if "model" in data else (None, InitScheme())
    optim = _parse_optimizer(data["optimizer"], seed) if "optimizer" in data else None
    analysis = _parse_analysis(data.get("analysis", {}))
    mft = _build(MftCurveOptions, data["mft"], "mft") if "mft" in data else None
    grid = _build(OuGridSpec, data["ou_grid"], "ou_grid") if "ou_grid" in data else None
    return ExperimentConfig(seed=seed, outdir=outdir, task_kind=kind, task=task,
                            model=model, init=init, optimizer=optim,
                            analysis=analysis, mft=mft, ou_grid=grid, text=text)


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", str(path)) from exc
    return parse_config(text)


def config_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass
class RunManifest:
    config_sha256: str
    seed: int
    versions: dict
    started: str
    finished: str | None = None
    outputs: dict = field(default_factory=dict)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def new_manifest(config: ExperimentConfig) -> RunManifest:
    return RunManifest(
        config_sha256=config_hash(config.text),
        seed=config.seed,
        versions={"gnodelab": __version__, "numpy": np.__version__,
                  "checkpoint-container": "GNL1"},
        started=_now(),
    )


def write_manifest(path, manifest: RunManifest) -> None:
    manifest.finished = manifest.finished or _now()
    with open(path, "w") as fh:
        json.dump(dataclasses.asdict(manifest), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_manifest(path) -> RunManifest:
    with open(path) as fh:
        return RunManifest(**json.load(fh))
