"""Figure spec files: one JSON object per figure.

{
  "kind": "flow-field",
  "out": "flow.png",
  "inputs": {"flow": "flow_field.csv", "fixed_points": "fp.jsonl"},
  "style": {"title": "square task"}
}

inputs maps role names to result-file paths; roles marked list-valued take
[{"label": ..., "path": ...}, ...]. Parsing is strict: unknown kinds, roles,
or style keys fail with the offending name, and every referenced input must
exist on disk.
"""

import json
import os
from dataclasses import dataclass, field

from .errors import SpecError

__all__ = ["KINDS", "FigureSpec", "load_spec", "parse_spec"]

# role -> required; list-valued roles hold (label, path) series
KINDS = {
    "flow-field": {"flow": True, "fixed_points": False, "trajectories": False},
    "abscissa-strip": {"series": True},
    "eig-cloud": {"spectra": True},
    "loss-curves": {"runs": True},
    "mse-grid": {"grid": True},
    "critical-curve": {"curve": True},
}

_LIST_ROLES = {"series", "spectra", "runs"}

_STYLE_DEFAULTS = {
    "flow-field": {"title": None, "dpi": 120, "figsize": (5.0, 4.2),
                   "cmap": "viridis", "max_trajectories": 6},
    "abscissa-strip": {"title": None, "dpi": 120, "figsize": (4.5, 3.5),
                       "log": True},
    "eig-cloud": {"title": None, "dpi": 120, "figsize": (4.0, 4.0),
                  "ring": None},
    "loss-curves": {"title": None, "dpi": 120, "figsize": (5.0, 3.5),
                    "logy": True, "show": "both"},
    "mse-grid": {"title": None, "dpi": 120, "figsize": (4.0, 3.2),
                 "cmap": "viridis"},
    "critical-curve": {"title": None, "dpi": 120, "figsize": (4.5, 3.5)},
}


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    out: str
    inputs: dict = field(default_factory=dict)
    style: dict = field(default_factory=dict)


def _check_series(role, value):
    if not isinstance(value, list) or not value:
        raise SpecError("expected a non-empty list of {label, path} entries",
                        f"inputs.{role}")
    for i, entry in enumerate(value):
        if (not isinstance(entry, dict)
                or set(entry) != {"label", "path"}):
            raise SpecError("entries need exactly the keys 'label' and 'path'",
                            f"inputs.{role}[{i}]")
    return [(str(e["label"]), str(e["path"])) for e in value]


def parse_spec(text: str, base_dir: str = ".") -> FigureSpec:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise SpecError("top level must be an object")
    for key in data:
        if key not in ("kind", "out", "inputs", "style"):
            raise SpecError(f"unknown key {key!r}", key)

    kind = data.get("kind")
    if kind not in KINDS:
        raise SpecError(f"unknown kind {kind!r}, expected one of {sorted(KINDS)}",
                        "kind")
    out = data.get("out")
    if not isinstance(out, str) or not out:
        raise SpecError("out must be a non-empty path", "out")
    if os.path.splitext(out)[1].lower() not in (".png", ".svg"):
        raise SpecError("out must end in .png or .svg", "out")

    roles = KINDS[kind]
    raw_inputs = data.get("inputs", {})
    if not isinstance(raw_inputs, dict):
        raise SpecError("inputs must be an object", "inputs")
    inputs = {}
    for role, value in raw_inputs.items():
        if role not in roles:
            raise SpecError(f"kind {kind!r} takes no input {role!r}",
                            f"inputs.{role}")
        if role in _LIST_ROLES:
            inputs[role] = [(label, os.path.join(base_dir, path))
                            for label, path in _check_series(role, value)]
        else:
            if not isinstance(value, str):
                raise SpecError("expected a path string", f"inputs.{role}")
            inputs[role] = os.path.join(base_dir, value)
    for role, required in roles.items():
        if required and role not in inputs:
            raise SpecError(f"kind {kind!r} requires input {role!r}",
                            f"inputs.{role}")

    for role, value in inputs.items():
        paths = [p for _, p in value] if role in _LIST_ROLES else [value]
        for p in paths:
            if not os.path.exists(p):
                raise SpecError(f"input file not found: {p}", f"inputs.{role}")

    defaults = dict(_STYLE_DEFAULTS[kind])
    raw_style = data.get("style", {})
    if not isinstance(raw_style, dict):
        raise SpecError("style must be an object", "style")
    for key, value in raw_style.items():
        if key not in defaults:
            raise SpecError(f"kind {kind!r} has no style option {key!r}",
                            f"style.{key}")
        defaults[key] = tuple(value) if isinstance(value, list) else value

    return FigureSpec(kind=kind, out=os.path.join(base_dir, out),
                      inputs=inputs, style=defaults)


def load_spec(path) -> FigureSpec:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise SpecError(f"cannot read spec: {exc}", str(path)) from exc
    return parse_spec(text, base_dir=os.path.dirname(os.path.abspath(path)))
