import json
import os

import pytest

GOLDEN = os.path.join(os.path.dirname(__file__), "golden")


def g(name):
    return os.path.join(GOLDEN, name)


BASE_SPECS = {
    "flow-field": {"inputs": {"flow": g("flow.csv")}},
    "abscissa-strip": {"inputs": {"series": [
        {"label": "gnode", "path": g("fp.jsonl")},
        {"label": "rnn", "path": g("fp_alt.jsonl")},
    ]}},
    "eig-cloud": {"inputs": {"spectra": [
        {"label": "sigma_z = 0", "path": g("spectrum_z0.csv")},
        {"label": "sigma_z = 5", "path": g("spectrum_z5.csv")},
    ]}},
    "loss-curves": {"inputs": {"runs": [
        {"label": "run a", "path": g("log_a.csv")},
        {"label": "run b", "path": g("log_b.csv")},
    ]}},
    "mse-grid": {"inputs": {"grid": g("ou.csv")}},
    "critical-curve": {"inputs": {"curve": g("curve.csv")}},
}


@pytest.fixture
def make_spec(tmp_path):
    """Write a spec JSON for a kind and return its path."""
    def build(kind, out="fig.png", extra_inputs=None, style=None, **over):
        data = {"kind": kind, "out": str(tmp_path / out)}
        data["inputs"] = dict(BASE_SPECS[kind]["inputs"])
        if extra_inputs:
            data["inputs"].update(extra_inputs)
        if style:
            data["style"] = style
        data.update(over)
        path = tmp_path / f"{kind}.json"
        path.write_text(json.dumps(data))
        return str(path)
    return build
