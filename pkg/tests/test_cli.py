"""End-to-end command-line runs on miniature configs."""

import csv
import json

import pytest

from gnodelab.cli import main
from gnodelab.config import load_manifest


TINY_TASK = {"kind": "flipflop", "n": 2, "bins": 12, "trials_train": 6,
             "trials_val": 3}
TINY_MODEL = {"arch": "gnode", "n": 2, "d": 2, "out_dim": 2, "l_h": 2,
              "hidden": 8, "tau": 0.01, "dt": 0.01}
TINY_OPTIM = {"epochs": 3, "batch_size": 6, "eta": 1e-3, "lambda_w": 1e-3}


def write_cfg(tmp_path, name="cfg.json", **sections):
    path = tmp_path / name
    path.write_text(json.dumps(sections))
    return str(path)


def run(*argv):
    return main(list(argv))


# ------------------------------------------------------------------ gen

def test_gen_writes_split_and_manifest(tmp_path):
    cfg = write_cfg(tmp_path, task=TINY_TASK)
    out = tmp_path / "out"
    assert run("gen", "--config", cfg, "--out", str(out)) == 0
    assert (out / "train.csv").exists() and (out / "val.csv").exists()
    assert (out / "config.json").read_text() == json.dumps({"task": TINY_TASK})
    man = load_manifest(out / "manifest.json")
    assert man.outputs["train"] == "train.csv"
    assert man.finished is not None


def test_gen_is_byte_deterministic(tmp_path):
    cfg = write_cfg(tmp_path, task=TINY_TASK)
    a, b = tmp_path / "a", tmp_path / "b"
    assert run("gen", "--config", cfg, "--out", str(a)) == 0
    assert run("gen", "--config", cfg, "--out", str(b)) == 0
    assert (a / "train.csv").read_bytes() == (b / "train.csv").read_bytes()
    assert (a / "val.csv").read_bytes() == (b / "val.csv").read_bytes()


def test_gen_seed_override_changes_data(tmp_path):
    cfg = write_cfg(tmp_path, task=TINY_TASK)
    a, b = tmp_path / "a", tmp_path / "b"
    assert run("gen", "--config", cfg, "--out", str(a)) == 0
    assert run("gen", "--config", cfg, "--out", str(b), "--seed", "9") == 0
    assert (a / "train.csv").read_bytes() != (b / "train.csv").read_bytes()


def test_gen_ou_single_file(tmp_path):
    cfg = write_cfg(tmp_path, task={"kind": "ou", "dim": 2, "horizon": 5.0,
                                    "integrator_dt": 0.05})
    out = tmp_path / "out"
    assert run("gen", "--config", cfg, "--out", str(out)) == 0
    assert (out / "ou.csv").exists()


def test_outdir_resolution(tmp_path, monkeypatch):
    monkeypatch.setenv("GNODELAB_OUT", str(tmp_path / "env-root"))
    cfg = write_cfg(tmp_path, name="myrun.json", task=TINY_TASK)
    assert run("gen", "--config", cfg) == 0
    assert (tmp_path / "env-root" / "myrun" / "train.csv").exists()
    # an explicit outdir in the config wins over the environment
    cfg2 = write_cfg(tmp_path, name="other.json", task=TINY_TASK,
                     outdir=str(tmp_path / "cfg-dir"))
    assert run("gen", "--config", cfg2) == 0
    assert (tmp_path / "cfg-dir" / "train.csv").exists()


# ---------------------------------------------------------------- failures

def test_missing_config_file_is_config_error(tmp_path, capsys):
    assert run("gen", "--config", str(tmp_path / "none.json")) == 2
    assert "config error" in capsys.readouterr().err


def test_unknown_key_is_config_error(tmp_path, capsys):
    cfg = write_cfg(tmp_path, task=dict(TINY_TASK, pulses=3))
    assert run("gen", "--config", cfg) == 2
    assert "task.pulses" in capsys.readouterr().err


def test_train_without_model_is_config_error(tmp_path):
    cfg = write_cfg(tmp_path, task=TINY_TASK)
    assert run("train", "--config", cfg, "--out", str(tmp_path / "o")) == 2


def test_capacity_command_rejects_other_tasks(tmp_path):
    cfg = write_cfg(tmp_path, task=TINY_TASK)
    assert run("capacity", "--config", cfg, "--out", str(tmp_path / "o")) == 2


def test_unwritable_outdir_is_io_error(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    cfg = write_cfg(tmp_path, task=TINY_TASK)
    assert run("gen", "--config", cfg, "--out", str(blocker / "sub")) == 4
    assert "i/o error" in capsys.readouterr().err


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_divergent_training_exits_3(tmp_path):
    cfg = write_cfg(tmp_path, task=TINY_TASK, model=TINY_MODEL,
                    optimizer=dict(TINY_OPTIM, eta=1e200, epochs=5))
    assert run("train", "--config", cfg, "--out", str(tmp_path / "o")) == 3


# -------------------------------------------------------- train and analyze

@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    tmp_path = tmp_path_factory.mktemp("trained")
    cfg = write_cfg(tmp_path, task=TINY_TASK, model=TINY_MODEL,
                    optimizer=TINY_OPTIM)
    out = tmp_path / "run"
    assert run("train", "--config", cfg, "--out", str(out)) == 0
    return tmp_path, cfg, out


def test_train_outputs(trained):
    _, _, out = trained
    assert (out / "checkpoint.gnl").exists()
    with open(out / "train_log.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 3
    assert {"epoch", "train_loss", "val_loss"} <= set(rows[0])
    man = load_manifest(out / "manifest.json")
    assert man.outputs["checkpoint"] == "checkpoint.gnl"


def test_analyze_full_stack(trained):
    tmp_path, _, run_dir = trained
    cfg = write_cfg(
        tmp_path, name="an.json", task=TINY_TASK,
        analysis={"fixed_points": {"starts": 12, "max_iter": 40, "tol": 0.05},
                  "flow_field": {"cells": 7}, "pca": True,
                  "regions": [[0.5, 1.0], [2.0, 4.0]]})
    out = tmp_path / "analysis"
    assert run("analyze", "--config", cfg, "--out", str(out),
               "--checkpoint", str(run_dir / "checkpoint.gnl")) == 0
    with open(out / "fixed_points.jsonl") as fh:
        recs = [json.loads(line) for line in fh if line.strip()]
    assert recs and {"location", "abscissa", "class"} <= set(recs[0])
    with open(out / "flow_field.csv", newline="") as fh:
        flow = list(csv.DictReader(fh))
    assert len(flow) == 49
    assert (out / "pca.csv").exists()
    with open(out / "generalization.csv", newline="") as fh:
        gen = list(csv.DictReader(fh))
    assert [r["r_lo"] for r in gen] == ["0.5", "2.0"]
    man = load_manifest(out / "manifest.json")
    assert set(man.outputs) >= {"fixed_points", "flow_field", "pca",
                                "generalization", "config"}


def test_analyze_needs_checkpoint(trained, tmp_path):
    cfg = write_cfg(tmp_path, task=TINY_TASK, analysis={"pca": True})
    assert run("analyze", "--config", cfg, "--out", str(tmp_path / "o")) == 2


def test_analyze_spectra_only_needs_no_checkpoint(tmp_path):
    cfg = write_cfg(
        tmp_path,
        analysis={"spectra": {"arch": "mgru", "n": 24, "sigma_zs": [0.0],
                              "relax_t": 5.0}})
    out = tmp_path / "spec"
    assert run("analyze", "--config", cfg, "--out", str(out)) == 0
    with open(out / "spectrum_sigma_z_0.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 24


# ----------------------------------------------------------------- sweep

def test_sweep_grid_and_best(tmp_path):
    cfg = write_cfg(tmp_path, task=TINY_TASK, model=TINY_MODEL,
                    optimizer=dict(TINY_OPTIM, epochs=1))
    out = tmp_path / "sweep"
    assert run("sweep", "--config", cfg, "--out", str(out)) == 0
    with open(out / "sweep_summary.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 27
    best = json.loads((out / "best.json").read_text())
    vals = [float(r["best_val"]) for r in rows if r["failed"] == "0"]
    assert best["best_val"] == min(vals)
    assert (out / best["dir"] / "checkpoint.gnl").exists()


# ------------------------------------------------------- the science CLIs

def test_mft_curve_csv(tmp_path):
    cfg = write_cfg(tmp_path, mft={"depth": 2, "sigma_b_grid": [0.0, 0.5]})
    out = tmp_path / "mft"
    assert run("mft-curve", "--config", cfg, "--out", str(out)) == 0
    with open(out / "mft_curve.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2
    assert float(rows[0]["sigma_w_star"]) == pytest.approx(1.0, abs=1e-6)


def test_capacity_csv(tmp_path):
    cfg = write_cfg(tmp_path, task={"kind": "capacity", "n": 20,
                                    "alphas": [0.25, 4.0], "trials": 5,
                                    "stall_sweeps": 200})
    out = tmp_path / "cap"
    assert run("capacity", "--config", cfg, "--out", str(out)) == 0
    with open(out / "capacity.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2 and rows[0]["N"] == "20"


def test_ou_grid_csv(tmp_path):
    cfg = write_cfg(
        tmp_path,
        task={"kind": "ou", "dim": 2, "horizon": 5.0, "integrator_dt": 0.05},
        ou_grid={"families": ["gru"], "n_grid": [4], "tau_grid": [1.0],
                 "etas": [1e-2], "decays": [1e-3], "epochs": 2, "seeds": [0]})
    out = tmp_path / "ou"
    assert run("ou-grid", "--config", cfg, "--out", str(out)) == 0
    with open(out / "ou_grid.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 1 and rows[0]["family"] == "gru"
