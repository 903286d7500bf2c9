import json
import os
import subprocess
import sys

import numpy as np
import pytest

from corrmate.cli import run
from corrmate.rational import RationalMap


def _json(capsys):
    return json.loads(capsys.readouterr().out)


@pytest.fixture
def a4(tmp_path):
    path = tmp_path / "a4.json"
    assert run(["bers", "build", "--family", "a", "--n", "1", "--p", "4", "--out", str(path)]) == 0
    return str(path)


def test_bers_build_a4(capsys):
    assert run(["bers", "build", "--family", "a", "--n", "1", "--p", "4"]) == 0
    doc = _json(capsys)
    assert doc["schema"] and doc["config"]["seed"] is not None
    R = RationalMap.from_json(doc)
    for z in (0.3 + 0.7j, -2.0, 1.5j):
        assert abs(R(z) - (z + 1 / (3 * z**3))) < 1e-12


def test_group_build_schema(capsys):
    assert run(["group", "build", "--n", "3", "--p", "1"]) == 0
    doc = _json(capsys)
    assert {"schema", "config", "n", "p"} <= set(doc)


def test_verify_modular_case(capsys):
    assert run(["verify", "--n", "3", "--p", "1"]) == 0
    doc = _json(capsys)
    assert doc["ok"] and {s["name"] for s in doc["suites"]} >= {"group", "circle", "deck", "normal_form"}


def test_forward_and_backward(a4, capsys):
    assert run(["corr", "forward", "--map", a4, "--z", "0.3,0.2"]) == 0
    assert len(_json(capsys)["points"]) == 3
    assert run(["corr", "backward", "--map", a4, "--z", "-2,1"]) == 0
    assert len(_json(capsys)["points"]) == 3


def test_classify_writes_sidecar(a4, tmp_path, capsys):
    out = tmp_path / "labels.bin"
    assert run(["corr", "classify", "--map", a4, "--grid", "-2,2,-2,2,16,12", "--out", str(out)]) == 0
    side = json.loads((tmp_path / "labels.bin.json").read_text())
    labels = np.fromfile(out, dtype=np.uint8)
    assert labels.size == 16 * 12 and side["grid"][4:] == [16, 12]
    assert sum(side["counts"].values()) == labels.size


def test_cloud_csv(a4, tmp_path, capsys):
    out = tmp_path / "cloud.csv"
    assert run(["--seed", "3", "corr", "cloud", "--map", a4, "--budget", "500", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "re,im,rank" and len(lines) > 100


def test_conjugacy_csv(tmp_path, capsys):
    out = tmp_path / "h.csv"
    assert run(["circle", "conjugacy", "--n", "1", "--p", "4", "--samples", "64", "--out", str(out)]) == 0
    assert _json(capsys)["max_defect"] < 1e-6
    assert out.read_text().splitlines()[0] == "theta,re,im,defect"


def test_normalform_cli(tmp_path, capsys):
    path = tmp_path / "c.json"
    run(["bers", "build", "--family", "c", "--n", "3", "--p", "1", "--out", str(path)])
    assert run(["normalform", "--map", str(path)]) == 0
    assert _json(capsys)["a"] == pytest.approx([5, 0])


def test_render_ppm(a4, tmp_path, capsys):
    out = tmp_path / "img.ppm"
    assert run(["render", "classify", "--map", a4, "--px", "8x6", "--out", str(out)]) == 0
    assert out.read_bytes().startswith(b"P6\n8 6\n255\n")


def test_equivalence_with_itself(a4, capsys):
    assert run(["corr", "equiv", "--map", a4, "--other", a4]) == 0
    assert _json(capsys)["equivalent"]


def test_unknown_flag_exits_2(capsys):
    assert run(["verify", "--n", "3", "--p", "1", "--bogus"]) == 2


def test_bad_input_exits_2(tmp_path, capsys):
    assert run(["group", "build", "--n", "1", "--p", "2"]) == 2
    assert run(["corr", "forward", "--map", str(tmp_path / "missing.json"), "--z", "0"]) == 2


def test_failed_audit_exits_1(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(RationalMap.laurent({1: 1.0, -3: 1.0}).to_json()))
    assert run(["bers", "validate", "--map", str(path), "--n", "1", "--p", "4"]) == 1
    assert run(["render", "classify", "--map", str(path), "--px", "4x4", "--out", str(tmp_path / "x.ppm")]) == 1


def test_seed_from_environment(a4, tmp_path):
    env = dict(os.environ, CORRMATE_SEED="17")
    outs = []
    for k in range(2):
        out = tmp_path / f"c{k}.csv"
        subprocess.run(
            [sys.executable, "-m", "corrmate.cli", "corr", "cloud", "--map", a4, "--budget", "300", "--out", str(out)],
            env=env, check=True, capture_output=True,
        )
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
