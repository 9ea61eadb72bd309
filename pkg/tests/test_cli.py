"""Command-line front end: artifacts, determinism, exit codes."""

import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from thinlab.cli import main

SMALL_SQUARE = {"rectangles": [[0.0, 0.15, 0.0, 0.15]]}
UNIT_SQUARE = {"rectangles": [[0.0, 1.0, 0.0, 1.0]]}


@pytest.fixture(scope="module")
def small_domain(tmp_path_factory):
    path = tmp_path_factory.mktemp("dom") / "small.json"
    path.write_text(json.dumps(SMALL_SQUARE))
    return str(path)


@pytest.fixture(scope="module")
def unit_domain(tmp_path_factory):
    path = tmp_path_factory.mktemp("dom") / "unit.json"
    path.write_text(json.dumps(UNIT_SQUARE))
    return str(path)


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_spectrum_unit_square(unit_domain, tmp_path):
    out = tmp_path / "spec"
    rc = main(["spectrum", "--domain", unit_domain,
               "--mesh", str(1 / 512), "--out", str(out)])
    assert rc == 0
    rows = read_csv(out / "spectrum.csv")
    lam2 = float(rows[1]["eigenvalue"])
    assert abs(lam2 - math.pi ** 2) / math.pi ** 2 < 5e-3
    assert abs(float(rows[0]["eigenvalue"])) < 1e-6
    assert (out / "graph.json").exists()
    assert (out / "vectors.csv").exists()
    assert (out / "direct_sum.csv").exists()


def test_missing_domain_exits_2(tmp_path):
    rc = main(["spectrum", "--domain", str(tmp_path / "nope.json"),
               "--out", str(tmp_path / "o")])
    assert rc == 2


def test_bad_eps_order_exits_2(small_domain, tmp_path):
    rc = main(["squeeze", "--domain", small_domain,
               "--eps", "0.1", "0.2", "--out", str(tmp_path / "o")])
    assert rc == 2


def test_gap_summary_unit_square(unit_domain, tmp_path):
    out = tmp_path / "gap"
    rc = main(["gap", "--domain", unit_domain, "--mesh", str(1 / 512),
               "--out", str(out), "--seed", "3"])
    assert rc == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["tail_max"] >= 6.0
    assert summary["config"]["seed"] == 3  # resolved config is echoed
    rows = read_csv(out / "gap.csv")
    assert set(rows[0]) == {"nu", "lambda", "delta", "ratio", "c_nu_1",
                            "c_nu_2", "admissible_flag"}


def test_manifold_inadmissible_exits_4(small_domain, tmp_path):
    out = tmp_path / "m"
    rc = main(["manifold", "--domain", small_domain, "--L", "1e9",
               "--mesh", str(0.15 / 16), "--out", str(out)])
    assert rc == 4
    assert not any(out.iterdir())  # partial outputs removed


def test_determinism(small_domain, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        rc = main(["gap", "--domain", small_domain, "--mesh", str(0.15 / 32),
                   "--out", str(out), "--seed", "11"])
        assert rc == 0
    assert (a / "gap.csv").read_bytes() == (b / "gap.csv").read_bytes()
    sa = json.loads((a / "summary.json").read_text())
    sb = json.loads((b / "summary.json").read_text())
    sa["config"].pop("out")
    sb["config"].pop("out")
    assert sa == sb


def test_config_file_with_flag_override(small_domain, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"domain": small_domain, "seed": 5,
                               "mesh": 0.15 / 32, "l": 0.25}))
    out = tmp_path / "out"
    rc = main(["cutoff", "--config", str(cfg), "--out", str(out)])
    assert rc == 0
    summary = json.loads((out / "cutoff.json").read_text())
    assert summary["l"] == 0.25
    assert summary["verification_global"]["ok"]
    assert summary["verification_ball"]["ok"]


def test_unknown_config_key_exits_2(small_domain, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"domain": small_domain, "bogus": 1}))
    rc = main(["spectrum", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert rc == 2


def test_csv_dialect_lf_and_header(small_domain, tmp_path):
    out = tmp_path / "g"
    main(["gap", "--domain", small_domain, "--mesh", str(0.15 / 32),
          "--out", str(out)])
    raw = (out / "gap.csv").read_bytes()
    assert b"\r" not in raw
    assert raw.split(b"\n", 1)[0] == b"nu,lambda,delta,ratio,c_nu_1,c_nu_2,admissible_flag"


def test_console_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "thinlab.cli", "--help"],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert "spectrum" in proc.stdout
