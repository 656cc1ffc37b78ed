"""Command-line interface: outputs, artifacts and exit codes."""

from __future__ import annotations

import os
import subprocess
import sys

import numpy as np
import pytest

from tubewf import cli, io
from tubewf.signals import GridSignal


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_kernel_eval_at_origin(capsys, tmp_path):
    code, out, _ = run(capsys, "kernel-eval", "--out", str(tmp_path), "--x", "0", "--y", "0")
    assert code == cli.EXIT_OK
    assert out.startswith("K = 0.25 +0i")


def test_kernel_eval_planar_and_guards(capsys, tmp_path):
    code, out, _ = run(capsys, "kernel-eval", "--dim", "2", "--x", "0.3", "0", "--y", "0", "0.2")
    assert code == cli.EXIT_OK and "error estimate" in out
    assert run(capsys, "kernel-eval", "--dim", "2", "--x", "0", "--y", "0")[0] == cli.EXIT_USAGE
    assert run(capsys, "kernel-eval", "--x", "0", "--y", "1.5")[0] == cli.EXIT_BAD_INPUT


def test_catalog_lists_and_writes(capsys, tmp_path):
    code, out, _ = run(capsys, "catalog", "--dim", "1", "--write", "--out", str(tmp_path))
    assert code == cli.EXIT_OK and "heaviside" in out and "half_plane" not in out
    meta, head, rows = io.read_table(tmp_path / "catalog.csv")
    assert head[0] == "name" and meta["command"] == "catalog"
    assert {r[0] for r in rows} >= {"delta", "heaviside"}


def test_error_exit_codes(capsys, tmp_path):
    base = ("wf-scan", "--out", str(tmp_path), "--base-grid", "3")
    assert run(capsys, *base, "--source", "nope")[0] == cli.EXIT_UNKNOWN_SOURCE
    assert run(capsys, *base, "--source", "delta", "--space", "FL(p=0,s=1)")[0] == cli.EXIT_BAD_DESCRIPTOR
    assert run(capsys, *base, "--input", str(tmp_path / "missing.csv"))[0] == cli.EXIT_BAD_INPUT
    with pytest.raises(SystemExit) as e:
        cli.main(["wf-scan", "--mode", "sideways"])
    assert e.value.code == cli.EXIT_USAGE
    blocker = tmp_path / "file"
    blocker.write_text("")
    code, _, err = run(capsys, "wf-scan", "--out", str(blocker / "sub"), "--source", "delta", "--base-grid", "3")
    assert code == cli.EXIT_UNWRITABLE and "not writable" in err


def test_wf_scan_heaviside(capsys, tmp_path):
    code, _, _ = run(capsys, "wf-scan", "--out", str(tmp_path), "--source", "heaviside", "--base-grid", "5")
    assert code == cli.EXIT_OK
    meta, head, rows = io.read_table(tmp_path / "wf_scan.csv")
    assert head[:6] == ["x", "bin_axis_angle", "alpha", "tau", "verdict", "margin"]
    assert meta["seed"] == "0"
    flagged = {(float(r[0]), float(r[1])) for r in rows if r[4] == "IN_WF"}
    assert flagged == {(0.0, 0.0), (0.0, 180.0)}
    assert (tmp_path / "wf_direction_map.pgm").exists()
    assert "pixel_map" in io.read_table(tmp_path / "wf_direction_map.csv")[0]


def test_wf_scan_on_grid_input(capsys, tmp_path):
    n, dx = 2048, 0.00068359375
    x = -0.7 + dx * np.arange(n)
    g = GridSignal(1, (x >= 0.4).astype(complex), dx, np.array([-0.7]))
    path = io.write_grid_csv(tmp_path / "step.csv", g)
    code, _, _ = run(capsys, "wf-scan", "--out", str(tmp_path / "o"), "--input", str(path),
                     "--base-grid", "3", "--extent", "0.3")
    assert code == cli.EXIT_OK
    rows = io.read_table(tmp_path / "o" / "wf_scan.csv")[2]
    # the jump sits at 0.4; only the window about 0.3 reaches it
    assert {float(r[0]) for r in rows if r[4] == "IN_WF"} == {0.3}


def test_decompose_writes_pieces(capsys, tmp_path):
    code, _, _ = run(capsys, "decompose", "--out", str(tmp_path), "--source", "delta")
    assert code == cli.EXIT_OK
    assert (tmp_path / "piece_0.csv").exists() and (tmp_path / "piece_1.csv").exists()
    rows = io.read_table(tmp_path / "containment.csv")[2]
    assert rows and all(r[1] == "true" for r in rows)
    code, _, _ = run(capsys, "decompose", "--out", str(tmp_path), "--source", "half_plane", "--cones", "0:40,180:40")
    assert code == cli.EXIT_BAD_DESCRIPTOR


def test_out_defaults_to_environment(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("TUBEWF_OUT", str(tmp_path / "env"))
    assert run(capsys, "catalog", "--write")[0] == cli.EXIT_OK
    assert (tmp_path / "env" / "catalog.csv").exists()


def test_runs_are_byte_identical(capsys, tmp_path):
    for sub in ("a", "b"):
        assert run(capsys, "tube-map", "--out", str(tmp_path / sub), "--source", "delta", "--n", "12")[0] == 0
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert names and names == sorted(p.name for p in (tmp_path / "b").iterdir())
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_console_entry_point(tmp_path):
    env = {**os.environ, "TUBEWF_OUT": str(tmp_path)}
    r = subprocess.run([sys.executable, "-m", "tubewf.cli", "kernel-eval", "--x", "0", "--y", "0"],
                       capture_output=True, text=True, env=env)
    assert r.returncode == 0 and "0.25" in r.stdout
