"""Artifact formats: tables, grid files and PGM images."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tubewf import io
from tubewf.signals import GridError, GridSignal


def _signal(rng, dim=1, n=16, domain="space"):
    s = rng.standard_normal((n,) * dim) + 1j * rng.standard_normal((n,) * dim)
    return GridSignal(dim, s, 0.125, np.full(dim, -1.0), domain)


def test_table_round_trip(tmp_path):
    p = io.write_table(tmp_path / "t.csv", ["a", "b", "c"], [(1, 0.1, True), (2, float("nan"), "x y")],
                       {"seed": 3, "space": "FL(p=2,s=1)"})
    meta, head, rows = io.read_table(p)
    assert meta == {"seed": "3", "space": "FL(p=2,s=1)"}
    assert head == ["a", "b", "c"]
    assert rows == [["1", "0.1", "true"], ["2", "nan", "x y"]]


def test_fmt_is_exact_for_floats():
    for v in (0.1, 1 / 3, -2.5e-300, 1e300):
        assert float(io.fmt(v)) == v
    assert io.fmt(np.float64(np.inf)) == "inf" and io.fmt(np.array([1, 2])) == "1 2"


def test_table_schema_error(tmp_path):
    (tmp_path / "bad.csv").write_text("a,b\n1,2\n")
    with pytest.raises(io.SchemaError):
        io.read_table(tmp_path / "bad.csv")


@pytest.mark.parametrize("dim,domain", [(1, "space"), (2, "space"), (2, "frequency")])
def test_grid_csv_round_trip_is_exact(tmp_path, rng, dim, domain):
    g = _signal(rng, dim, domain=domain)
    h = io.read_grid_csv(io.write_grid_csv(tmp_path / "g.csv", g))
    assert h.dim == dim and h.domain == domain and h.spacing == g.spacing
    assert np.array_equal(h.origin, g.origin) and np.array_equal(h.samples, g.samples)


@pytest.mark.parametrize("dim", [1, 2])
def test_grid_binary_round_trip_in_single_precision(tmp_path, rng, dim):
    g = _signal(rng, dim)
    h = io.read_grid_binary(io.write_grid_binary(tmp_path / "g.bin", g))
    assert h.dim == dim and h.n == g.n and np.array_equal(h.origin, g.origin)
    assert np.array_equal(h.samples, g.samples.astype(np.complex64).astype(complex))


def test_grid_files_reject_bad_payloads(tmp_path, rng):
    g = _signal(rng)
    p = io.write_grid_csv(tmp_path / "g.csv", g)
    lines = p.read_text().splitlines()
    (tmp_path / "short.csv").write_text("\n".join(lines[:-1]) + "\n")
    with pytest.raises(io.SchemaError, match="expected 16"):
        io.read_grid_csv(tmp_path / "short.csv")
    b = io.write_grid_binary(tmp_path / "g.bin", g)
    (tmp_path / "cut.bin").write_bytes(b.read_bytes()[:-8])
    with pytest.raises(io.SchemaError):
        io.read_grid_binary(tmp_path / "cut.bin")
    (tmp_path / "junk.bin").write_bytes(b"\0" * 80)
    with pytest.raises(io.SchemaError, match="not a tubewf"):
        io.read_grid_binary(tmp_path / "junk.bin")


def test_pgm_round_trip(tmp_path, rng):
    px = rng.integers(0, 256, (7, 11)).astype(np.uint8)
    p = io.write_pgm(tmp_path / "a.pgm", px, "note\nwith newline")
    assert p.read_text().startswith("P2\n# note with newline\n11 7\n255\n")
    assert np.array_equal(io.read_pgm(p), px)
    with pytest.raises(GridError):
        io.write_pgm(tmp_path / "b.pgm", px.astype(float))


@given(st.lists(st.floats(1e-200, 1e200), min_size=2, max_size=40))
def test_log_scale_is_monotone(vals):
    v = np.array(vals)
    px, lo, hi = io.log_scale_image(v)
    order = np.argsort(v, kind="stable")
    assert np.all(np.diff(px[order].astype(int)) >= 0)
    assert lo == pytest.approx(np.log10(v.min())) and hi == pytest.approx(np.log10(v.max()))
    if hi > lo:
        assert px.min() == 0 and px.max() == 255


def test_atomic_write_leaves_no_temp_files(tmp_path):
    io.atomic_write(tmp_path / "sub" / "x.txt", "one")
    io.atomic_write(tmp_path / "sub" / "x.txt", b"two")
    assert [q.name for q in (tmp_path / "sub").iterdir()] == ["x.txt"]
    assert (tmp_path / "sub" / "x.txt").read_text() == "two"


def test_identical_inputs_give_identical_bytes(tmp_path, rng):
    g = _signal(rng, 2)
    a = io.write_grid_csv(tmp_path / "a.csv", g).read_bytes()
    b = io.write_grid_csv(tmp_path / "b.csv", g.with_samples(g.samples.copy())).read_bytes()
    assert a == b
