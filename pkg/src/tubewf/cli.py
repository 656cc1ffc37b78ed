"""Command-line entry point: ``tubewf <command> [options]``.

Every CSV echoes the run configuration in its ``# key=value`` header lines;
outputs go to ``--out`` (default ``$TUBEWF_OUT`` or ``./tubewf_out``).
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import io
from ._parallel import set_threads
from .bf_spaces import DescriptorError, SpaceDescriptor, parse_space
from .decomp import ConeCover, CoverError, as_grid, cone_containment, cone_decompose
from .kernel import KernelConfig, TubeGuardError, eval_K, eval_K_spectral
from .signals import CATALOG, GridError, GridSignal, UnknownSourceError, catalog_names, get_model
from .tube import SpectralGrowthError, make_analytic_rep, reconstruct
from .wavefront import Verdict, WfConfig, tube_scan, wf_detect, wf_detect_inf, wf_detect_modulation

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_UNKNOWN_SOURCE = 3
EXIT_BAD_DESCRIPTOR = 4
EXIT_UNWRITABLE = 5
EXIT_BAD_INPUT = 6

DEFAULT_OUT = "tubewf_out"


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


@dataclass
class RunConfig:
    """Parsed command line; echoed into every report header."""

    command: str
    out: Path
    seed: int = 0
    threads: int | None = None
    options: dict[str, Any] = field(default_factory=dict)

    def header(self) -> dict[str, Any]:
        meta = {"command": self.command, "seed": self.seed}
        meta.update({k: v for k, v in sorted(self.options.items()) if v is not None})
        return meta


# ---------------------------------------------------------------------------
# Shared helpers


def _space(text: str) -> SpaceDescriptor:
    try:
        return parse_space(text)
    except DescriptorError as e:
        raise CliError(EXIT_BAD_DESCRIPTOR, f"bad space descriptor {text!r}: {e}") from None


def _cover(text: str, dim: int) -> ConeCover:
    try:
        return ConeCover.parse(text) if dim == 2 else ConeCover.half_lines()
    except (CoverError, ValueError) as e:
        raise CliError(EXIT_BAD_DESCRIPTOR, f"bad cone list {text!r}: {e}") from None


def _source(cfg: RunConfig):
    """Catalog model (by name) or grid signal (from a .csv or binary file)."""
    path = cfg.options.get("input")
    if path:
        try:
            return io.read_grid_csv(path) if str(path).endswith(".csv") else io.read_grid_binary(path)
        except (OSError, io.SchemaError, GridError) as e:
            raise CliError(EXIT_BAD_INPUT, f"cannot read grid {path}: {e}") from None
    name = cfg.options.get("source")
    if name is None:
        raise CliError(EXIT_USAGE, "one of --source or --input is required")
    try:
        return get_model(name)
    except UnknownSourceError:
        raise CliError(EXIT_UNKNOWN_SOURCE, f"unknown source {name!r}; see `tubewf catalog`") from None


def _out_dir(cfg: RunConfig) -> Path:
    out = cfg.out
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".tubewf-probe"
        probe.write_bytes(b"")
        probe.unlink()
    except OSError as e:
        raise CliError(EXIT_UNWRITABLE, f"output directory {out} is not writable: {e.strerror or e}") from None
    return out


def _base_points(dim: int, n: int, extent: float | None) -> np.ndarray:
    if extent is None:
        extent = 4.0 if dim == 1 else 1.0
    t = np.linspace(-extent, extent, n)
    if dim == 1:
        return t
    X, Y = np.meshgrid(t, t, indexing="ij")
    return np.stack([X.ravel(), Y.ravel()], axis=1)


def _image(out: Path, stem: str, values: np.ndarray, meta: dict, columns, rows, note: str) -> None:
    """Log-scale PGM plus its sibling CSV carrying the numbers and the scale."""
    px, lo, hi = io.log_scale_image(values)
    io.write_pgm(out / f"{stem}.pgm", px, note)
    io.write_table(out / f"{stem}.csv", columns, rows, {**meta, "log10_min": lo, "log10_max": hi})


# ---------------------------------------------------------------------------
# Commands


def cmd_catalog(cfg: RunConfig) -> int:
    dim = cfg.options.get("dim")
    rows = []
    for name in catalog_names(dim):
        m = CATALOG[name]
        rows.append((name, m.dim, m.compact, m.spectral_sampling, m.description))
        print(f"{name:16s} d={m.dim}  {m.description}")
    if cfg.options.get("write"):
        io.write_table(_out_dir(cfg) / "catalog.csv", ["name", "dim", "compact", "spectral_sampling", "description"],
                       rows, cfg.header())
    return EXIT_OK


def _kernel_value(dim: int, x, y) -> tuple[complex, float]:
    """K(x + i y) and an error estimate from a second, finer quadrature."""
    val = eval_K(dim, (tuple(x), tuple(y)))
    ay = float(np.hypot(*y)) if dim == 2 else abs(y[0])
    wide = KernelConfig(dim=dim, truncation_radius=2 * KernelConfig(dim=dim).radius_for(ay))
    fine = eval_K_spectral(dim, x, y, wide)
    coarse = eval_K_spectral(dim, x, y)
    return val, max(abs(val - fine), abs(coarse - fine))


def cmd_kernel_eval(cfg: RunConfig) -> int:
    o = cfg.options
    x, y = o["x"], o["y"]
    if len(x) != o["dim"] or len(y) != o["dim"]:
        raise CliError(EXIT_USAGE, f"--x and --y need {o['dim']} values each")
    try:
        val, err = _kernel_value(o["dim"], x, y)
    except (TubeGuardError, ValueError) as e:
        raise CliError(EXIT_BAD_INPUT, str(e)) from None
    print(f"K = {val.real:.16g} {val.imag:+.16g}i  (error estimate {err:.3g})")
    return EXIT_OK


def cmd_kernel_map(cfg: RunConfig) -> int:
    o = cfg.options
    d, n = o["dim"], o["n"]
    xs = np.linspace(*o["x_range"], n)
    ys = np.linspace(*o["y_range"], n)
    vals = np.empty((n, n), dtype=complex)
    try:
        for i, y in enumerate(ys):
            for k, x in enumerate(xs):
                vals[i, k] = eval_K(d, ((x,) + (0.0,) * (d - 1), (y,) + (0.0,) * (d - 1)))
    except TubeGuardError as e:
        raise CliError(EXIT_BAD_INPUT, str(e)) from None
    rows = [(x, y, vals[i, k].real, vals[i, k].imag) for i, y in enumerate(ys) for k, x in enumerate(xs)]
    out = _out_dir(cfg)
    _image(out, "kernel_map", vals, cfg.header(), ["x1", "y1", "re", "im"], rows,
           "log10|K|; rows y1 ascending, columns x1 ascending; other coordinates 0")
    print(f"wrote {out / 'kernel_map.pgm'} and kernel_map.csv")
    return EXIT_OK


def _rep(f):
    try:
        return make_analytic_rep(f)
    except SpectralGrowthError:
        w = WfConfig()
        return make_analytic_rep(as_grid(f, w.grid_n(f.dim), w.spacing(f.dim)))


def cmd_tube_map(cfg: RunConfig) -> int:
    o = cfg.options
    f = _source(cfg)
    F = _rep(f)
    n, d = o["n"], F.dim
    xs = np.linspace(*o["x_range"], n)
    ys = np.linspace(*o["y_range"], n)
    if np.max(np.abs(ys)) >= 1.0 - 1e-4:
        raise CliError(EXIT_BAD_INPUT, "--y-range must stay inside |y| < 1 - 1e-4")
    vals = np.array([[F.evaluate((x,) + (0.0,) * (d - 1), (y,) + (0.0,) * (d - 1)) for x in xs] for y in ys])
    rows = [(x, y, vals[i, k].real, vals[i, k].imag) for i, y in enumerate(ys) for k, x in enumerate(xs)]
    out = _out_dir(cfg)
    _image(out, "tube_map", vals, cfg.header(), ["x1", "y1", "re", "im"], rows,
           "log10|F|; rows y1 ascending, columns x1 ascending; other coordinates 0")
    print(f"wrote {out / 'tube_map.pgm'} and tube_map.csv")
    return EXIT_OK


def cmd_reconstruct_check(cfg: RunConfig) -> int:
    o = cfg.options
    f = _source(cfg)
    if f.dim != 1:
        raise CliError(EXIT_BAD_INPUT, "reconstruct-check works on d = 1 sources")
    F = _rep(f)
    n, dx = 1024, 0.02
    x = -(n // 2) * dx + dx * np.arange(n)
    phi = GridSignal(1, np.exp(-((x - o["test_center"]) ** 2) / 2), dx, np.array([x[0]]))
    exact = F.source_pairing(phi)
    eps_list = o["eps"] or [2.0**-k for k in range(4, 15)]
    rows = []
    print(f"{'eps':>12s} {'rel_err':>12s}")
    for eps in eps_list:
        err = abs(reconstruct(F, phi, eps) - exact) / abs(exact)
        rows.append((eps, err))
        print(f"{eps:12.4e} {err:12.4e}")
    io.write_table(_out_dir(cfg) / "reconstruct_check.csv", ["eps", "rel_err"], rows, cfg.header())
    return EXIT_OK


def cmd_wf_scan(cfg: RunConfig) -> int:
    o = cfg.options
    f = _source(cfg)
    spaces = [_space(s) for s in o["space"]]
    wcfg = WfConfig(bins=o["bins"], margin=o["margin"], radius=o["radius"])
    pts = _base_points(f.dim, o["base_grid"], o["extent"])
    mode = o["mode"]
    if mode == "inf":
        rep = wf_detect_inf(f, spaces, pts, wcfg)
    else:
        if len(spaces) != 1:
            raise CliError(EXIT_USAGE, f"--mode {mode} takes exactly one --space")
        detector = {"fourier": wf_detect, "modulation": wf_detect_modulation, "tube": tube_scan}[mode]
        rep = detector(f, spaces[0], pts, wcfg)
    out = _out_dir(cfg)
    rows = [(io.fmt(r["x"]), r["angle"], r["alpha"], r["tau"], r["verdict"], r["margin"])
            for r in rep.rows()]
    io.write_table(out / "wf_scan.csv", ["x", "bin_axis_angle", "alpha", "tau", "verdict", "margin"], rows,
                   cfg.header())
    v = rep.verdicts()
    code = {Verdict.REGULAR.value: 0, Verdict.INCONCLUSIVE.value: 128, Verdict.IN_WF.value: 255}
    px = np.vectorize(code.get)(v.T).astype(np.uint8)
    io.write_pgm(out / "wf_direction_map.pgm", px,
                 "rows: bins; columns: base points; 0 REGULAR 128 INCONCLUSIVE 255 IN_WF")
    io.write_table(out / "wf_direction_map.csv", ["bin"] + [f"p{i}" for i in range(len(pts))],
                   [(k,) + tuple(v[:, k]) for k in range(rep.D)],
                   {**cfg.header(), "pixel_map": "REGULAR=0 INCONCLUSIVE=128 IN_WF=255"})
    flagged = sorted(rep.flagged())
    print(f"{len(flagged)} flagged cells of {v.size}; wrote {out / 'wf_scan.csv'}")
    for i, k in flagged:
        print(f"  IN_WF at x={io.fmt(np.atleast_1d(pts[i]))} bin {k}")
    return EXIT_OK


def cmd_decompose(cfg: RunConfig) -> int:
    o = cfg.options
    f = _source(cfg)
    cover = _cover(o["cones"], f.dim)
    sp = _space(o["space"][0])
    wcfg = WfConfig()
    g = f if isinstance(f, GridSignal) else as_grid(f, wcfg.grid_n(f.dim), wcfg.spacing(f.dim))
    try:
        cover.validate()
        pieces = cone_decompose(g, cover, route=o["route"])
    except CoverError as e:
        raise CliError(EXIT_BAD_DESCRIPTOR, f"cone list does not cover all directions: {e}") from None
    out = _out_dir(cfg)
    for j, p in enumerate(pieces):
        io.write_grid_csv(out / f"piece_{j}.csv", p)
    pts = _base_points(g.dim, o["base_grid"], o["extent"])
    res = cone_containment(g, pieces, cover, sp, pts, wcfg)
    rel = float(np.linalg.norm(sum(p.samples for p in pieces) - g.samples) / np.linalg.norm(g.samples))
    rows = [(c.name, c.passed, c.flagged, " ".join(f"{i}:{k}" for i, k in c.violations)) for c in res]
    io.write_table(out / "containment.csv", ["piece", "passed", "flagged", "violations"], rows,
                   {**cfg.header(), "resummation_rel_err": rel})
    print(f"resummation relative error {rel:.3g}")
    for c in res:
        print(f"  {c.name}: {'ok' if c.passed else 'VIOLATION'} ({c.flagged} flagged)")
    return EXIT_OK if all(c.passed for c in res) else EXIT_FAILED


def cmd_accept(cfg: RunConfig) -> int:
    from .acceptance import run_criteria, run_suite

    out = _out_dir(cfg)
    only = cfg.options.get("only")
    if only:
        results = run_criteria(out, cfg.seed, only=set(only), log=print)
    else:
        results = run_suite(out, cfg.seed, log=print)
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed" + (f"; failed: {failed}" if failed else ""))
    return EXIT_OK if not failed else EXIT_FAILED


COMMANDS = {
    "catalog": cmd_catalog,
    "kernel-eval": cmd_kernel_eval,
    "kernel-map": cmd_kernel_map,
    "tube-map": cmd_tube_map,
    "reconstruct-check": cmd_reconstruct_check,
    "wf-scan": cmd_wf_scan,
    "decompose": cmd_decompose,
    "accept": cmd_accept,
}


# ---------------------------------------------------------------------------
# Argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, default=None, help="output directory (default $TUBEWF_OUT or ./tubewf_out)")
    common.add_argument("--threads", type=int, default=None, help="cap on worker threads")
    common.add_argument("--seed", type=int, default=0)

    src = argparse.ArgumentParser(add_help=False)
    src.add_argument("--source", help="catalog name")
    src.add_argument("--input", help="grid file (.csv, or the binary format otherwise)")

    p = argparse.ArgumentParser(prog="tubewf", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("catalog", parents=[common], help="list catalog entries")
    s.add_argument("--dim", type=int, choices=(1, 2))
    s.add_argument("--write", action="store_true", help="also write catalog.csv")

    s = sub.add_parser("kernel-eval", parents=[common], help="evaluate the tube kernel at one point")
    s.add_argument("--dim", type=int, choices=(1, 2), default=1)
    s.add_argument("--x", type=float, nargs="+", required=True)
    s.add_argument("--y", type=float, nargs="+", required=True)

    for name, helptext, parents in (("kernel-map", "heatmap of |K| over a tube rectangle", [common]),
                                    ("tube-map", "heatmap of |F| for a source", [common, src])):
        s = sub.add_parser(name, parents=parents, help=helptext)
        if name == "kernel-map":
            s.add_argument("--dim", type=int, choices=(1, 2), default=1)
        s.add_argument("--x-range", type=float, nargs=2, default=(-4.0, 4.0))
        s.add_argument("--y-range", type=float, nargs=2, default=(-0.9, 0.9))
        s.add_argument("--n", type=int, default=64)

    s = sub.add_parser("reconstruct-check", parents=[common, src], help="pairing error of the reconstruction")
    s.add_argument("--eps", type=float, nargs="+")
    s.add_argument("--test-center", type=float, default=0.3)

    s = sub.add_parser("wf-scan", parents=[common, src], help="wave-front detector scan")
    s.add_argument("--space", action="append", help='e.g. "FL(p=2,s=1)"; repeat for --mode inf')
    s.add_argument("--mode", choices=("fourier", "modulation", "inf", "tube"), default="fourier")
    s.add_argument("--bins", type=int, default=16)
    s.add_argument("--base-grid", type=int, default=17, help="points per axis")
    s.add_argument("--extent", type=float, default=None, help="base grid spans [-extent, extent]")
    s.add_argument("--margin", type=float, default=0.15)
    s.add_argument("--radius", type=float, default=0.35)

    s = sub.add_parser("decompose", parents=[common, src], help="cone decomposition with containment report")
    s.add_argument("--cones", default="0:45,90:45,180:45,270:45", help="axis:half-angle list in degrees (d = 2)")
    s.add_argument("--space", action="append")
    s.add_argument("--route", choices=("smooth", "sharp"), default="smooth")
    s.add_argument("--base-grid", type=int, default=3)
    s.add_argument("--extent", type=float, default=0.3)

    s = sub.add_parser("accept", parents=[common], help="run the acceptance suite")
    s.add_argument("--only", type=int, nargs="+", help="criterion numbers (skips the determinism rerun)")
    return p


def parse_config(argv: Sequence[str] | None = None) -> RunConfig:
    ns = vars(build_parser().parse_args(argv))
    command = ns.pop("command")
    out = ns.pop("out") or Path(os.environ.get("TUBEWF_OUT", DEFAULT_OUT))
    seed, threads = ns.pop("seed"), ns.pop("threads")
    if "space" in ns and not ns["space"]:
        ns["space"] = ["FL(p=2,s=1)"]
    ns = {k: (list(v) if isinstance(v, tuple) else v) for k, v in ns.items()}
    return RunConfig(command, Path(out), seed, threads, ns)


def run(cfg: RunConfig) -> int:
    if cfg.threads is not None:
        set_threads(cfg.threads)
    np.random.seed(cfg.seed)
    return COMMANDS[cfg.command](cfg)


def main(argv: Sequence[str] | None = None) -> int:
    try:
        cfg = parse_config(argv)
        return run(cfg)
    except CliError as e:
        print(f"tubewf: error: {e}", file=sys.stderr)
        return e.code
    except PermissionError as e:
        print(f"tubewf: error: cannot write output: {e}", file=sys.stderr)
        return EXIT_UNWRITABLE


if __name__ == "__main__":
    sys.exit(main())
