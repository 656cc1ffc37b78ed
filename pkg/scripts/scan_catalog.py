"""Fourier and tube-side wave-front scans of every d = 1 catalog entry.

Writes one CSV per space with the flagged (point, direction) cells of both
detectors and whether they agree.

Usage: python scripts/scan_catalog.py [--out DIR] [--space "FL(p=2,s=1)" ...]
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from tubewf import WfConfig, catalog_names, get_model, parse_space, tube_scan, wf_detect
from tubewf.io import write_table


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("tubewf_out/scan"))
    ap.add_argument("--space", action="append", default=None)
    ap.add_argument("--points", type=int, default=17)
    args = ap.parse_args()
    spaces = args.space or ["FL(p=2,s=-2)", "FL(p=2,s=0)", "FL(p=2,s=1)"]
    cfg = WfConfig()
    pts = np.linspace(-4, 4, args.points)
    for text in spaces:
        sp = parse_space(text)
        rows = []
        for name in catalog_names(1):
            f = get_model(name)
            a = wf_detect(f, sp, pts, cfg).flagged()
            b = tube_scan(f, sp, pts, cfg).flagged()
            cells = " ".join(f"{pts[i]:g}:{'+' if k == 0 else '-'}" for i, k in sorted(a)) or "none"
            rows.append((name, cells, len(a), len(b), a == b))
            print(f"{text:14s} {name:16s} {cells:28s} {'agree' if a == b else 'DISAGREE'}")
        stem = text.replace("(", "_").replace(")", "").replace("=", "").replace(",", "_")
        write_table(args.out / f"{stem}.csv", ["source", "fourier_flags", "n_fourier", "n_tube", "agree"], rows,
                    {"space": text})


if __name__ == "__main__":
    main()
