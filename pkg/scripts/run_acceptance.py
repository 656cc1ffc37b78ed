"""Run every acceptance criterion and print the pass/fail table.

Usage: python scripts/run_acceptance.py [--out DIR] [--seed N] [--no-determinism]
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from tubewf.acceptance import run_suite


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("tubewf_out/accept"))
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--no-determinism", action="store_true", help="skip the rerun behind criterion 13")
    args = ap.parse_args()
    results = run_suite(args.out, args.seed, log=print, determinism=not args.no_determinism)
    failed = [r.number for r in results if not r.passed]
    print(f"\n{len(results) - len(failed)}/{len(results)} criteria pass; artifacts in {args.out}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
