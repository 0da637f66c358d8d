#!/usr/bin/env python3
"""Counterterm divergence ladders: emits CSV tables ready for the figure tool.

Usage: python scripts/run_constants_ladders.py [out_dir]
"""

import sys

from phi4torus.cli import main

out = sys.argv[1] if len(sys.argv) > 1 else "out/constants"

for kind, flag, ladder in [
    ("c0-lattice", "--n-ladder", "4,8,16,32"),
    ("c0-galerkin", "--n-ladder", "4,8,16,32"),
    ("c1-tilde", "--eps-ladder", "8,16,32,64"),
    ("c1-lattice", "--n-ladder", "2,4,8,16"),
]:
    code = main(["constants", "--kind", kind, flag, ladder, "--out-dir", out])
    if code != 0:
        sys.exit(code)
print(f"constants ladders written under {out}/")
print("render e.g.: node analysis/dist/cli.js divergence-fit "
      f"--out {out}/c0.png {out}/constants_c0-lattice.csv")
