#!/usr/bin/env python3
"""Stochastic-object norm dashboard across a truncation ladder.

Builds tree ensembles at several N and writes one combined dashboard CSV
(stabilization figure input). The step resolves the dispersion scale so the
raw divergences are not frozen by time discretization.

Usage: python scripts/run_dashboard_ladder.py [out_dir] [--kind galerkin]
       [--sizes 4,8] [--members 6] [--hyper]
"""

import argparse
from pathlib import Path

from phi4torus.config import RunConfig
from phi4torus.noise import ModeDriver
from phi4torus.renorm import DASHBOARD_NORMS, RAW_NORMS, build_tree_set, \
    tree_norm_report
from phi4torus.serialization import write_csv

parser = argparse.ArgumentParser()
parser.add_argument("out_dir", nargs="?", default="out/dashboard")
parser.add_argument("--kind", default="galerkin",
                    choices=["lattice", "galerkin", "mollified"])
parser.add_argument("--sizes", default="4,8")
parser.add_argument("--members", type=int, default=6)
parser.add_argument("--seed", type=int, default=2024)
parser.add_argument("--hyper", action="store_true",
                    help="moment (4,4) norms instead of sup norms")
args = parser.parse_args()

cfg = RunConfig(seed=args.seed)
out = Path(args.out_dir)
out.mkdir(parents=True, exist_ok=True)
rows = []
for n in (int(s) for s in args.sizes.split(",")):
    delta = 0.02 * (17.0 / (2 * n + 1)) ** 2
    for member in range(args.members):
        driver = ModeDriver(args.seed, 3, n + (1 if args.kind == "mollified"
                                               else 0), member)
        trees = build_tree_set(3, n, driver, 0.5, delta, [0.25, 0.5],
                               kind=args.kind)
        report = tree_norm_report(
            trees, kappa=cfg.kappa,
            index_family="hyper" if args.hyper else "sup")
        for name in DASHBOARD_NORMS + RAW_NORMS:
            rows.append([f"{args.kind}-N{n}-m{member}", n, args.seed, name,
                         repr(float(report[name])), cfg.digest()])
    print(f"N={n} done ({args.members} members)")
path = out / "tree_dashboard.csv"
write_csv(path, ["run_id", "N", "seed", "norm_name", "value",
                 "config_digest"], rows)
print(f"dashboard written to {path}")
print(f"render: node analysis/dist/cli.js stabilization --out {out}/dash.png {path}")
