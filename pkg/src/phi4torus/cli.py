"""Command-line front end: deterministic runs emitting CSV/JSON artifacts."""

from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path

import numpy as np

from .config import RunConfig, RunManifest, default_config_text, load_config
from .cylinder import dictionary
from .dynamics import SimulationUnstableError, simulate, stationary_initial
from .fields import mesh_size, single_mode_field
from .gibbs import (
    ChainConfig,
    GibbsSpec,
    check_ibp,
    check_reversibility,
    energy_solution_diagnostics,
    moment_bound_report,
    poincare_estimate,
    sample_gibbs,
)
from .noise import ModeDriver
from .renorm import (
    DASHBOARD_NORMS,
    RAW_NORMS,
    build_tree_set,
    compute_c0,
    compute_c1_lattice,
    compute_c1_tilde,
    phi_tilde,
    tree_norm_report,
)
from .serialization import write_csv, write_field, write_json_report

EXIT_CONFIG = 2
EXIT_UNSTABLE = 3


def _load(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.workers is not None:
        overrides["workers"] = args.workers
    if overrides:
        from dataclasses import replace

        cfg = replace(cfg, **overrides)
    violations = cfg.violations()
    if violations:
        for v in violations:
            print(f"config violation: {v}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)
    return cfg


def _outdir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _manifest(cfg: RunConfig, sub: str, outputs, started) -> RunManifest:
    return RunManifest(digest=cfg.digest(), subcommand=sub, seed=cfg.seed,
                       outputs=[str(o) for o in outputs],
                       wall_clock_seconds=time.time() - started)


def _probe_functions(cfg: RunConfig):
    band = cfg.sim_config().band
    k1 = (1, 0, 0)[: cfg.dim]
    k2 = (1, 1, 0)[: cfg.dim]
    return [
        ("cos1", single_mode_field(cfg.dim, band, k1, amplitude=0.5) .scaled(math.sqrt(2))),
        ("cos11", single_mode_field(cfg.dim, band, k2, amplitude=0.5).scaled(math.sqrt(2))),
    ]


# ---------------------------------------------------------------------------
# subcommands


def cmd_constants(cfg: RunConfig, args) -> list[Path]:
    out = _outdir(args)
    rows = []
    kind = args.kind
    if kind in ("c1-tilde", "phi-tilde", "c0-mollified"):
        ladder = [int(x) for x in args.eps_ladder.split(",")]
        for inv in ladder:
            eps = 1.0 / inv
            cutoff = math.ceil(1.0 / eps) + 1
            if kind == "c1-tilde":
                val = compute_c1_tilde(eps)
            elif kind == "phi-tilde":
                val = phi_tilde(eps, args.time)
            else:
                val = compute_c0(3, cutoff, "continuum", eps, mollified=True)
            rows.append([kind, repr(float(eps)), cutoff, repr(float(val)), cfg.digest()])
    else:
        ladder = [int(x) for x in (args.n_ladder or "4,8,16").split(",")]
        for n in ladder:
            eps = mesh_size(n)
            if kind == "c0-lattice":
                val = compute_c0(cfg.dim, n, "lattice", eps)
            elif kind == "c0-galerkin":
                val = compute_c0(cfg.dim, n, "continuum", eps)
            elif kind == "c1-lattice":
                val = compute_c1_lattice(n, cfg.dim)
            else:
                raise SystemExit(f"unknown constants kind {kind!r}")
            rows.append([kind, repr(float(eps)), n, repr(float(val)), cfg.digest()])
    path = out / f"constants_{kind}.csv"
    write_csv(path, ["kind", "eps", "cutoff", "value", "config_digest"], rows)
    return [path]


def cmd_sample_gibbs(cfg: RunConfig, args) -> list[Path]:
    out = _outdir(args)
    spec = GibbsSpec(cfg.dim, cfg.n_modes, cfg.mass, cfg.coupling,
                     cfg.counterterm_source)
    chain = ChainConfig(n_chains=cfg.ensemble, n_steps=args.steps,
                        burn_in=args.burn_in, thin=args.thin, seed=cfg.seed)
    sset = sample_gibbs(spec, chain)
    outputs = []
    for i, f in enumerate(sset.fields()):
        if i >= args.max_archive:
            break
        p = out / f"gibbs_sample_{i:04d}.field"
        write_field(p, f, seed=cfg.seed, digest=cfg.digest())
        outputs.append(p)
    diag = out / "gibbs_diagnostics.json"
    write_json_report(diag, {
        "acceptance": sset.acceptance, "delta": sset.delta,
        "ess": sset.ess, "rhat": sset.rhat, "n_samples": len(sset.samples),
        "config_digest": cfg.digest(), "seed": cfg.seed,
    })
    outputs.append(diag)
    return outputs


def cmd_simulate(cfg: RunConfig, args) -> list[Path]:
    out = _outdir(args)
    sim = cfg.sim_config()
    driver = ModeDriver(cfg.seed, cfg.dim, sim.band)
    state = stationary_initial(sim, driver)
    record = simulate(sim, state, driver, _probe_functions(cfg))
    outputs = []
    for t, snap in zip(record.times, record.snapshots):
        p = out / f"trajectory_t{t:.6f}.field"
        write_field(p, snap, seed=cfg.seed, digest=cfg.digest())
        outputs.append(p)
    rows = []
    stride = max(1, sim.n_steps() // 200)
    for idx in range(0, sim.n_steps() + 1, stride):
        for j, name in enumerate(record.phi_labels):
            rows.append([repr(float(record.step_times[idx])), name,
                         repr(float(record.h_path[idx, j])),
                         repr(float(record.m_path[idx, j])),
                         repr(float(record.qv_m[idx, j])),
                         repr(float(record.qv_h[idx, j])), cfg.digest()])
    acc = out / "accumulators.csv"
    write_csv(acc, ["time", "phi_id", "H", "M", "QV_M", "QV_H",
                    "config_digest"], rows)
    outputs.append(acc)
    return outputs


def _tree_member_report(payload):
    cfg_kw, kind, index_family, member = payload
    cfg = RunConfig(**cfg_kw)
    snap_times = [cfg.horizon * f for f in (0.25, 0.5, 1.0)]
    driver = ModeDriver(cfg.seed, cfg.dim,
                        cfg.n_modes + (1 if kind == "mollified" else 0),
                        member)
    trees = build_tree_set(cfg.dim, cfg.n_modes, driver, cfg.horizon,
                           cfg.delta, snap_times, kind=kind)
    return tree_norm_report(trees, kappa=cfg.kappa, index_family=index_family)


def cmd_trees(cfg: RunConfig, args) -> list[Path]:
    from dataclasses import asdict

    from .config import pool_map

    out = _outdir(args)
    kind = args.kind
    rows = []
    payloads = [(asdict(cfg), kind, args.index_family, member)
                for member in range(cfg.ensemble)]
    reports = pool_map(_tree_member_report, payloads, cfg.workers)
    for member, report in enumerate(reports):
        run_id = f"{kind}-N{cfg.n_modes}-m{member}"
        for name in DASHBOARD_NORMS + RAW_NORMS:
            rows.append([run_id, cfg.n_modes, cfg.seed, name,
                         repr(float(report[name])), cfg.digest()])
    dash = out / "tree_dashboard.csv"
    write_csv(dash, ["run_id", "N", "seed", "norm_name", "value",
                     "config_digest"], rows)
    ct_rows = []
    eps = mesh_size(cfg.n_modes)
    consts = cfg.sim_config().constants()
    ct_rows.append(["c0", repr(float(eps)), cfg.n_modes, repr(float(consts.c0)), cfg.digest()])
    ct_rows.append(["c1", repr(float(eps)), cfg.n_modes, repr(float(consts.c1)), cfg.digest()])
    ct = out / "counterterms.csv"
    write_csv(ct, ["kind", "eps", "cutoff", "value", "config_digest"], ct_rows)
    return [dash, ct]


def cmd_check(cfg: RunConfig, args) -> list[Path]:
    out = _outdir(args)
    suite = args.suite
    spec = GibbsSpec(cfg.dim, cfg.n_modes, cfg.mass, cfg.coupling,
                     cfg.counterterm_source)
    plans = {
        "reversibility": {"starts": args.starts, "pairs": 5, "t": 0.1},
        "ibp": {"samples": args.starts, "functions": 5, "modes": 3},
        "energy": {"members": max(8, cfg.ensemble), "delta": cfg.delta},
        "moments": {"sizes": [2, 4, 8], "samples_per_size": args.starts},
        "poincare": {"samples": args.starts, "dictionary": 5},
    }
    if suite not in plans:
        raise SystemExit(f"unknown suite {suite!r}")
    if args.dry_run:
        print(f"suite {suite}: planned {plans[suite]}")
        return []
    checks = []

    def add(name, estimate, se, threshold, ok):
        checks.append({"test-name": name, "estimate": estimate, "se": se,
                       "threshold": threshold, "pass": bool(ok),
                       "config_digest": cfg.digest()})

    if suite in ("reversibility", "ibp", "poincare"):
        chain = ChainConfig(n_chains=cfg.ensemble, n_steps=args.steps,
                            burn_in=args.burn_in, thin=args.thin,
                            seed=cfg.seed)
        sset = sample_gibbs(spec, chain)
        samples = sset.samples[: args.starts]
        funcs = dictionary(cfg.dim, cfg.n_modes)
        if suite == "reversibility":
            pairs = [(0, 1), (0, 2), (1, 3), (2, 4), (3, 4)]
            for a, b in pairs:
                est, se = check_reversibility(spec, funcs[a], funcs[b], 0.1,
                                              samples, delta=1e-3,
                                              seed=cfg.seed + 1)
                add(f"reversibility[{funcs[a].name},{funcs[b].name}]",
                    est, se, 3 * se, abs(est) < 3 * se + 1e-12)
        elif suite == "ibp":
            from .cylinder import _real_mode

            ks = [(1, 0, 0), (0, 1, 0), (1, 1, 0)]
            for f in funcs:
                for k in ks:
                    l = _real_mode(cfg.dim, cfg.n_modes, k[: cfg.dim])
                    est, se = check_ibp(spec, f, l, samples)
                    add(f"ibp[{f.name},k={k[:cfg.dim]}]", est, se, 3 * se,
                        abs(est) < 3 * se + 1e-12)
        else:
            best = poincare_estimate(spec, funcs, samples)
            add(f"poincare[{best['name']}]", best["constant"], 0.0,
                best["ci"][1], best["constant"] > 0)
            from .gibbs import exponential_moment_probe

            est, se = exponential_moment_probe(spec, samples, cfg.z)
            # finiteness is probed, never proved: pass = finite estimate
            add("exp_moment_probe", est, se, float("inf"),
                bool(np.isfinite(est)))
    elif suite == "energy":
        sim = cfg.sim_config()
        records = []
        for member in range(plans["energy"]["members"]):
            driver = ModeDriver(cfg.seed, cfg.dim, sim.band, member)
            x0 = stationary_initial(sim, driver)
            records.append(simulate(sim, x0, driver, _probe_functions(cfg)))
        report = energy_solution_diagnostics(records)
        from .fields import inner_product

        for (name, phi) in _probe_functions(cfg):
            target = inner_product(phi, phi) * sim.horizon
            got = report["checks"][f"qv_m[{name}]"]["estimate"]
            add(f"energy.qv_m[{name}]", got, 0.0, 0.05 * target,
                abs(got - target) < 0.05 * target)
            got_rev = report["checks"][f"qv_m_reversed[{name}]"]["estimate"]
            add(f"energy.qv_m_reversed[{name}]", got_rev, 0.0, 0.05 * target,
                abs(got_rev - target) < 0.05 * target)
            qh = report["checks"][f"qv_h[{name}]"]["estimate"]
            add(f"energy.qv_h[{name}]", qh, 0.0, 0.01 * got, qh < 0.01 * got)
            st = report["checks"][f"stationarity[{name}]"]
            add(f"energy.stationarity[{name}]", st["estimate"], st["se"],
                3 * st["se"], st["pass"])
    elif suite == "moments":
        specs, sets = [], []
        for n in plans["moments"]["sizes"]:
            s = GibbsSpec(cfg.dim, n, cfg.mass, cfg.coupling,
                          cfg.counterterm_source)
            chain = ChainConfig(n_chains=cfg.ensemble, n_steps=args.steps,
                                burn_in=args.burn_in, thin=args.thin,
                                seed=cfg.seed + n)
            sset = sample_gibbs(s, chain)
            specs.append(s)
            sets.append(sset.samples[: args.starts])
        rep = moment_bound_report(specs, sets, 1, cfg.z)
        add("moments.trend_slope", rep["slope"], rep["slope_se"],
            3 * rep["slope_se"], rep["slope"] < 3 * rep["slope_se"])

    path = out / f"check_{suite}.json"
    write_json_report(path, {"suite": suite, "checks": checks,
                             "config_digest": cfg.digest()})
    return [path]


def cmd_refine(cfg: RunConfig, args) -> list[Path]:
    out = _outdir(args)
    from .dynamics import refinement_distance

    sizes = [int(x) for x in args.sizes.split(",")]
    rows = []
    for n_coarse, n_fine in zip(sizes[:-1], sizes[1:]):
        for member in range(args.pairs):
            coarse = cfg.sim_config(n_modes=n_coarse)
            fine = cfg.sim_config(n_modes=n_fine)
            times, dists = refinement_distance(coarse, fine, cfg.seed, member)
            for t, d in zip(times, dists):
                rows.append([n_coarse, n_fine, member, repr(float(t)), repr(float(d)),
                             cfg.digest()])
    path = out / "refinement.csv"
    write_csv(path, ["n_coarse", "n_fine", "pair", "time", "distance",
                     "config_digest"], rows)
    return [path]


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="phi4torus",
                                description="quartic-field lattice simulator "
                                            "and diagnostics")
    p.add_argument("--print-defaults", action="store_true",
                   help="print the default config file and exit")
    sub = p.add_subparsers(dest="subcommand")

    def common(sp):
        sp.add_argument("--config", default=None)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--workers", type=int, default=None)
        sp.add_argument("--out-dir", default="out")
        sp.add_argument("--dry-run", action="store_true")

    sp = sub.add_parser("constants", help="counterterm tables")
    common(sp)
    sp.add_argument("--kind", required=True,
                    choices=["c0-lattice", "c0-galerkin", "c0-mollified",
                             "c1-tilde", "c1-lattice", "phi-tilde"])
    sp.add_argument("--eps-ladder", default="8,16,32",
                    help="comma list of 1/eps values (smooth-cutoff kinds)")
    sp.add_argument("--n-ladder", default=None,
                    help="comma list of N values (lattice kinds)")
    sp.add_argument("--time", type=float, default=0.1,
                    help="evaluation time for phi-tilde")

    sp = sub.add_parser("sample-gibbs", help="MCMC samples of the measure")
    common(sp)
    sp.add_argument("--steps", type=int, default=2000)
    sp.add_argument("--burn-in", type=int, default=500)
    sp.add_argument("--thin", type=int, default=5)
    sp.add_argument("--max-archive", type=int, default=8)

    sp = sub.add_parser("simulate", help="integrate the dynamics")
    common(sp)

    sp = sub.add_parser("trees", help="stochastic-object norm dashboard")
    common(sp)
    sp.add_argument("--kind", default="galerkin",
                    choices=["lattice", "galerkin", "mollified"])
    sp.add_argument("--index-family", default="sup", choices=["sup", "hyper"])

    sp = sub.add_parser("check", help="statistical test suites")
    common(sp)
    sp.add_argument("--suite", required=True,
                    choices=["reversibility", "ibp", "energy", "moments",
                             "poincare"])
    sp.add_argument("--starts", type=int, default=2000)
    sp.add_argument("--steps", type=int, default=2000)
    sp.add_argument("--burn-in", type=int, default=500)
    sp.add_argument("--thin", type=int, default=4)

    sp = sub.add_parser("refine", help="coupled refinement ladder")
    common(sp)
    sp.add_argument("--sizes", default="4,8,16")
    sp.add_argument("--pairs", type=int, default=4)
    return p


_COMMANDS = {
    "constants": cmd_constants,
    "sample-gibbs": cmd_sample_gibbs,
    "simulate": cmd_simulate,
    "trees": cmd_trees,
    "check": cmd_check,
    "refine": cmd_refine,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.print_defaults:
        print(default_config_text(), end="")
        return 0
    if not args.subcommand:
        parser.print_help()
        return 0
    started = time.time()
    cfg = _load(args)
    if getattr(args, "dry_run", False) and args.subcommand != "check":
        print(f"{args.subcommand}: config digest {cfg.digest()}, "
              f"seed {cfg.seed}, N={cfg.n_modes}, dim={cfg.dim}")
        return 0
    try:
        outputs = _COMMANDS[args.subcommand](cfg, args)
    except SimulationUnstableError as exc:
        print(f"instability: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    if outputs:
        manifest_path = Path(args.out_dir) / f"manifest_{args.subcommand}.json"
        _manifest(cfg, args.subcommand, outputs, started).write(manifest_path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
