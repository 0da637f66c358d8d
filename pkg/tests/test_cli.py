"""CLI dispatch, config validation, exit codes, determinism."""

import json
import subprocess
import sys
from pathlib import Path

import pytest

from phi4torus.cli import main
from phi4torus.config import (
    RunConfig,
    config_digest,
    default_config_text,
    parse_config,
)
from phi4torus.serialization import read_field, write_field
from phi4torus.fields import single_mode_field


def run_cli(args):
    return main(args)


# ---------------------------------------------------------------------------
# config


def test_default_config_round_trip():
    cfg = parse_config(default_config_text())
    assert cfg == RunConfig()
    assert cfg.violations() == []


def test_config_rejects_unknown_key():
    with pytest.raises(ValueError):
        parse_config("not_a_key = 3\n")


def test_config_digest_stable():
    a = RunConfig()
    b = RunConfig()
    assert a.digest() == b.digest()
    c = RunConfig(seed=99)
    assert c.digest() != a.digest()


def test_invalid_params_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("z = 0.55\nkappa = 0.01\ngamma = 0.11\n")
    with pytest.raises(SystemExit) as err:
        run_cli(["simulate", "--config", str(bad), "--out-dir",
                 str(tmp_path / "out")])
    assert err.value.code == 2
    assert "10κ+3γ < 2−3z" in capsys.readouterr().err


def test_print_defaults(capsys):
    assert run_cli(["--print-defaults"]) == 0
    out = capsys.readouterr().out
    assert "n_modes" in out and "kappa" in out


# ---------------------------------------------------------------------------
# serialization


def test_field_container_round_trip(tmp_path):
    f = single_mode_field(3, 2, (1, 0, 1), amplitude=0.3 + 0.1j)
    p = tmp_path / "x.field"
    write_field(p, f, seed=7, digest="abc123")
    g, meta = read_field(p)
    assert g.dim == 3 and g.cutoff == 2 and g.mean_zero == f.mean_zero
    assert meta["seed"] == 7 and meta["digest"] == "abc123"
    import numpy as np

    assert np.array_equal(g.coeffs, f.coeffs)


def test_field_container_rejects_garbage(tmp_path):
    p = tmp_path / "junk.field"
    p.write_bytes(b"NOPE" + b"\0" * 64)
    with pytest.raises(ValueError):
        read_field(p)


# ---------------------------------------------------------------------------
# subcommands


def test_constants_c1_ladder_increasing(tmp_path):
    out = tmp_path / "out"
    assert run_cli(["constants", "--kind", "c1-tilde",
                    "--eps-ladder", "4,8,16", "--out-dir", str(out)]) == 0
    lines = (out / "constants_c1-tilde.csv").read_text().splitlines()
    assert lines[0] == "kind,eps,cutoff,value,config_digest"
    vals = [float(line.split(",")[3]) for line in lines[1:]]
    assert len(vals) == 3
    assert vals[0] < vals[1] < vals[2]
    assert (out / "manifest_constants.json").exists()


def test_constants_c0_ladder(tmp_path):
    out = tmp_path / "out"
    assert run_cli(["constants", "--kind", "c0-lattice",
                    "--n-ladder", "2,4", "--out-dir", str(out)]) == 0
    lines = (out / "constants_c0-lattice.csv").read_text().splitlines()
    vals = [float(line.split(",")[3]) for line in lines[1:]]
    assert vals[0] < vals[1]


def test_check_dry_run(tmp_path, capsys):
    assert run_cli(["check", "--suite", "reversibility", "--dry-run",
                    "--out-dir", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "reversibility" in out and "planned" in out
    assert not list(tmp_path.glob("*.json"))


def test_simulate_smoke_and_determinism(tmp_path):
    cfg = tmp_path / "small.cfg"
    cfg.write_text("n_modes = 2\nhorizon = 0.01\ndelta = 0.001\n"
                   "record_stride = 5\nseed = 42\n")
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert run_cli(["simulate", "--config", str(cfg), "--out-dir",
                    str(out1)]) == 0
    assert run_cli(["simulate", "--config", str(cfg), "--out-dir",
                    str(out2)]) == 0
    acc1 = (out1 / "accumulators.csv").read_bytes()
    acc2 = (out2 / "accumulators.csv").read_bytes()
    assert acc1 == acc2
    fields1 = sorted(out1.glob("trajectory_*.field"))
    fields2 = sorted(out2.glob("trajectory_*.field"))
    assert fields1 and [p.read_bytes() for p in fields1] == \
        [p.read_bytes() for p in fields2]
    manifest = json.loads((out1 / "manifest_simulate.json").read_text())
    assert manifest["digest"] == parse_config(cfg.read_text()).digest()


def test_instability_exit_3(tmp_path, capsys):
    cfg = tmp_path / "exploding.cfg"
    # absurd step with no counterterm damping: ceiling set microscopically
    cfg.write_text("n_modes = 1\nhorizon = 0.4\ndelta = 0.2\ncoupling = 1.0\n"
                   "instability_ceiling = 1e-9\n")
    code = run_cli(["simulate", "--config", str(cfg), "--out-dir",
                    str(tmp_path / "out")])
    assert code == 3
    assert "instability" in capsys.readouterr().err


def test_trees_smoke(tmp_path):
    cfg = tmp_path / "t.cfg"
    cfg.write_text("n_modes = 2\nhorizon = 0.04\ndelta = 0.02\nensemble = 2\n")
    out = tmp_path / "out"
    assert run_cli(["trees", "--config", str(cfg), "--kind", "galerkin",
                    "--out-dir", str(out)]) == 0
    dash = (out / "tree_dashboard.csv").read_text().splitlines()
    assert dash[0] == "run_id,N,seed,norm_name,value,config_digest"
    assert len(dash) > 10
    assert (out / "counterterms.csv").exists()


def test_sample_gibbs_smoke(tmp_path):
    cfg = tmp_path / "g.cfg"
    cfg.write_text("n_modes = 1\nensemble = 2\ncoupling = 1.0\n")
    out = tmp_path / "out"
    assert run_cli(["sample-gibbs", "--config", str(cfg), "--steps", "300",
                    "--burn-in", "100", "--thin", "5", "--max-archive", "2",
                    "--out-dir", str(out)]) == 0
    diag = json.loads((out / "gibbs_diagnostics.json").read_text())
    assert 0 < diag["acceptance"] <= 1
    f, meta = read_field(out / "gibbs_sample_0000.field")
    assert f.cutoff == 1
    assert meta["digest"] == diag["config_digest"][:16]


def test_refine_smoke(tmp_path):
    cfg = tmp_path / "r.cfg"
    cfg.write_text("n_modes = 2\nhorizon = 0.01\ndelta = 0.001\n"
                   "record_stride = 5\nvariant = galerkin\n"
                   "counterterm_source = galerkin\n")
    out = tmp_path / "out"
    assert run_cli(["refine", "--config", str(cfg), "--sizes", "2,4",
                    "--pairs", "2", "--out-dir", str(out)]) == 0
    lines = (out / "refinement.csv").read_text().splitlines()
    assert lines[0].startswith("n_coarse,n_fine,pair,time,distance")
    assert len(lines) > 4


def test_entry_point_runs():
    proc = subprocess.run([sys.executable, "-m", "phi4torus.cli",
                           "--print-defaults"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "n_modes" in proc.stdout


def test_pool_map_matches_serial():
    from phi4torus.config import pool_map

    items = list(range(6))
    serial = pool_map(_square, items, workers=1)
    parallel = pool_map(_square, items, workers=2)
    assert serial == parallel == [i * i for i in items]


def _square(x):
    return x * x


def test_trees_with_workers(tmp_path):
    cfg = tmp_path / "t.cfg"
    cfg.write_text("n_modes = 1\nhorizon = 0.04\ndelta = 0.02\nensemble = 2\n"
                   "workers = 2\n")
    out1, out2 = tmp_path / "w2", tmp_path / "w1"
    assert run_cli(["trees", "--config", cfg.as_posix(), "--kind", "galerkin",
                    "--out-dir", out1.as_posix()]) == 0
    assert run_cli(["trees", "--config", cfg.as_posix(), "--kind", "galerkin",
                    "--workers", "1", "--out-dir", out2.as_posix()]) == 0
    # scheduling cannot change the payload (digests differ: workers is
    # part of the config, so compare the data columns only)
    strip = lambda p: [",".join(l.split(",")[:-1]) for l in
                       (p / "tree_dashboard.csv").read_text().splitlines()]
    assert strip(out1) == strip(out2)


def test_norm_report_csv(tmp_path):
    from phi4torus.serialization import write_norm_report

    p = tmp_path / "norms.csv"
    write_norm_report(p, [
        {"field_id": "phi1", "alpha": -0.5, "p": "inf", "q": "inf",
         "value": 1.25, "partition_id": "abc"},
    ], digest="d1")
    lines = p.read_text().splitlines()
    assert lines[0] == "field_id,alpha,p,q,value,partition_id,config_digest"
    assert lines[1] == "phi1,-0.5,inf,inf,1.25,abc,d1"
