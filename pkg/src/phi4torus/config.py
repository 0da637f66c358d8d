"""Run configuration: a flat key = value text file, digests, and manifests.

The config format is one `key = value` pair per line (# comments allowed);
unknown keys are rejected so typos fail loudly.  A run's digest is the
sha256 of the canonicalized (sorted, normalized) key/value list, so any two
runs with the same digest are byte-reproducible.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .fields import RegularityParams, validate_parameters

__all__ = ["RunConfig", "RunManifest", "parse_config", "default_config_text",
           "config_digest"]

_DEFAULTS = {
    # discretization
    "dim": (3, "spatial dimension (2 or 3)"),
    "n_modes": (4, "frequency cutoff N; the lattice has (2N+1)^dim sites"),
    "delta": (1e-3, "time step (dimensionless heat time)"),
    "horizon": (0.25, "integration horizon T"),
    # regularity triple
    "z": (0.55, "base negative regularity exponent, in (1/2, 2/3)"),
    "kappa": (0.004, "small regularity margin"),
    "gamma": (0.10, "remainder regularity"),
    # physics
    "mass": (1.0, "mass m >= 0"),
    "coupling": (0.1, "quartic coupling lambda"),
    "variant": ("lattice", "equation variant: lattice | galerkin | mollified"),
    "counterterm_source": ("lattice", "lattice | galerkin | mollified | none"),
    "mean_zero": (True, "exclude the k = 0 mode"),
    # run control
    "seed": (12345, "master seed; all randomness derives from it"),
    "ensemble": (8, "ensemble members / chains"),
    "record_stride": (50, "steps between recorded snapshots"),
    "workers": (1, "worker processes for ensemble members"),
    "instability_ceiling": (1e6, "sitewise magnitude abort threshold"),
}


@dataclass(frozen=True)
class RunConfig:
    dim: int = 3
    n_modes: int = 4
    delta: float = 1e-3
    horizon: float = 0.25
    z: float = 0.55
    kappa: float = 0.004
    gamma: float = 0.10
    mass: float = 1.0
    coupling: float = 0.1
    variant: str = "lattice"
    counterterm_source: str = "lattice"
    mean_zero: bool = True
    seed: int = 12345
    ensemble: int = 8
    record_stride: int = 50
    workers: int = 1
    instability_ceiling: float = 1e6

    def params(self) -> RegularityParams:
        return RegularityParams(self.z, self.kappa, self.gamma)

    def violations(self) -> list[str]:
        out = validate_parameters(self.params())
        if self.dim not in (2, 3):
            out.append("dim ∈ {2, 3}")
        if self.delta <= 0:
            out.append("δ > 0")
        if self.horizon < self.delta:
            out.append("T ≥ δ")
        if self.variant not in ("lattice", "galerkin", "mollified"):
            out.append("variant ∈ {lattice, galerkin, mollified}")
        return out

    def digest(self) -> str:
        return config_digest(asdict(self))

    def sim_config(self, **overrides):
        from .dynamics import SimConfig

        kw = dict(dim=self.dim, n_modes=self.n_modes, delta=self.delta,
                  horizon=self.horizon, params=self.params(), m=self.mass,
                  lam=self.coupling, seed=self.seed, ensemble=self.ensemble,
                  record_stride=self.record_stride, variant=self.variant,
                  counterterm_source=self.counterterm_source,
                  mean_zero=self.mean_zero,
                  instability_ceiling=self.instability_ceiling)
        kw.update(overrides)
        return SimConfig(**kw)


def config_digest(payload: dict) -> str:
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"),
                       default=str)
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _coerce(key: str, raw: str):
    default = _DEFAULTS[key][0]
    if isinstance(default, bool):
        if raw.lower() in ("true", "1", "yes", "on"):
            return True
        if raw.lower() in ("false", "0", "no", "off"):
            return False
        raise ValueError(f"{key}: expected a boolean, got {raw!r}")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw


def parse_config(text: str) -> RunConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ValueError(f"line {lineno}: expected key = value")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in _DEFAULTS:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        values[key] = _coerce(key, raw)
    return RunConfig(**values)


def load_config(path) -> RunConfig:
    return parse_config(Path(path).read_text())


def default_config_text() -> str:
    lines = ["# phi4torus run configuration (key = value; # starts a comment)"]
    for key, (default, doc) in _DEFAULTS.items():
        lines.append(f"{key} = {default}    # {doc}")
    return "\n".join(lines) + "\n"


def pool_map(fn, items, workers: int = 1):
    """Map over ensemble members, optionally across worker processes.

    Results are merged in item order, so scheduling cannot change outputs.
    """
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    import multiprocessing as mp

    with mp.Pool(min(workers, len(items))) as pool:
        return pool.map(fn, items)


@dataclass
class RunManifest:
    """Record of one invocation; identical manifests imply identical outputs."""

    digest: str
    subcommand: str
    seed: int
    outputs: list[str] = field(default_factory=list)
    tool_version: str = "0.1.0"
    wall_clock_seconds: float = 0.0
    generator: str = "philox4x64 counter=(0, step, purpose, member)"
    created_unix: float = field(default_factory=time.time)

    def write(self, path) -> None:
        Path(path).write_text(json.dumps(asdict(self), indent=2, sort_keys=True)
                              + "\n")
