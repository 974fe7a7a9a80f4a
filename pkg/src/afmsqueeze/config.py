"""Run configuration: YAML file, schema version 1.

Every key is optional; omitted keys take the documented defaults::

    version: 1
    model:   {S: 1.0, J: 1.0, K_z: 0.01, kBT: 1.0}
    lattice: {kind: square, a_c: 1.0, grid: 64}
    path:    {points: [G, X, M, G], samples_per_segment: 8}
    sweeps:
      kBT: {start: 0.1, stop: 1.0, steps: 10}
      K_z: {start: 0.005, stop: 0.2, steps: 14}
    states: [[0, 0], [1, 0], [0, 1], [1, 1]]
    eps_trunc: 1.0e-12
    polar_samples: 91
    correlation_min_K_z: 0.005
    solver:  {tol: 1.0e-10, max_iter: 200, damping: 0.5,
              T_floor: 1.0e-3, K_floor: 1.0e-4, update_pairs: false}
    output:  {dir: out, figures: all}
    workers: null          # null: number of CPUs
    seed: null             # recorded only; nothing is random
    verify:  {cutoff: 80, hamiltonian_cutoff: 60, r_values: [0.3, 0.8, 1.2]}
"""

import os
from dataclasses import dataclass, field, fields
from typing import Optional

import numpy as np
import yaml

from .errors import ConfigurationError
from .lattice import BZPath, LatticeSpec
from .spinwave import ModelParams

SCHEMA_VERSION = 1
FIGURE_IDS = tuple(f"fig{i}" for i in range(1, 13))


@dataclass(frozen=True)
class Sweep:
    start: float
    stop: float
    steps: int

    def values(self):
        if self.steps == 1:
            return np.array([float(self.start)])
        return np.linspace(self.start, self.stop, self.steps)


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-10
    max_iter: int = 200
    damping: float = 0.5
    T_floor: float = 1e-3
    K_floor: float = 1e-4
    update_pairs: bool = False

    def kwargs(self):
        return dict(tol=self.tol, max_iter=self.max_iter, damping=self.damping,
                    update_pairs=self.update_pairs)


@dataclass(frozen=True)
class VerifyConfig:
    cutoff: int = 80
    hamiltonian_cutoff: int = 60
    r_values: tuple = (0.3, 0.8, 1.2)


@dataclass(frozen=True)
class RunConfig:
    model: ModelParams = field(default_factory=ModelParams)
    grid: int = 64
    path: BZPath = field(default_factory=BZPath)
    sweep_kBT: Sweep = Sweep(0.1, 1.0, 10)
    sweep_K_z: Sweep = Sweep(0.005, 0.2, 14)
    states: tuple = ((0, 0), (1, 0), (0, 1), (1, 1))
    eps_trunc: float = 1e-12
    polar_samples: int = 91
    correlation_min_K_z: float = 0.005
    solver: SolverConfig = SolverConfig()
    out_dir: str = "out"
    figures: tuple = FIGURE_IDS
    workers: int = field(default_factory=lambda: os.cpu_count() or 1)
    seed: Optional[int] = None
    verify: VerifyConfig = VerifyConfig()

    def to_dict(self):
        """Plain-data echo of the configuration for metadata files."""
        m = self.model
        return {
            "version": SCHEMA_VERSION,
            "model": {"S": m.S, "J": m.J, "K_z": m.K_z, "kBT": m.kBT},
            "lattice": {"kind": m.lattice.kind, "a_c": m.lattice.a_c, "grid": self.grid},
            "path": {"points": list(self.path.labels),
                     "samples_per_segment": self.path.samples_per_segment},
            "sweeps": {
                "kBT": vars(self.sweep_kBT).copy(),
                "K_z": vars(self.sweep_K_z).copy(),
            },
            "states": [list(s) for s in self.states],
            "eps_trunc": self.eps_trunc,
            "polar_samples": self.polar_samples,
            "correlation_min_K_z": self.correlation_min_K_z,
            "solver": {f.name: getattr(self.solver, f.name) for f in fields(self.solver)},
            "seed": self.seed,
        }


_SCHEMA = {
    "version": None,
    "model": {"S": None, "J": None, "K_z": None, "kBT": None},
    "lattice": {"kind": None, "a_c": None, "grid": None},
    "path": {"points": None, "samples_per_segment": None},
    "sweeps": {
        "kBT": {"start": None, "stop": None, "steps": None},
        "K_z": {"start": None, "stop": None, "steps": None},
    },
    "states": None,
    "eps_trunc": None,
    "polar_samples": None,
    "correlation_min_K_z": None,
    "solver": {k: None for k in ("tol", "max_iter", "damping", "T_floor", "K_floor", "update_pairs")},
    "output": {"dir": None, "figures": None},
    "workers": None,
    "seed": None,
    "verify": {"cutoff": None, "hamiltonian_cutoff": None, "r_values": None},
}


def _check_keys(tree, schema, prefix=""):
    if not isinstance(tree, dict):
        raise ConfigurationError(f"{prefix or '<root>'}: expected a mapping, got {type(tree).__name__}")
    for key, value in tree.items():
        path = f"{prefix}.{key}" if prefix else str(key)
        if key not in schema:
            raise ConfigurationError(f"{path}: unknown key")
        if isinstance(schema[key], dict) and value is not None:
            _check_keys(value, schema[key], path)


def _get(tree, dotted, default):
    node = tree
    for part in dotted.split("."):
        if not isinstance(node, dict) or node.get(part) is None:
            return default
        node = node[part]
    return node


def _number(tree, key, default, kind=float, check=None, message=""):
    raw = _get(tree, key, default)
    if isinstance(raw, bool) and kind is not bool:
        raise ConfigurationError(f"{key}: expected a number, got {raw!r}")
    try:
        value = kind(raw)
    except (TypeError, ValueError):
        raise ConfigurationError(f"{key}: expected {kind.__name__}, got {raw!r}") from None
    if kind is int and float(raw) != value:
        raise ConfigurationError(f"{key}: expected an integer, got {raw!r}")
    if check is not None and not check(value):
        raise ConfigurationError(f"{key}: {message} (got {value!r})")
    return value


def _sweep(tree, name, default: Sweep):
    base = f"sweeps.{name}"
    start = _number(tree, f"{base}.start", default.start)
    stop = _number(tree, f"{base}.stop", default.stop)
    steps = _number(tree, f"{base}.steps", default.steps, int, lambda v: v >= 1, "must be >= 1")
    if steps > 1 and start == stop:
        raise ConfigurationError(f"{base}: degenerate range start == stop with steps > 1")
    lower = 0.0
    if min(start, stop) < lower:
        raise ConfigurationError(f"{base}: values must be >= 0")
    return Sweep(start, stop, steps)


def parse_config(text: Optional[str]) -> RunConfig:
    """Parse and validate YAML configuration text."""
    try:
        tree = yaml.safe_load(text or "")
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        problem = getattr(exc, "problem", None) or str(exc)
        raise ConfigurationError(f"config syntax error{where}: {problem}") from None
    tree = tree or {}
    _check_keys(tree, _SCHEMA)
    d = RunConfig()

    version = _get(tree, "version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigurationError(f"version: unsupported schema version {version!r}")

    try:
        lattice = LatticeSpec(kind=str(_get(tree, "lattice.kind", "square")),
                              a_c=_number(tree, "lattice.a_c", 1.0))
    except ConfigurationError as exc:
        raise ConfigurationError(f"lattice: {exc}") from None
    model = ModelParams(
        S=_number(tree, "model.S", d.model.S, check=lambda v: v > 0, message="must be > 0"),
        J=_number(tree, "model.J", d.model.J, check=lambda v: v > 0, message="must be > 0"),
        K_z=_number(tree, "model.K_z", d.model.K_z, check=lambda v: v >= 0, message="must be >= 0"),
        kBT=_number(tree, "model.kBT", d.model.kBT, check=lambda v: v >= 0, message="must be >= 0"),
        lattice=lattice,
    )
    grid = _number(tree, "lattice.grid", d.grid, int, lambda v: v >= 1, "must be >= 1")

    points = _get(tree, "path.points", list(d.path.labels))
    if not isinstance(points, list):
        raise ConfigurationError("path.points: expected a list of labels")
    try:
        path = BZPath(labels=tuple(points),
                      samples_per_segment=_number(tree, "path.samples_per_segment",
                                                  d.path.samples_per_segment, int))
        valid = lattice.special_points()
        bad = [p for p in path.labels if p not in valid]
        if bad:
            raise ConfigurationError(f"unknown label(s) {bad}; valid: {sorted(valid)}")
    except ConfigurationError as exc:
        raise ConfigurationError(f"path: {exc}") from None

    raw_states = _get(tree, "states", [list(s) for s in d.states])
    try:
        states = tuple((int(n), int(m)) for n, m in raw_states)
    except (TypeError, ValueError):
        raise ConfigurationError("states: expected a list of [n, m] pairs") from None
    if not states or any(n < 0 or m < 0 for n, m in states):
        raise ConfigurationError("states: need at least one pair of non-negative integers")

    solver = SolverConfig(
        tol=_number(tree, "solver.tol", d.solver.tol, check=lambda v: v > 0, message="must be > 0"),
        max_iter=_number(tree, "solver.max_iter", d.solver.max_iter, int, lambda v: v >= 1, "must be >= 1"),
        damping=_number(tree, "solver.damping", d.solver.damping,
                        check=lambda v: 0 < v <= 1, message="must lie in (0, 1]"),
        T_floor=_number(tree, "solver.T_floor", d.solver.T_floor, check=lambda v: v > 0, message="must be > 0"),
        K_floor=_number(tree, "solver.K_floor", d.solver.K_floor, check=lambda v: v > 0, message="must be > 0"),
        update_pairs=bool(_get(tree, "solver.update_pairs", d.solver.update_pairs)),
    )

    figures = _get(tree, "output.figures", "all")
    if figures == "all":
        figures = FIGURE_IDS
    if isinstance(figures, str):
        figures = [figures]
    unknown = [f for f in figures if f not in FIGURE_IDS]
    if unknown:
        raise ConfigurationError(f"output.figures: unknown figure id(s) {unknown}")

    workers_raw = _get(tree, "workers", None)
    workers = d.workers if workers_raw is None else _number(
        tree, "workers", None, int, lambda v: v >= 1, "must be >= 1")

    seed = _get(tree, "seed", None)
    r_values = _get(tree, "verify.r_values", list(d.verify.r_values))
    try:
        r_values = tuple(float(r) for r in r_values)
    except (TypeError, ValueError):
        raise ConfigurationError("verify.r_values: expected a list of numbers") from None

    return RunConfig(
        model=model,
        grid=grid,
        path=path,
        sweep_kBT=_sweep(tree, "kBT", d.sweep_kBT),
        sweep_K_z=_sweep(tree, "K_z", d.sweep_K_z),
        states=states,
        eps_trunc=_number(tree, "eps_trunc", d.eps_trunc, check=lambda v: 0 < v < 1,
                          message="must lie in (0, 1)"),
        polar_samples=_number(tree, "polar_samples", d.polar_samples, int, lambda v: v >= 2, "must be >= 2"),
        correlation_min_K_z=_number(tree, "correlation_min_K_z", d.correlation_min_K_z,
                                    check=lambda v: v >= 0, message="must be >= 0"),
        solver=solver,
        out_dir=str(_get(tree, "output.dir", d.out_dir)),
        figures=tuple(figures),
        workers=workers,
        seed=None if seed is None else int(seed),
        verify=VerifyConfig(
            cutoff=_number(tree, "verify.cutoff", d.verify.cutoff, int, lambda v: v >= 1, "must be >= 1"),
            hamiltonian_cutoff=_number(tree, "verify.hamiltonian_cutoff", d.verify.hamiltonian_cutoff,
                                       int, lambda v: v >= 1, "must be >= 1"),
            r_values=r_values,
        ),
    )


def load_config(path: Optional[str]) -> RunConfig:
    if path is None:
        return parse_config("")
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
