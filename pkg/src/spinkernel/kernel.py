"""Fidelity kernels: Gram matrices, nearest-neighbor scans, benchmark locator.

Two interchangeable engines produce the raw fidelity K(x, x') =
|<psi(x)|psi(x')>|^2: `AnalyticEngine` (closed-form, delta = 0 only) and
`EdEngine` (Lanczos with per-point state caching).  The `per-site` kernel
kind rescales every entry to F^(1/N), which keeps different system sizes
comparable and avoids the exponential orthogonality decay of the raw
fidelity at large N.
"""

from __future__ import annotations

import concurrent.futures
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from . import ed as ed_mod
from .ed import GroundState
from .freefermion import fidelity_xy, log_fidelity_xy
from .model import ModelParams, build_hamiltonian

KIND_GLOBAL = "global"
KIND_PER_SITE = "per-site"
_KINDS = (KIND_GLOBAL, KIND_PER_SITE)

_CSV_SCHEMA = "spinkernel-csv v1"


def apply_kind(fidelity, kind: str, n_sites: int):
    """Map a raw fidelity to the requested kernel kind."""
    if kind == KIND_GLOBAL:
        return fidelity
    if kind == KIND_PER_SITE:
        return fidelity ** (1.0 / n_sites)
    raise ValueError(f"unknown kernel kind {kind!r}")


def kernel_value(engine, a: ModelParams, b: ModelParams, kind: str,
                 n_sites: int) -> float:
    """Kernel entry of the requested kind, computed in the log domain.

    The per-site root is taken on log F, so values stay exact even when
    the raw fidelity underflows (relevant for N in the thousands).
    """
    if kind == KIND_GLOBAL:
        return engine.fidelity(a, b)
    if kind == KIND_PER_SITE:
        logf = engine.log_fidelity(a, b)
        return 0.0 if logf == -math.inf else math.exp(logf / n_sites)
    raise ValueError(f"unknown kernel kind {kind!r}")


def feature_distance(k: float) -> float:
    """Feature-space distance sqrt(2 (1 - k)) between two normalized states."""
    return math.sqrt(max(2.0 * (1.0 - k), 0.0))


class AnalyticEngine:
    """Closed-form free-fermion kernel engine (delta = 0, shared gamma)."""

    name = "analytic"

    def fidelity(self, a: ModelParams, b: ModelParams) -> float:
        return fidelity_xy(a, b)

    def log_fidelity(self, a: ModelParams, b: ModelParams) -> float:
        return log_fidelity_xy(a, b)

    def prepare(self, points: Iterable[ModelParams]):
        pass


def _solve_point(args) -> GroundState:
    params, tol, max_iter, block = args
    return ed_mod.ground_state(build_hamiltonian(params), tol=tol,
                               max_iter=max_iter, block=block)


class EdEngine:
    """Exact-diagonalization kernel engine with per-point state caching.

    Ground states are memoized in memory and, when `cache_dir` is given,
    persisted in the binary state-cache format so later CLI stages can
    reuse them.  `workers > 1` precomputes batches in parallel processes;
    every state is solved from the same cold deterministic start, so
    results do not depend on scheduling.
    """

    name = "ed"

    def __init__(self, tol: float = 1e-8, max_iter: int = 2000,
                 block: int = 200, cache_dir: Optional[Path] = None,
                 workers: int = 1):
        self.tol = tol
        self.max_iter = max_iter
        self.block = block
        self.cache_dir = Path(cache_dir) if cache_dir is not None else None
        self.workers = workers
        self._states: dict[tuple, GroundState] = {}

    def _cache_path(self, params: ModelParams) -> Optional[Path]:
        if self.cache_dir is None:
            return None
        return self.cache_dir / f"{ed_mod.cache_key(params, self.tol)}.gs"

    def ground(self, params: ModelParams) -> GroundState:
        state = self._states.get(params.key)
        if state is not None:
            return state
        path = self._cache_path(params)
        if path is not None and path.exists():
            state = ed_mod.load_state(path)
        else:
            state = _solve_point((params, self.tol, self.max_iter, self.block))
            if path is not None:
                path.parent.mkdir(parents=True, exist_ok=True)
                ed_mod.save_state(path, state, self.tol)
        self._states[params.key] = state
        return state

    def prepare(self, points: Iterable[ModelParams]):
        """Compute (or load) all missing ground states, possibly in parallel."""
        todo = []
        seen = set()
        for p in points:
            if p.key in self._states or p.key in seen:
                continue
            path = self._cache_path(p)
            if path is not None and path.exists():
                self._states[p.key] = ed_mod.load_state(path)
                continue
            seen.add(p.key)
            todo.append(p)
        if not todo:
            return
        if self.workers > 1 and len(todo) > 1:
            args = [(p, self.tol, self.max_iter, self.block) for p in todo]
            with concurrent.futures.ProcessPoolExecutor(self.workers) as pool:
                for p, state in zip(todo, pool.map(_solve_point, args)):
                    self._states[p.key] = state
                    path = self._cache_path(p)
                    if path is not None:
                        path.parent.mkdir(parents=True, exist_ok=True)
                        ed_mod.save_state(path, state, self.tol)
        else:
            for p in todo:
                self.ground(p)

    def fidelity(self, a: ModelParams, b: ModelParams) -> float:
        return ed_mod.fidelity_ed(self.ground(a), self.ground(b))

    def log_fidelity(self, a: ModelParams, b: ModelParams) -> float:
        f = self.fidelity(a, b)
        return math.log(f) if f > 0.0 else -math.inf


def make_engine(name: str, **kwargs):
    if name == "analytic":
        return AnalyticEngine()
    if name == "ed":
        return EdEngine(**kwargs)
    raise ValueError(f"unknown engine {name!r}")


@dataclass(frozen=True)
class GramMatrix:
    """M x M kernel matrix over an ordered point set.

    Exactly symmetric by construction (upper triangle computed once and
    mirrored); the diagonal is exactly 1 for analytic/ed provenance.
    Swap-sampled matrices keep the generating seed and shot count and may
    lose positive semidefiniteness.
    """

    points: tuple
    values: np.ndarray
    kind: str
    provenance: str
    seed: Optional[int] = None
    shots: Optional[int] = None

    @property
    def size(self) -> int:
        return len(self.points)

    def upper_entries(self, include_diagonal: bool = False) -> np.ndarray:
        """Strictly-upper-triangle entries (row-major order)."""
        iu = np.triu_indices(self.size, k=0 if include_diagonal else 1)
        return self.values[iu]

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.values)[0])

    def point_labels(self) -> list[str]:
        return [f"g={p.gamma!r};d={p.delta!r};h={p.h!r};N={p.n_sites}"
                for p in self.points]

    # -- serialization ------------------------------------------------------

    def write_csv(self, path: Path, config_hash: str = "none"):
        lines = [f"# {_CSV_SCHEMA}", f"# config-hash={config_hash}",
                 f"# kind={self.kind} provenance={self.provenance} "
                 f"seed={self.seed} shots={self.shots}",
                 ",".join(self.point_labels())]
        for row in self.values:
            lines.append(",".join(repr(float(v)) for v in row))
        Path(path).write_text("\n".join(lines) + "\n")

    def to_json_dict(self, config_hash: str = "none") -> dict:
        return {
            "schema": "spinkernel-gram-v1",
            "config_hash": config_hash,
            "kind": self.kind,
            "provenance": self.provenance,
            "seed": self.seed,
            "shots": self.shots,
            "points": [{"gamma": p.gamma, "delta": p.delta, "h": p.h,
                        "n_sites": p.n_sites} for p in self.points],
            "values": [[float(v) for v in row] for row in self.values],
        }

    def write_json(self, path: Path, config_hash: str = "none"):
        Path(path).write_text(
            json.dumps(self.to_json_dict(config_hash), sort_keys=True) + "\n")

    @classmethod
    def from_json_dict(cls, doc: dict) -> "GramMatrix":
        points = tuple(ModelParams(**p) for p in doc["points"])
        return cls(points=points, values=np.array(doc["values"], dtype=float),
                   kind=doc["kind"], provenance=doc["provenance"],
                   seed=doc["seed"], shots=doc["shots"])

    @classmethod
    def read_json(cls, path: Path) -> "GramMatrix":
        return cls.from_json_dict(json.loads(Path(path).read_text()))


def gram(points: Sequence[ModelParams], kind: str = KIND_GLOBAL,
         engine=None) -> GramMatrix:
    """Assemble the kernel Gram matrix over `points`.

    The upper triangle is computed once (ground states are shared across
    entries for the ED engine) and mirrored, so the result is exactly
    symmetric regardless of scheduling.
    """
    if engine is None:
        engine = AnalyticEngine()
    if kind not in _KINDS:
        raise ValueError(f"unknown kernel kind {kind!r}")
    points = tuple(points)
    if not points:
        raise ValueError("empty point set")
    n = points[0].n_sites
    if any(p.n_sites != n for p in points):
        raise ValueError("all Gram points must share n_sites")
    if isinstance(engine, AnalyticEngine):
        if any(p.delta != 0.0 for p in points):
            raise ValueError("analytic engine requires delta = 0")
        if any(p.gamma != points[0].gamma for p in points):
            raise ValueError("analytic engine requires a shared gamma")
    engine.prepare(points)
    m = len(points)
    values = np.zeros((m, m))
    for i in range(m):
        values[i, i] = 1.0
        for j in range(i + 1, m):
            values[i, j] = values[j, i] = kernel_value(
                engine, points[i], points[j], kind, n)
    return GramMatrix(points=points, values=values, kind=kind,
                      provenance=engine.name)


@dataclass(frozen=True)
class FidelityScan:
    """Nearest-neighbor fidelity F(x, x + dx) along a control-parameter grid.

    The grid argmin is the finite-size pseudo-critical estimate: ground
    states separated by a fixed small step are most distinguishable at
    the transition.
    """

    control: str
    grid: np.ndarray
    step: float
    fidelities: np.ndarray
    argmin_index: int

    @property
    def argmin(self) -> float:
        return float(self.grid[self.argmin_index])

    def write_csv(self, path: Path, n_sites: int, config_hash: str = "none"):
        lines = [f"# {_CSV_SCHEMA}", f"# config-hash={config_hash}",
                 "N,x,fidelity,is_argmin"]
        for i, (x, f) in enumerate(zip(self.grid, self.fidelities)):
            lines.append(f"{n_sites},{float(x)!r},{float(f)!r},"
                         f"{int(i == self.argmin_index)}")
        Path(path).write_text("\n".join(lines) + "\n")


def _with_control(base: ModelParams, control: str, value: float) -> ModelParams:
    if control == "h":
        return base.replace(h=value)
    if control == "delta":
        return base.replace(delta=value)
    raise ValueError(f"unknown control axis {control!r}")


def fidelity_scan(base: ModelParams, control: str, grid: Sequence[float],
                  step: float, engine=None, kind: str = KIND_GLOBAL) -> FidelityScan:
    """Scan F(x, x + step) over `grid` and report the dip location."""
    if engine is None:
        engine = AnalyticEngine()
    grid = np.asarray(grid, dtype=float)
    if grid.size < 1 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be non-empty and strictly increasing")
    if step <= 0:
        raise ValueError(f"step must be > 0, got {step}")
    # When the step is a multiple of the grid spacing, the scan partner
    # of a grid point is another grid point; reuse it instead of solving
    # a float-dust duplicate.
    partners = np.empty_like(grid)
    for i, x in enumerate(grid):
        target = x + step
        j = i + np.searchsorted(grid[i:], target - 1e-12)
        if j < grid.size and abs(grid[j] - target) < 1e-12:
            partners[i] = grid[j]
        else:
            partners[i] = target
    pts = [_with_control(base, control, x) for x in grid]
    prt = [_with_control(base, control, x) for x in partners]
    engine.prepare(pts + prt)
    n = base.n_sites
    fids = np.array([kernel_value(engine, a, b, kind, n)
                     for a, b in zip(pts, prt)])
    return FidelityScan(control=control, grid=grid, step=float(step),
                        fidelities=fids, argmin_index=int(np.argmin(fids)))


def benchmark_critical(base: ModelParams, h_ref: float, grid: Sequence[float],
                       kind: str = KIND_PER_SITE, engine=None) -> float:
    """Training-free pseudo-critical locator.

    Evaluates the similarity S(h, h_ref) to a fixed deep-paramagnet
    reference on `grid` and returns the grid point where |dS/dh| (central
    differences) is largest.
    """
    if engine is None:
        engine = AnalyticEngine()
    grid = np.asarray(grid, dtype=float)
    if grid.size < 3:
        raise ValueError("benchmark grid needs at least 3 points")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    ref = _with_control(base, "h", h_ref)
    pts = [_with_control(base, "h", x) for x in grid]
    engine.prepare(pts + [ref])
    n = base.n_sites
    s = np.array([kernel_value(engine, p, ref, kind, n) for p in pts])
    ds = (s[2:] - s[:-2]) / (grid[2:] - grid[:-2])
    return float(grid[1 + int(np.argmax(np.abs(ds)))])
