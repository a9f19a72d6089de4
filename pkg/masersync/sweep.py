"""
Parameter sweeps over (coupling, N, eps, theta or phi).

Points are independent; with ``workers > 1`` they run in a process
pool and are gathered back into grid order before anything is written,
so the CSV does not depend on the worker count.
"""
import csv
import datetime
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Union

import numpy as np
from pydantic import BaseModel, BaseSettings, ValidationError, root_validator, validator

from masersync import defaults, errors
from masersync.analytics import mean_occupation, steady_number_distribution
from masersync.correlations import logarithmic_negativity, mutual_information
from masersync.fock import choose_truncation
from masersync.perturbation import perturbative_sync_strength, solve_perturbative
from masersync.phase import (PhaseDistribution, export_phase_csv,
                             relative_phase_distribution, sync_strength)
from masersync.semiclassical import relative_difference, semiclassical_linewidth
from masersync.solver import initial_truncation, solve_point
from masersync.types import (CouplingKind, CouplingSpec, MaserParams, SweepRow,
                             Truncation)
from masersync.utils import (fmt_float, generate_random, mkdir_p,
                             read_config_file, versions, write_toml)

logger = logging.getLogger(__name__)


class GridRange(BaseModel):
    """ start, start + step, ... up to stop inclusive """
    start: float
    stop: float
    step: float

    @validator("step")
    def _positive_step(cls, v):
        if not v > 0:
            raise ValueError(f"step must be > 0, got {v}")
        return v

    def values(self) -> List[float]:
        count = int(math.floor((self.stop - self.start) / self.step + 1e-9))
        return [round(self.start + k * self.step, 12) for k in range(count + 1)]


Grid = Union[List[float], GridRange]


def expand(grid: Optional[Grid]) -> List[float]:
    if grid is None:
        return []
    if isinstance(grid, GridRange):
        return grid.values()
    return [float(v) for v in grid]


class Measures(BaseModel):
    S: bool = True
    S_perturb: bool = False
    S_semiclassical: bool = False
    mean_n: bool = True
    fano: bool = False
    mutual_info: bool = False
    log_negativity: bool = False

    def enabled(self) -> List[str]:
        return [name for name, on in self.dict().items() if on]

    def needs_state(self) -> bool:
        return bool(set(self.enabled()) & STATE_MEASURES)


STATE_MEASURES = {"S", "mean_n", "fano", "mutual_info", "log_negativity"}
PARAM_COLUMNS = ["theta", "N", "phi", "eps", "coupling"]
SOLVER_COLUMNS = ["n_max", "residual", "truncation_ok"]
MEASURE_COLUMNS = {
    "S": ["S_quantum", "peak_location"],
    "S_perturb": ["S_perturb"],
    "S_semiclassical": ["S_semiclassical", "delta_tilde", "kappa", "rel_diff_sc"],
    "mean_n": ["mean_n", "mean_n_uncoupled"],
    "fano": ["fano"],
    "mutual_info": ["mutual_info"],
    "log_negativity": ["log_negativity"],
}


class SweepConfig(BaseSettings):
    """
    Grids are explicit lists or {start, stop, step} ranges. Exactly one of
    ``theta`` and ``phi`` is swept; theta = phi sqrt(N).

    :param n_max: fixed truncation, adaptive when None
    :param dump_phase: write P(phi) of every point under ``<out>/phase``
    :param timing: fill wall_time_ms (makes the CSV run dependent)
    """
    name: str = "sweep"
    theta: Optional[Grid] = None
    phi: Optional[Grid] = None
    N: Grid = [5.0]
    eps: Grid = [0.0]
    couplings: List[CouplingKind] = [CouplingKind.DISSIPATIVE]
    measures: Measures = Measures()
    threshold: float = defaults.TRUNCATION_THRESHOLD
    n_max: Optional[int] = None
    min_nmax: int = defaults.NMAX_FLOOR
    nmax_step: int = defaults.NMAX_STEP
    nmax_cap: int = defaults.ADAPTIVE_NMAX_CAP
    grid_size: int = defaults.PHASE_GRID
    workers: int = 1
    out: str = "outputs"
    dump_phase: bool = False
    plots: bool = False
    timing: bool = False

    class Config:
        env_prefix = defaults.ENV_PREFIX

    @root_validator(skip_on_failure=True)
    def _check_grids(cls, values):
        if values.get("theta") is not None and values.get("phi") is not None:
            raise ValueError("sweep either theta or phi, not both")
        if values.get("theta") is None and values.get("phi") is None:
            values["theta"] = [2.0]
        for name in ("theta", "phi", "N", "eps"):
            grid = values.get(name)
            if grid is None:
                continue
            points = expand(grid)
            if not points:
                raise ValueError(f"{name} grid is empty")
            for v in points:
                if not math.isfinite(v) or v < 0:
                    raise ValueError(f"{name} values must be finite and >= 0, got {v}")
        if values.get("theta") is not None:
            if min(expand(values["N"])) == 0 and max(expand(values["theta"])) > 0:
                raise ValueError("theta > 0 needs N > 0, sweep phi instead")
        if not values.get("couplings"):
            raise ValueError("couplings must not be empty")
        return values

    @validator("threshold")
    def _threshold_range(cls, v):
        if not 0 < v < 1:
            raise ValueError(f"threshold must be in (0, 1), got {v}")
        return v

    @validator("workers", "grid_size", "min_nmax", "nmax_step", "nmax_cap")
    def _positive(cls, v, field):
        if v < 1:
            raise ValueError(f"{field.name} must be >= 1, got {v}")
        return v

    @validator("n_max")
    def _nmax(cls, v):
        if v is not None and v < 1:
            raise ValueError(f"n_max must be >= 1, got {v}")
        return v

    def grid(self) -> List["GridPoint"]:
        """ coupling, then N, then eps, then theta or phi """
        axis = "theta" if self.theta is not None else "phi"
        points = []
        for kind in self.couplings:
            for N in expand(self.N):
                for eps in expand(self.eps):
                    for x in expand(getattr(self, axis)):
                        points.append(GridPoint(index=len(points), coupling=kind,
                                                N=N, eps=eps, **{axis: x}))
        return points

    def columns(self) -> List[str]:
        chosen = set(PARAM_COLUMNS)
        enabled = self.measures.enabled()
        for name in enabled:
            chosen.update(MEASURE_COLUMNS[name])
        if self.measures.needs_state():
            chosen.update(SOLVER_COLUMNS)
        if enabled:
            chosen.update(["status", "error"])
        if self.timing:
            chosen.add("wall_time_ms")
        return [c for c in SweepRow.__fields__ if c in chosen]


class GridPoint(BaseModel):
    index: int
    coupling: CouplingKind
    N: float
    eps: float
    theta: Optional[float] = None
    phi: Optional[float] = None

    def params(self) -> MaserParams:
        if self.theta is not None:
            return MaserParams.from_theta(self.N, self.theta)
        return MaserParams(N=self.N, phi=self.phi)

    def labels(self) -> Dict[str, float]:
        if self.theta is not None:
            phi = self.theta / math.sqrt(self.N) if self.N > 0 else 0.0
            return {"theta": self.theta, "phi": phi}
        return {"theta": self.phi * math.sqrt(self.N), "phi": self.phi}


def load_config(fpath=None, **overrides) -> SweepConfig:
    """ file values, then every override that is not None """
    data: Dict[str, Any] = {}
    if fpath:
        try:
            data = read_config_file(fpath)
        except (OSError, ValueError) as e:
            raise errors.ConfigError(fpath, e) from e
    for key, value in overrides.items():
        if value is not None:
            data[key] = value
    if data.get("theta") is not None and overrides.get("phi") is not None:
        data.pop("theta")
    if data.get("phi") is not None and overrides.get("theta") is not None:
        data.pop("phi")
    try:
        return SweepConfig(**data)
    except ValidationError as e:
        raise errors.ConfigError(fpath or "<flags>", e) from e


def save_config(config: SweepConfig, fpath):
    data = json.loads(config.json(exclude_none=True))
    try:
        write_toml(fpath, data)
    except OSError as e:
        raise errors.OutputError(fpath, e) from e


@dataclass
class PointResult:
    index: int
    row: SweepRow
    phase: Optional[PhaseDistribution] = None


def _measure(point: GridPoint, config: SweepConfig):
    m = config.measures
    params = point.params()
    coupling = CouplingSpec(kind=point.coupling, eps=point.eps)
    values: Dict[str, Any] = {}
    phase = None

    if m.mean_n:
        dist = steady_number_distribution(
            params, choose_truncation(params, config.threshold))
        values["mean_n_uncoupled"] = mean_occupation(dist)

    if m.needs_state():
        state = solve_point(params, coupling, n_max=config.n_max,
                            threshold=config.threshold, min_nmax=config.min_nmax,
                            step=config.nmax_step, cap=config.nmax_cap)
        values.update(n_max=state.n_max, residual=state.residual,
                      truncation_ok=state.truncation_ok)
        mean_n = state.mean_n()
        if m.mean_n:
            values["mean_n"] = mean_n
        if m.fano and mean_n > 0:
            values["fano"] = state.fano()
        if m.S:
            phase = relative_phase_distribution(state, config.grid_size)
            strength = sync_strength(phase)
            values.update(S_quantum=strength.value, peak_location=strength.location)
        if m.mutual_info or m.log_negativity:
            rho = state.density_matrix()
            if m.mutual_info:
                values["mutual_info"] = mutual_information(rho).mi
            if m.log_negativity:
                values["log_negativity"] = logarithmic_negativity(rho).log_neg

    if m.S_perturb:
        if config.n_max is not None:
            trunc = Truncation(n_max=config.n_max)
        else:
            trunc = initial_truncation(params, config.threshold, config.min_nmax)
        pert = solve_perturbative(point.coupling, params, trunc, point.eps)
        values["S_perturb"] = perturbative_sync_strength(pert, point.eps)

    if m.S_semiclassical and point.coupling == CouplingKind.DISSIPATIVE:
        try:
            pred = semiclassical_linewidth(params, point.eps, config.threshold)
        except errors.BelowThreshold as e:
            logger.warning("point %s: %s", point.index, e)
        else:
            values.update(S_semiclassical=pred.s_sc, delta_tilde=pred.delta_tilde,
                          kappa=pred.kappa)
            reference = values.get("S_quantum", values.get("S_perturb"))
            if reference is not None and reference > 0:
                values["rel_diff_sc"] = relative_difference(reference, pred.s_sc)

    return values, phase


def evaluate_point(point: GridPoint, config: SweepConfig) -> PointResult:
    start = time.perf_counter()
    row = SweepRow(N=point.N, eps=point.eps, coupling=point.coupling,
                   **point.labels())
    phase = None
    try:
        values, phase = _measure(point, config)
        row = row.copy(update=values)
    except (errors.MaserSyncError, ValueError, ArithmeticError,
            np.linalg.LinAlgError) as e:
        logger.warning("point %s (%s) failed: %s", point.index,
                       point.coupling.value, e)
        row = row.copy(update={"status": "failed", "error": str(e)})
    if config.timing:
        row = row.copy(update={"wall_time_ms": (time.perf_counter() - start) * 1e3})
    return PointResult(index=point.index, row=row,
                       phase=phase if config.dump_phase else None)


@dataclass
class SweepResult:
    config: SweepConfig
    points: List[GridPoint]
    results: List[PointResult]
    run_id: str
    started_at: str
    elapsed: float = 0.0

    @property
    def rows(self) -> List[SweepRow]:
        return [r.row for r in self.results]

    @property
    def failed(self) -> int:
        return sum(1 for r in self.rows if r.status != "ok")


def run_sweep(config: SweepConfig,
              on_point: Optional[Callable[[PointResult], None]] = None) -> SweepResult:
    points = config.grid()
    started_at = datetime.datetime.utcnow().isoformat()
    start = time.perf_counter()
    results: List[PointResult] = []
    logger.info("sweep %s: %s points on %s workers",
                config.name, len(points), config.workers)

    if config.workers <= 1:
        for point in points:
            results.append(evaluate_point(point, config))
            if on_point:
                on_point(results[-1])
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            futures = {pool.submit(evaluate_point, p, config): p for p in points}
            for future in as_completed(futures):
                point = futures[future]
                try:
                    result = future.result()
                except Exception as e:
                    logger.error("worker lost point %s: %s", point.index, e)
                    row = SweepRow(N=point.N, eps=point.eps,
                                   coupling=point.coupling, status="failed",
                                   error=str(e), **point.labels())
                    result = PointResult(index=point.index, row=row)
                results.append(result)
                if on_point:
                    on_point(result)

    results.sort(key=lambda r: r.index)
    return SweepResult(config=config, points=points, results=results,
                       run_id=generate_random(size=12), started_at=started_at,
                       elapsed=time.perf_counter() - start)


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, CouplingKind):
        return value.value
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return fmt_float(value)
    return str(value)


def write_csv(rows: List[SweepRow], columns: List[str], fpath):
    try:
        with open(fpath, "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_cell(getattr(row, c)) for c in columns])
    except OSError as e:
        raise errors.OutputError(fpath, e) from e


def write_manifest(result: SweepResult, columns: List[str], fpath):
    manifest = {
        "run_id": result.run_id,
        "name": result.config.name,
        "started_at": result.started_at,
        "wall_time_s": round(result.elapsed, 3),
        "points": len(result.results),
        "failed": result.failed,
        "columns": columns,
        "versions": versions(),
        "config": json.loads(result.config.json()),
    }
    try:
        with open(fpath, "w") as f:
            json.dump(manifest, f, indent=2)
            f.write("\n")
    except OSError as e:
        raise errors.OutputError(fpath, e) from e


def emit_outputs(result: SweepResult, config: Optional[SweepConfig] = None) \
        -> Dict[str, Path]:
    """
    <out>/<name>.csv, <out>/<name>.manifest.json, per point phase dumps
    under <out>/phase/ and SVG plots when enabled.
    """
    config = config or result.config
    out = Path(config.out)
    try:
        mkdir_p(out)
    except OSError as e:
        raise errors.OutputError(out, e) from e
    columns = config.columns()
    paths = {"csv": out / f"{config.name}.csv",
             "manifest": out / f"{config.name}.manifest.json"}
    write_csv(result.rows, columns, paths["csv"])
    write_manifest(result, columns, paths["manifest"])

    if config.dump_phase:
        phase_dir = out / "phase"
        mkdir_p(phase_dir)
        for item in result.results:
            if item.phase is None:
                continue
            fpath = phase_dir / f"{config.name}_{item.index:05d}.csv"
            try:
                export_phase_csv(item.phase, fpath)
            except OSError as e:
                raise errors.OutputError(fpath, e) from e

    if config.plots:
        from masersync.plots import emit_plots

        paths.update(emit_plots(result.rows, config, out))
    return paths
