"""
Phase distributions and the synchronization strength.

Both the relative-phase distribution of two modes and the phase
distribution of a single mode are finite Fourier series

    P(phi) = F_0 / 2pi + (1/pi) Re sum_{p>=1} F_p e^{i p phi}

with F_0 the trace and F_p the harmonic sums of the state.
"""
import csv
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from masersync import defaults, errors
from masersync.solver import SectorState
from masersync.utils import fmt_float

logger = logging.getLogger(__name__)


def phase_grid(grid_size: int = defaults.PHASE_GRID) -> np.ndarray:
    """ uniform angles in [-pi, pi) """
    if grid_size < 8:
        raise errors.InvalidParameters("grid_size", grid_size, "must be >= 8")
    return -math.pi + 2.0 * math.pi * np.arange(grid_size) / grid_size


@dataclass
class PhaseDistribution:
    """
    :param grid: angles in [-pi, pi)
    :param values: P on the grid
    :param fourier: F_p for p = 1..p_max, None for closed-form densities
    :param norm: F_0
    """
    grid: np.ndarray
    values: np.ndarray
    fourier: Optional[np.ndarray] = None
    norm: float = 1.0

    @property
    def step(self) -> float:
        return 2.0 * math.pi / len(self.grid)

    def integral(self) -> float:
        # trapezoid rule on a periodic grid
        return float(np.sum(self.values) * self.step)

    def density(self, phi) -> np.ndarray:
        phi = np.asarray(phi, dtype=float)
        if self.fourier is None:
            period = np.append(self.grid, math.pi)
            values = np.append(self.values, self.values[0])
            return np.interp(np.mod(phi + math.pi, 2 * math.pi) - math.pi,
                             period, values)
        return _series(self.fourier, self.norm, phi)


class SyncStrength(NamedTuple):
    value: float
    location: float


def _series(fourier: np.ndarray, norm: float, phi: np.ndarray) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    p = np.arange(1, len(fourier) + 1)
    waves = np.exp(1j * np.multiply.outer(phi, p))
    return norm / (2 * math.pi) + (waves @ fourier).real / math.pi


def distribution_from_harmonics(fourier, norm: float = 1.0,
                                grid_size: int = defaults.PHASE_GRID) \
        -> PhaseDistribution:
    fourier = np.asarray(fourier, dtype=complex)
    grid = phase_grid(grid_size)
    values = _series(fourier, norm, grid)
    return PhaseDistribution(grid=grid, values=values, fourier=fourier, norm=norm)


def _check_density(dist: PhaseDistribution):
    lowest = float(dist.values.min())
    if lowest < -defaults.NEGATIVE_PHASE_TOL:
        raise errors.InvalidState(f"phase density reaches {lowest:.2e}")


def relative_phase_distribution(state: SectorState,
                                grid_size: int = defaults.PHASE_GRID) \
        -> PhaseDistribution:
    trace = complex(state.block(0).sum())
    if abs(trace.imag) > 1e-12:
        raise errors.InvalidState(f"trace has imaginary part {trace.imag:.2e}")
    dist = distribution_from_harmonics(state.harmonics(), trace.real, grid_size)
    _check_density(dist)
    return dist


def single_phase_distribution(rho: np.ndarray,
                              grid_size: int = defaults.PHASE_GRID) \
        -> PhaseDistribution:
    """ P(phi) = (1/2pi) sum_{n,m} <n|rho|m> e^{i(m-n)phi} """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise errors.InvalidState(f"expected a square matrix, got {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > defaults.POSITIVITY_TOL:
        raise errors.InvalidState("single-mode matrix is not Hermitian")
    trace = float(np.trace(rho).real)
    if abs(trace - 1.0) > defaults.POSITIVITY_TOL:
        raise errors.InvalidState(f"trace {trace} is not one")
    d = rho.shape[0]
    fourier = np.array([np.trace(rho, offset=k) for k in range(1, d)])
    dist = distribution_from_harmonics(fourier, trace, grid_size)
    _check_density(dist)
    return dist


def sync_strength(dist: PhaseDistribution) -> SyncStrength:
    """
    S = 2pi max P - 1, refined around the grid maximum on the analytic
    series when one is available.
    """
    k = int(np.argmax(dist.values))
    peak, location = float(dist.values[k]), float(dist.grid[k])
    if dist.fourier is not None and len(dist.fourier):
        h = dist.step
        res = minimize_scalar(lambda x: -float(dist.density(x)),
                              bounds=(location - h, location + h),
                              method="bounded",
                              options={"xatol": 1e-10})
        if -res.fun > peak:
            peak = float(-res.fun)
            location = float(np.mod(res.x + math.pi, 2 * math.pi) - math.pi)
    return SyncStrength(2.0 * math.pi * peak - 1.0, location)


def export_phase_csv(dist: PhaseDistribution, fpath):
    with open(fpath, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["phi", "P"])
        for phi, value in zip(dist.grid, dist.values):
            writer.writerow([fmt_float(phi), fmt_float(value)])
