"""
Steady states of the coupled masers.

The generator is singular (trace preservation makes one equation
redundant), so one row is replaced with the trace functional and the
square system is factorized directly. A second solve with a different
replaced row must agree with the first; otherwise the steady state is
not unique and the point is reported instead of guessed.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from masersync import defaults, errors
from masersync.analytics import fano_from_probs
from masersync.base import GeneratorSpec
from masersync.fock import choose_truncation, layout, sector_to_full
from masersync.generator import (FullGenerator, SectorGenerator,
                                 assemble_sector_generator)
from masersync.types import CouplingSpec, MaserParams, Truncation

logger = logging.getLogger(__name__)


@dataclass
class SectorState:
    """
    Steady state restricted to the charge-neutral sectors.

    :param vector: concatenated p-blocks, see ``masersync.fock``
    :param residual: ||L x||_inf / ||x||_inf on the unmodified generator
    :param truncation_ok: False when the top Fock levels kept more
    occupation than ``defaults.TOP_LEVEL_OCCUPATION``
    """
    vector: np.ndarray
    params: MaserParams
    coupling: CouplingSpec
    trunc: Truncation
    residual: float = 0.0
    truncation_ok: bool = True
    warnings: List[str] = field(default_factory=list)

    @property
    def n_max(self) -> int:
        return self.trunc.n_max

    @property
    def blocks(self) -> List[np.ndarray]:
        return layout(self.n_max).blocks(self.vector)

    def block(self, p: int) -> np.ndarray:
        return layout(self.n_max).block(self.vector, p)

    @property
    def populations(self) -> np.ndarray:
        """ joint number distribution P(n1, n2) """
        return self.block(0).real

    def marginal(self, mode: int = 1) -> np.ndarray:
        axis = 1 if mode == 1 else 0
        return self.populations.sum(axis=axis)

    def mean_n(self, mode: int = 1) -> float:
        probs = self.marginal(mode)
        return float(np.dot(np.arange(len(probs)), probs))

    def fano(self, mode: int = 1) -> float:
        return fano_from_probs(self.marginal(mode))

    def top_occupation(self) -> float:
        """ largest marginal weight on the two highest Fock levels """
        return max(float(self.marginal(mode)[-2:].sum()) for mode in (1, 2))

    def harmonics(self) -> np.ndarray:
        """ F_p = sum_{n,m} rho^(p)_{n,m} for p = 1..n_max """
        return np.array([self.block(p).sum() for p in range(1, self.n_max + 1)])

    def density_matrix(self) -> np.ndarray:
        return sector_to_full(self.vector, self.n_max, mirror="hermitian")


def _trace_row_system(gen: GeneratorSpec, row: int) -> sparse.csc_matrix:
    weights = gen.trace_weights()
    keep = np.ones(gen.dim)
    keep[row] = 0.0
    cols = np.flatnonzero(weights)
    trace_row = sparse.csr_matrix(
        (weights[cols].astype(complex), (np.full(len(cols), row), cols)),
        shape=(gen.dim, gen.dim))
    return (sparse.diags(keep) @ gen.matrix + trace_row).tocsc()


def _pinned_solve(gen: GeneratorSpec, row: int) -> np.ndarray:
    system = _trace_row_system(gen, row)
    rhs = np.zeros(gen.dim, dtype=complex)
    rhs[row] = 1.0
    try:
        lu = splu(system)
    except RuntimeError as e:
        raise errors.SingularSteadyState(f"row {row}: {e}") from e
    x = lu.solve(rhs)
    if not np.all(np.isfinite(x)):
        raise errors.SingularSteadyState(f"row {row}: non-finite solution")
    return x


def _residual(gen: GeneratorSpec, x: np.ndarray) -> float:
    scale = np.max(np.abs(x))
    return float(np.max(np.abs(gen.apply(x))) / scale)


def null_vector(gen: GeneratorSpec) -> Tuple[np.ndarray, float]:
    """
    Trace-normalized null vector of any generator with its residual.
    """
    first, second = gen.pin_rows()
    x = _pinned_solve(gen, first)
    y = _pinned_solve(gen, second)
    diff = float(np.max(np.abs(x - y)) / np.max(np.abs(x)))
    if diff > defaults.UNIQUENESS_TOL:
        raise errors.DegenerateSteadyState(diff, defaults.UNIQUENESS_TOL)
    residual = _residual(gen, x)
    if residual > defaults.RESIDUAL_LIMIT:
        raise errors.ResidualTooLarge(residual, defaults.RESIDUAL_LIMIT)
    if residual > defaults.RESIDUAL_TARGET:
        logger.warning("%s steady state residual %.2e above %.0e (n_max=%s)",
                       gen.kind, residual, defaults.RESIDUAL_TARGET, gen.n_max)
    return x, residual


def solve_sector_steady_state(gen: SectorGenerator) -> SectorState:
    x, residual = null_vector(gen)
    state = SectorState(vector=x, params=gen.params, coupling=gen.coupling,
                        trunc=gen.trunc, residual=residual)
    state.truncation_ok = state.top_occupation() <= defaults.TOP_LEVEL_OCCUPATION
    return state


def solve_full_steady_state(gen: FullGenerator) -> np.ndarray:
    """ two-mode density matrix, Hermitian and positive within tolerance """
    x, _ = null_vector(gen)
    states = gen.levels ** 2
    rho = x.reshape(states, states)
    skew = float(np.max(np.abs(rho - rho.conj().T)))
    if skew > defaults.POSITIVITY_TOL:
        raise errors.InvalidState(f"not Hermitian, max |rho - rho^+| = {skew:.2e}")
    rho = 0.5 * (rho + rho.conj().T)
    lowest = float(np.linalg.eigvalsh(rho).min())
    if lowest < -defaults.POSITIVITY_TOL:
        raise errors.InvalidState(f"negative eigenvalue {lowest:.2e}")
    return rho


def initial_truncation(params: MaserParams,
                       threshold: float = defaults.TRUNCATION_THRESHOLD,
                       min_nmax: int = defaults.NMAX_FLOOR) -> Truncation:
    trunc = choose_truncation(params, threshold)
    if trunc.n_max < min_nmax:
        trunc = Truncation(n_max=min_nmax, tail_mass=trunc.tail_mass,
                           threshold=threshold)
    return trunc


def solve_point(params: MaserParams, coupling: CouplingSpec,
                n_max: Optional[int] = None,
                threshold: float = defaults.TRUNCATION_THRESHOLD,
                min_nmax: int = defaults.NMAX_FLOOR,
                step: int = defaults.NMAX_STEP,
                cap: int = defaults.ADAPTIVE_NMAX_CAP) -> SectorState:
    """
    Sector steady state at one parameter point.

    With ``n_max`` given the truncation is used as is. Otherwise it starts
    from the analytic uncoupled tail and grows by ``step`` while the
    coupled state keeps weight on the top levels.
    """
    if n_max is not None:
        gen = assemble_sector_generator(params, coupling, Truncation(n_max=n_max))
        return solve_sector_steady_state(gen)

    trunc = initial_truncation(params, threshold, min_nmax)
    while True:
        gen = assemble_sector_generator(params, coupling, trunc)
        state = solve_sector_steady_state(gen)
        if state.truncation_ok:
            return state
        if trunc.n_max + step > cap:
            msg = (f"top levels hold {state.top_occupation():.2e} at "
                   f"n_max={trunc.n_max}, cap {cap} reached")
            logger.warning(msg)
            state.warnings.append(msg)
            return state
        logger.info("growing truncation %s -> %s (top occupation %.2e)",
                    trunc.n_max, trunc.n_max + step, state.top_occupation())
        trunc = trunc.grow(step)
