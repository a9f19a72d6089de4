"""
Weak-coupling expansion of the steady state.

At eps = 0 only the p=0 sector is populated, rho^(0)_{n,m} = P_n P_m.
Coupling feeds the p=1 sector at first order; coherent coupling feeds the
p=2 sector at second order. Each order is a linear solve with an
uncoupled sector block.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.sparse.linalg import splu

from masersync import defaults, errors
from masersync.analytics import (NumberDistribution,
                                 steady_number_distribution)
from masersync.generator import assemble_sector_generator, rescale_dissipative
from masersync.phase import PhaseDistribution, distribution_from_harmonics
from masersync.types import CouplingKind, CouplingSpec, MaserParams, Truncation

logger = logging.getLogger(__name__)

_STRUCTURE_TOL = 1e-9


@dataclass
class PerturbativeState:
    """
    :param rho1: p=1 sector per unit bare eps
    :param rho2: p=2 sector per unit eps^2 (coherent only)
    :param c0: coefficient of cos(2 phi) in 2pi P (coherent)
    :param c1: coefficient of cos(phi) in 2pi P (dissipative)
    :param eps: coupling the dissipative rescaling was evaluated at,
    0 for the strict first-order coefficient
    """
    kind: CouplingKind
    params: MaserParams
    trunc: Truncation
    dist: NumberDistribution
    rho1: np.ndarray
    rho2: Optional[np.ndarray] = None
    c0: Optional[float] = None
    c1: Optional[float] = None
    eps: float = 0.0


def first_order_source(kind: CouplingKind, params: MaserParams,
                       dist: NumberDistribution) -> np.ndarray:
    """
    Terms of the p=1 equations driven by the uncoupled populations,
    per unit coupling strength.
    """
    probs = dist.probs
    n = np.arange(dist.n_max)
    root = np.sqrt(np.multiply.outer(n + 1.0, n + 1.0))
    lo, hi = probs[:-1], probs[1:]
    if kind == CouplingKind.COHERENT:
        return -1j * root * (np.multiply.outer(hi, lo) - np.multiply.outer(lo, hi))
    return 0.5 * root * (np.multiply.outer(hi, lo) + np.multiply.outer(lo, hi)
                         - 2.0 * np.multiply.outer(hi, hi))


def _solve_block(params: MaserParams, kind: CouplingKind, trunc: Truncation,
                 p: int, source: np.ndarray) -> np.ndarray:
    """ x with A_p x = -source, A_p the uncoupled p-block (real) """
    gen = assemble_sector_generator(params, CouplingSpec.uncoupled(kind), trunc)
    block = gen.block(p).real.tocsc()
    try:
        lu = splu(block)
    except RuntimeError as e:
        raise errors.SingularSteadyState(f"uncoupled p={p} block: {e}") from e
    rhs = -source.ravel()
    x = lu.solve(np.ascontiguousarray(rhs.real)) \
        + 1j * lu.solve(np.ascontiguousarray(rhs.imag))
    return x.reshape(source.shape)


def _check_structure(kind: CouplingKind, rho1: np.ndarray):
    scale = max(float(np.max(np.abs(rho1))), 1e-300)
    if kind == CouplingKind.COHERENT:
        bad = {
            "real part": np.max(np.abs(rho1.real)),
            "antisymmetry": np.max(np.abs(rho1 + rho1.T)),
            "sum": abs(rho1.sum()),
        }
    else:
        bad = {
            "imaginary part": np.max(np.abs(rho1.imag)),
            "symmetry": np.max(np.abs(rho1 - rho1.T)),
        }
    for name, value in bad.items():
        if value > _STRUCTURE_TOL * scale:
            raise errors.InvalidState(
                f"{kind.value} first order violates {name}: {value:.2e}")


def solve_first_order(kind: CouplingKind, params: MaserParams,
                      trunc: Truncation, eps: float = 0.0) -> PerturbativeState:
    """
    p=1 sector to first order in the coupling.

    For dissipative coupling with ``eps > 0`` the expansion is made in the
    rescaled master equation (N/(1+eps), eps/(1+eps)) and converted back to
    a coefficient per unit bare eps.
    """
    kind = CouplingKind(kind)
    scale = 1.0
    eff = params
    if kind == CouplingKind.DISSIPATIVE and eps > 0:
        eff, eps_tilde = rescale_dissipative(params, eps)
        scale = eps_tilde / eps
    dist = steady_number_distribution(eff, trunc)
    source = first_order_source(kind, eff, dist)
    rho1 = scale * _solve_block(eff, kind, trunc, 1, source)
    _check_structure(kind, rho1)
    state = PerturbativeState(kind=kind, params=params, trunc=trunc, dist=dist,
                              rho1=rho1, eps=eps)
    if kind == CouplingKind.DISSIPATIVE:
        state.c1 = 2.0 * float(rho1.sum().real)
    logger.debug("first order %s N=%s phi=%s: sum rho1 = %s",
                 kind.value, params.N, params.phi, rho1.sum())
    return state


def second_order_source(rho1: np.ndarray) -> np.ndarray:
    """ coherent hopping from the first-order p=1 sector into p=2 """
    side = rho1.shape[0] - 1
    n = np.arange(side, dtype=float)
    up = np.sqrt(np.multiply.outer(n + 1, n + 2)) * rho1[1:, :side]
    down = np.sqrt(np.multiply.outer(n + 2, n + 1)) * rho1[:side, 1:]
    return -1j * (up - down)


def solve_second_order_coherent(params: MaserParams, trunc: Truncation,
                                first: Optional[PerturbativeState] = None) \
        -> PerturbativeState:
    if first is None:
        first = solve_first_order(CouplingKind.COHERENT, params, trunc)
    if first.kind != CouplingKind.COHERENT:
        raise errors.InvalidParameters("kind", first.kind.value,
                                       "second order is coherent only")
    if trunc.n_max < 2:
        first.rho2 = np.zeros((0, 0))
        first.c0 = 0.0
        return first
    source = second_order_source(first.rho1)
    rho2 = _solve_block(params, CouplingKind.COHERENT, trunc, 2, source)
    imag = float(np.max(np.abs(rho2.imag)))
    if imag > _STRUCTURE_TOL * max(float(np.max(np.abs(rho2))), 1e-300):
        raise errors.InvalidState(f"second order has imaginary part {imag:.2e}")
    first.rho2 = rho2.real
    first.c0 = 2.0 * float(rho2.real.sum())
    return first


def solve_perturbative(kind: CouplingKind, params: MaserParams,
                       trunc: Truncation, eps: float = 0.0) -> PerturbativeState:
    """ leading nonvanishing order for each coupling """
    kind = CouplingKind(kind)
    first = solve_first_order(kind, params, trunc, eps)
    if kind == CouplingKind.COHERENT:
        return solve_second_order_coherent(params, trunc, first)
    return first


def perturbative_phase_distribution(state: PerturbativeState, eps: float,
                                    grid_size: int = defaults.PHASE_GRID) \
        -> PhaseDistribution:
    """ (1/2pi)[1 + eps^2 C0 cos 2phi] or (1/2pi)[1 + eps C1 cos phi] """
    if state.kind == CouplingKind.COHERENT:
        fourier = [0.0, 0.5 * eps * eps * (state.c0 or 0.0)]
    else:
        fourier = [0.5 * eps * (state.c1 or 0.0)]
    return distribution_from_harmonics(fourier, 1.0, grid_size)


def perturbative_sync_strength(state: PerturbativeState, eps: float) -> float:
    if state.kind == CouplingKind.COHERENT:
        return eps * eps * abs(state.c0 or 0.0)
    return eps * abs(state.c1 or 0.0)
