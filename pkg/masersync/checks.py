"""
Invariant suite at small truncations, where the full two-mode
generator is cheap enough to serve as the reference.
"""
import logging
from typing import Callable, List

import numpy as np
from pydantic import BaseModel

from masersync import defaults, errors
from masersync.analytics import steady_number_distribution
from masersync.correlations import mutual_information, swap_modes
from masersync.fock import charge, full_to_sector
from masersync.generator import (assemble_full_generator,
                                 assemble_sector_generator,
                                 project_full_generator)
from masersync.perturbation import solve_first_order
from masersync.phase import relative_phase_distribution
from masersync.solver import solve_full_steady_state, solve_sector_steady_state
from masersync.types import CouplingKind, CouplingSpec, MaserParams, Truncation

logger = logging.getLogger(__name__)

CHECK_NMAX_CAP = 6


class CheckResult(BaseModel):
    name: str
    coupling: str
    value: float
    limit: float
    passed: bool
    detail: str = ""


def _run(name: str, kind: str, limit: float,
         func: Callable[[], float]) -> CheckResult:
    try:
        value = float(func())
    except (errors.MaserSyncError, ValueError, np.linalg.LinAlgError) as e:
        logger.error("check %s (%s) raised: %s", name, kind, e)
        return CheckResult(name=name, coupling=kind, value=float("nan"),
                           limit=limit, passed=False, detail=str(e))
    passed = value <= limit
    if not passed:
        logger.warning("check %s (%s): %.3e above %.1e", name, kind, value, limit)
    return CheckResult(name=name, coupling=kind, value=value, limit=limit,
                       passed=passed)


def _coupled_checks(params: MaserParams, coupling: CouplingSpec,
                    trunc: Truncation) -> List[CheckResult]:
    kind = coupling.kind.value
    try:
        gen = assemble_sector_generator(params, coupling, trunc)
        full = assemble_full_generator(params, coupling, trunc)
        state = solve_sector_steady_state(gen)
        rho_full = solve_full_steady_state(full)
    except errors.MaserSyncError as e:
        logger.error("steady states (%s) failed: %s", kind, e)
        return [CheckResult(name="steady_states", coupling=kind,
                            value=float("nan"), limit=0.0, passed=False,
                            detail=str(e))]
    results = []

    def trace_annihilation():
        return np.max(np.abs(gen.trace_weights() @ gen.matrix))

    def generator_equivalence():
        projected = project_full_generator(full) / gen.rate_scale
        return np.max(np.abs(gen.matrix.toarray() - projected))

    def steady_equivalence():
        return np.max(np.abs(state.vector - full_to_sector(rho_full, trunc.n_max)))

    def charge_leak():
        return np.max(np.abs(rho_full[charge(trunc.n_max) != 0]))

    def exchange_symmetry():
        return max(np.max(np.abs(b - b.conj().T)) for b in state.blocks)

    def positivity():
        return -min(np.linalg.eigvalsh(state.density_matrix()).min(), 0.0)

    def phase_normalization():
        return abs(relative_phase_distribution(state).integral() - 1.0)

    def swap_invariance():
        rho = state.density_matrix()
        return abs(mutual_information(rho).mi - mutual_information(swap_modes(rho)).mi)

    results += [
        _run("trace_annihilation", kind, 1e-11, trace_annihilation),
        _run("generator_equivalence", kind, 1e-11, generator_equivalence),
        _run("residual", kind, defaults.RESIDUAL_TARGET, lambda: state.residual),
        _run("steady_equivalence", kind, 1e-9, steady_equivalence),
        _run("charge_leak", kind, 1e-10, charge_leak),
        _run("exchange_symmetry", kind, defaults.HERMITICITY_TOL, exchange_symmetry),
        _run("positivity", kind, defaults.POSITIVITY_TOL, positivity),
        _run("phase_normalization", kind, 1e-10, phase_normalization),
        _run("swap_invariance", kind, 1e-10, swap_invariance),
    ]

    if coupling.kind == CouplingKind.COHERENT:
        def pi_periodicity():
            values = relative_phase_distribution(state).values
            return np.max(np.abs(np.roll(values, len(values) // 2) - values))

        results.append(_run("pi_periodicity", kind, 1e-8, pi_periodicity))

    def first_order_structure():
        # raises on a broken structure
        solve_first_order(coupling.kind, params, trunc)
        return 0.0

    results.append(_run("first_order_structure", kind, 0.0, first_order_structure))
    return results


def run_checks(N: float = 2.0, theta: float = 1.5, eps: float = 0.1,
               n_max: int = 5) -> List[CheckResult]:
    if n_max > CHECK_NMAX_CAP:
        raise errors.InvalidParameters("n_max", n_max,
                                       f"checks run at n_max <= {CHECK_NMAX_CAP}")
    params = MaserParams.from_theta(N, theta)
    trunc = Truncation(n_max=n_max)

    def uncoupled_product():
        coupling = CouplingSpec.uncoupled()
        state = solve_sector_steady_state(
            assemble_sector_generator(params, coupling, trunc))
        probs = steady_number_distribution(params, trunc).probs
        return np.max(np.abs(state.populations - np.outer(probs, probs)))

    results = [_run("uncoupled_product", "none", 1e-10, uncoupled_product)]
    for kind in (CouplingKind.COHERENT, CouplingKind.DISSIPATIVE):
        results += _coupled_checks(params, CouplingSpec(kind=kind, eps=eps), trunc)
    return results
