"""
Entropies, mutual information and logarithmic negativity of a two-mode
density matrix in the product Fock basis |n1, n2>, index n1 * d + n2.
"""
import logging
import math
from typing import Union

import numpy as np
from scipy.special import xlogy

from masersync import defaults, errors
from masersync.solver import SectorState
from masersync.types import CorrelationReport

logger = logging.getLogger(__name__)

State = Union[SectorState, np.ndarray]


def _as_matrix(state: State) -> np.ndarray:
    if isinstance(state, SectorState):
        return state.density_matrix()
    return np.asarray(state, dtype=complex)


def _levels(rho: np.ndarray) -> int:
    d = int(round(math.sqrt(rho.shape[0])))
    if d * d != rho.shape[0] or rho.shape[0] != rho.shape[1]:
        raise errors.InvalidState(f"shape {rho.shape} is not a two-mode matrix")
    return d


def _check_density_matrix(rho: np.ndarray):
    skew = float(np.max(np.abs(rho - rho.conj().T)))
    if skew > defaults.POSITIVITY_TOL:
        raise errors.InvalidState(f"not Hermitian, max |rho - rho^+| = {skew:.2e}")
    trace = float(np.trace(rho).real)
    if abs(trace - 1.0) > defaults.POSITIVITY_TOL:
        raise errors.InvalidState(f"trace {trace} is not one")


def _eigenvalues(rho: np.ndarray) -> np.ndarray:
    _check_density_matrix(rho)
    return np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))


def von_neumann_entropy(rho: np.ndarray) -> float:
    """ -Tr rho ln rho in nats """
    lam = _eigenvalues(np.asarray(rho, dtype=complex))
    if lam.min() < -defaults.POSITIVITY_TOL:
        raise errors.InvalidState(f"negative eigenvalue {lam.min():.2e}")
    lam = np.clip(lam, 0.0, 1.0)
    return float(-np.sum(xlogy(lam, lam)))


def partial_trace(rho: np.ndarray, keep: int = 1) -> np.ndarray:
    """ reduced state of mode ``keep`` (1 or 2) """
    d = _levels(rho)
    r = rho.reshape(d, d, d, d)
    if keep == 1:
        return np.einsum("ijkj->ik", r)
    if keep == 2:
        return np.einsum("ijil->jl", r)
    raise errors.InvalidParameters("keep", keep, "must be 1 or 2")


def partial_transpose(rho: np.ndarray) -> np.ndarray:
    """ transpose over mode 2 """
    d = _levels(rho)
    return rho.reshape(d, d, d, d).transpose(0, 3, 2, 1).reshape(d * d, d * d)


def swap_modes(rho: np.ndarray) -> np.ndarray:
    d = _levels(rho)
    return rho.reshape(d, d, d, d).transpose(1, 0, 3, 2).reshape(d * d, d * d)


def mutual_information(state: State) -> CorrelationReport:
    rho = _as_matrix(state)
    s1 = von_neumann_entropy(partial_trace(rho, 1))
    s2 = von_neumann_entropy(partial_trace(rho, 2))
    s12 = von_neumann_entropy(rho)
    return CorrelationReport(s1=s1, s2=s2, s12=s12, mi=s1 + s2 - s12)


def logarithmic_negativity(state: State) -> CorrelationReport:
    """ E_N = log2(2 N + 1), N the summed magnitude of negative eigenvalues """
    rho = _as_matrix(state)
    _check_density_matrix(rho)
    pt = partial_transpose(rho)
    lam = np.linalg.eigvalsh(0.5 * (pt + pt.conj().T))
    negative = lam[lam < -defaults.EIGEN_CLIP]
    negativity = float(-np.sum(negative))
    return CorrelationReport(log_neg=math.log2(2.0 * negativity + 1.0),
                             min_ev_pt=float(lam.min()))


def correlation_report(state: State) -> CorrelationReport:
    rho = _as_matrix(state)
    info = mutual_information(rho)
    neg = logarithmic_negativity(rho)
    return info.copy(update={"log_neg": neg.log_neg, "min_ev_pt": neg.min_ev_pt})
