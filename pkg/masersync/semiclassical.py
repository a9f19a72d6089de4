"""
Semiclassical phase locking.

Far above threshold the relative phase diffuses with the linewidth of a
single maser and is pulled towards zero by dissipative coupling; the
steady state of that drift-diffusion is a von Mises density with
concentration kappa = eps_tilde / delta_tilde.
"""
import logging
import math

import numpy as np
from scipy.special import i0, i0e

from masersync import defaults, errors
from masersync.analytics import mean_occupation, steady_number_distribution
from masersync.fock import choose_truncation
from masersync.generator import rescale_dissipative
from masersync.phase import PhaseDistribution, phase_grid
from masersync.types import MaserParams, SemiclassicalPrediction

logger = logging.getLogger(__name__)


def bessel_i0(x: float) -> float:
    if x < 0 or not math.isfinite(x):
        raise errors.InvalidParameters("x", x, "must be finite and >= 0")
    if x > defaults.BESSEL_MAX_ARG:
        raise errors.BesselOverflow(x, defaults.BESSEL_MAX_ARG)
    return float(i0(x))


def von_mises_peak(kappa: float) -> float:
    """ e^kappa / I0(kappa) - 1, stable for large kappa """
    if kappa < 0:
        raise errors.InvalidParameters("kappa", kappa, "must be >= 0")
    return float(1.0 / i0e(kappa) - 1.0)


def _single_peaked(probs: np.ndarray) -> bool:
    inner = probs[1:-1]
    peaks = np.sum((inner > probs[:-2]) & (inner > probs[2:]))
    peaks += int(len(probs) > 1 and probs[0] > probs[1])
    return peaks == 1


def semiclassical_linewidth(params: MaserParams, eps: float,
                            threshold: float = defaults.TRUNCATION_THRESHOLD) \
        -> SemiclassicalPrediction:
    """
    delta_tilde = (N_tilde phi^2 + 1) / (4 <n>), with <n> from the exact
    single-maser distribution at the rescaled rate N_tilde.
    """
    eff, eps_tilde = rescale_dissipative(params, eps)
    dist = steady_number_distribution(eff, choose_truncation(eff, threshold))
    mean_n = mean_occupation(dist)
    if mean_n <= defaults.MEAN_N_FLOOR:
        raise errors.BelowThreshold(mean_n, defaults.MEAN_N_FLOOR)
    delta = (eff.N * eff.phi ** 2 + 1.0) / (4.0 * mean_n)
    kappa = eps_tilde / delta
    valid = eff.theta > 1.0 and _single_peaked(dist.probs)
    if not valid:
        logger.warning("semiclassical picture is doubtful at N=%s theta=%.4g",
                       eff.N, eff.theta)
    return SemiclassicalPrediction(delta_tilde=delta, kappa=kappa,
                                   s_sc=von_mises_peak(kappa), mean_n=mean_n,
                                   n_tilde=eff.N, eps_tilde=eps_tilde,
                                   valid=valid)


def fp_phase_distribution(pred: SemiclassicalPrediction,
                          grid_size: int = defaults.PHASE_GRID) -> PhaseDistribution:
    """ e^{kappa cos phi} / (2pi I0(kappa)) """
    grid = phase_grid(grid_size)
    kappa = pred.kappa
    values = np.exp(kappa * (np.cos(grid) - 1.0)) / (2.0 * math.pi * i0e(kappa))
    return PhaseDistribution(grid=grid, values=values)


def relative_difference(s_quantum: float, s_sc: float) -> float:
    """ |S_quantum - S_sc| / S_quantum """
    if not s_quantum > 0:
        raise errors.InvalidParameters("s_quantum", s_quantum, "must be > 0")
    return abs(s_quantum - s_sc) / s_quantum
