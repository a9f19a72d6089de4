"""
Closed-form steady state of a single uncoupled micromaser.

The number distribution is the detailed-balance solution of the
birth-death chain with gain N sin^2(phi sqrt(n)) and loss n:

    P_n = K prod_{m=1}^{n} N sin^2(phi sqrt(m)) / m

It is evaluated through the ratio recursion in log space.
"""
import logging
import math
from dataclasses import dataclass
from typing import List

import numpy as np
from pydantic import BaseModel
from scipy.special import logsumexp

from masersync import defaults, errors
from masersync.types import MaserParams, Truncation

logger = logging.getLogger(__name__)

# arguments this close to a multiple of pi are exact zeros of the sine
_PI_RTOL = 64 * np.finfo(float).eps


def rabi_sin(phi: float, k) -> np.ndarray:
    """ sin(phi * sqrt(k)) with trapping zeros made exact """
    k = np.asarray(k, dtype=float)
    x = phi * np.sqrt(k)
    s = np.sin(x)
    turns = np.rint(x / math.pi)
    on_zero = (turns >= 1) & (np.abs(x - turns * math.pi) <= _PI_RTOL * np.abs(x))
    s = np.where(on_zero | (s * s < defaults.ZERO_SIN2), 0.0, s)
    return s


def log_weights(params: MaserParams, n_upper: int) -> np.ndarray:
    """ unnormalized log P_n for n = 0..n_upper, -inf past a trapping zero """
    n = np.arange(1, n_upper + 1, dtype=float)
    gain = params.N * rabi_sin(params.phi, n) ** 2
    with np.errstate(divide="ignore"):
        steps = np.log(gain) - np.log(n)
    return np.concatenate(([0.0], np.cumsum(steps)))


@dataclass(frozen=True)
class NumberDistribution:
    """
    :param probs: P_n for n = 0..n_max, normalized on the truncation
    :param log_weights: log of the unnormalized products
    :param K: normalization constant (P_0)
    """
    probs: np.ndarray
    log_weights: np.ndarray
    K: float
    log_K: float
    params: MaserParams

    @property
    def n_max(self) -> int:
        return len(self.probs) - 1

    @property
    def occupations(self) -> np.ndarray:
        return np.arange(len(self.probs), dtype=float)

    def peak(self) -> int:
        return int(np.argmax(self.probs))


def steady_number_distribution(params: MaserParams,
                               trunc: Truncation) -> NumberDistribution:
    logw = log_weights(params, trunc.n_max)
    log_z = logsumexp(logw)
    if not np.isfinite(log_z):
        raise errors.InvalidState("number distribution has no weight")
    probs = np.exp(logw - log_z)
    # exact zeros past a trapping cutoff survive exp(-inf)
    probs[~np.isfinite(logw)] = 0.0
    return NumberDistribution(probs=probs,
                              log_weights=logw,
                              K=float(np.exp(-log_z)),
                              log_K=float(-log_z),
                              params=params)


def mean_occupation(dist: NumberDistribution) -> float:
    return float(np.dot(dist.occupations, dist.probs))


def fano_from_probs(probs: np.ndarray) -> float:
    """ (<n^2> - <n>^2) / <n> of a distribution over n = 0, 1, ... """
    n = np.arange(len(probs), dtype=float)
    mean = float(np.dot(n, probs))
    if mean <= 0:
        raise errors.InvalidParameters(
            "mean_occupation", mean, "Fano factor is undefined for the vacuum")
    return float(np.dot((n - mean) ** 2, probs)) / mean


def fano_factor(dist: NumberDistribution) -> float:
    return fano_from_probs(dist.probs)


class TrappingAngle(BaseModel):
    m: int
    k: int
    phi: float

    class Config:
        frozen = True

    def theta(self, N: float) -> float:
        return self.phi * math.sqrt(N)


def trapping_angles(m_upper: int, k_upper: int) -> List[TrappingAngle]:
    """
    Rabi angles phi = k pi / sqrt(m + 1) where the gain out of the
    m-th Fock level vanishes, sorted by phi.
    """
    if m_upper < 1 or k_upper < 1:
        raise errors.InvalidParameters(
            "m_upper/k_upper", (m_upper, k_upper), "both must be >= 1")
    angles = [
        TrappingAngle(m=m, k=k, phi=k * math.pi / math.sqrt(m + 1))
        for m in range(0, m_upper + 1)
        for k in range(1, k_upper + 1)
    ]
    return sorted(angles, key=lambda a: (a.phi, a.m, a.k))
