"""
Fock-space truncation and the index map of the conserved sector.

The steady state lives in the matrix elements

    rho^(p)_{n,m} = <n, m+p| rho |n+p, m>,   p = 0..n_max

Sector p is an (n_max+1-p) x (n_max+1-p) block; blocks are stored one
after the other, row-major in (n, m).
"""
import logging
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np

from masersync import defaults, errors
from masersync.analytics import log_weights
from masersync.types import MaserParams, SectorIndex, Truncation

logger = logging.getLogger(__name__)


def choose_truncation(params: MaserParams,
                      threshold: float = defaults.TRUNCATION_THRESHOLD,
                      cap: int = defaults.NMAX_HARD_CAP) -> Truncation:
    """
    Smallest n_max whose analytic tail mass is below threshold.

    At trapping angles the tail is exactly zero past the cutoff, so the
    cutoff itself is returned.
    """
    if not 0 < threshold < 1:
        raise errors.InvalidParameters("threshold", threshold, "must be in (0, 1)")
    logw = log_weights(params, cap + 1)
    probs = np.exp(logw - np.max(logw))
    probs /= probs.sum()
    # tail[k] = sum_{n > k} P_n
    tail = np.concatenate((np.cumsum(probs[::-1])[::-1][1:], [0.0]))
    below = np.flatnonzero(tail[:cap + 1] < threshold)
    if len(below) == 0:
        raise errors.TruncationCapExceeded(cap + 1, cap)
    n_max = max(int(below[0]), 1)
    logger.debug("truncation N=%s phi=%s -> n_max=%s tail=%.3e",
                 params.N, params.phi, n_max, tail[n_max])
    return Truncation(n_max=n_max, tail_mass=float(tail[n_max]),
                      threshold=threshold)


def sector_dim(n_max: int) -> int:
    """ D = sum_{p=0}^{n_max} (n_max + 1 - p)^2 """
    side = np.arange(n_max + 1, 0, -1)
    return int(np.sum(side * side))


class SectorLayout:
    """
    Offsets of every p-block inside the concatenated sector vector.
    """

    def __init__(self, n_max: int):
        self.n_max = n_max
        sides = np.arange(n_max + 1, 0, -1)
        self.sides = sides
        self.offsets = np.concatenate(([0], np.cumsum(sides * sides)))
        self.dim = int(self.offsets[-1])

    def side(self, p: int) -> int:
        return self.n_max + 1 - p

    def contains(self, p: int, n: int, m: int) -> bool:
        """ all four occupations n, m+p, n+p, m lie in 0..n_max """
        lo = min(n, m, n + p, m + p)
        hi = max(n, m, n + p, m + p)
        return lo >= 0 and hi <= self.n_max

    def index(self, p: int, n: int, m: int) -> int:
        side = self.n_max + 1 - p
        return int(self.offsets[p]) + n * side + m

    def resolve(self, p: int, n: int, m: int) -> Optional[int]:
        """
        Flat index of an element referenced by an equation of motion, or
        None when it lies outside the truncation. Negative sectors use
        exchange symmetry with Hermiticity: rho^(-k)_{n,m} = rho^(k)_{m-k,n-k}.
        """
        if not self.contains(p, n, m):
            return None
        if p < 0:
            k = -p
            return self.index(k, m - k, n - k)
        return self.index(p, n, m)

    def resolve_many(self, p: int, n: np.ndarray, m: np.ndarray):
        """ vectorized resolve for one sector label; returns (mask, index) """
        k = abs(p)
        if k > self.n_max:
            return np.zeros(n.shape, dtype=bool), np.full(n.shape, -1)
        occ = np.stack((n, m, n + p, m + p))
        mask = (occ.min(axis=0) >= 0) & (occ.max(axis=0) <= self.n_max)
        side = self.n_max + 1 - k
        if p >= 0:
            idx = self.offsets[k] + n * side + m
        else:
            idx = self.offsets[k] + (m - k) * side + (n - k)
        return mask, np.where(mask, idx, -1)

    def locate(self, flat: int) -> Tuple[int, int, int]:
        if not 0 <= flat < self.dim:
            raise errors.InvalidParameters(
                "flat index", flat, f"must lie in 0..{self.dim - 1}")
        p = int(np.searchsorted(self.offsets, flat, side="right") - 1)
        side = self.n_max + 1 - p
        n, m = divmod(flat - int(self.offsets[p]), side)
        return p, n, m

    def block(self, vec: np.ndarray, p: int) -> np.ndarray:
        side = self.n_max + 1 - p
        lo = int(self.offsets[p])
        return vec[lo:lo + side * side].reshape(side, side)

    def blocks(self, vec: np.ndarray):
        return [self.block(vec, p) for p in range(self.n_max + 1)]


@lru_cache(maxsize=64)
def layout(n_max: int) -> SectorLayout:
    return SectorLayout(n_max)


def flat_index(idx: SectorIndex, trunc: Truncation) -> int:
    n_max = trunc.n_max
    if not (0 <= idx.p <= n_max and 0 <= idx.n <= n_max - idx.p
            and 0 <= idx.m <= n_max - idx.p):
        raise errors.IndexOutOfRange(idx.p, idx.n, idx.m, n_max)
    return layout(n_max).index(idx.p, idx.n, idx.m)


def sector_index(flat: int, trunc: Truncation) -> SectorIndex:
    """ inverse of flat_index """
    p, n, m = layout(trunc.n_max).locate(flat)
    return SectorIndex(p=p, n=n, m=m)


def _block_positions(n_max: int, p: int):
    """ full-space row and column of every rho^(p)_{n,m} in one block """
    d = n_max + 1
    side = d - p
    n, m = np.meshgrid(np.arange(side), np.arange(side), indexing="ij")
    rows = n * d + (m + p)
    cols = (n + p) * d + m
    return rows, cols


def sector_to_full(vec: np.ndarray, n_max: int,
                   mirror: str = "hermitian") -> np.ndarray:
    """
    Two-mode density matrix holding only the charge-neutral elements.

    Elements with negative p are filled either by Hermiticity
    (``mirror="hermitian"``) or by the exchange identity used inside the
    sector generator (``mirror="exchange"``), which keeps the map linear.
    """
    lay = layout(n_max)
    d = n_max + 1
    rho = np.zeros((d * d, d * d), dtype=complex)
    for p in range(n_max + 1):
        block = lay.block(vec, p)
        rows, cols = _block_positions(n_max, p)
        rho[rows, cols] = block
        if p == 0:
            continue
        mirrored = np.conj(block) if mirror == "hermitian" else block.T
        rho[cols, rows] = mirrored
    return rho


def full_to_sector(rho: np.ndarray, n_max: int) -> np.ndarray:
    lay = layout(n_max)
    vec = np.zeros(lay.dim, dtype=complex)
    for p in range(n_max + 1):
        rows, cols = _block_positions(n_max, p)
        lay.block(vec, p)[:, :] = rho[rows, cols]
    return vec


def charge(n_max: int) -> np.ndarray:
    """ q = (n1 + n2) - (m1 + m2) for every element of a two-mode matrix """
    d = n_max + 1
    n1, n2 = np.divmod(np.arange(d * d), d)
    total = n1 + n2
    return total[:, None] - total[None, :]
