"""
Generators of the coupled two-maser master equation.

Two representations are built:

* ``SectorGenerator``: the equations of motion of the charge-neutral
  elements rho^(p)_{n,m}, p >= 0, written with the number-basis
  coefficients mu, c and d plus the coupling terms that link sector p
  to p +/- 1. This is the production path.
* ``FullGenerator``: the Lindblad superoperator on two-mode density
  matrices, for small truncations only. It is the oracle the sector
  generator is checked against.

Both use truncated jump operators in Lindblad form so that the trace is
conserved at finite n_max.
"""
import logging
from typing import Tuple

import numpy as np
from scipy import sparse

from masersync import defaults, errors
from masersync.analytics import rabi_sin
from masersync.base import GeneratorSpec
from masersync.fock import SectorLayout, full_to_sector, layout, sector_to_full
from masersync.types import CouplingKind, CouplingSpec, MaserParams, Truncation

logger = logging.getLogger(__name__)


def _out(value):
    value = np.asarray(value)
    return float(value) if value.ndim == 0 else value


def coeff_mu(n, p, params: MaserParams):
    """
    mu_n^(p) = 4N sin^2[(phi/2)(sqrt(n+p+1) - sqrt(n+1))]
               + 2[n + p/2 - sqrt(n(n+p))]
    """
    n = np.asarray(n, dtype=float)
    p = np.asarray(p, dtype=float)
    half = 0.5 * params.phi * (np.sqrt(n + p + 1) - np.sqrt(n + 1))
    gain = 4.0 * params.N * np.sin(half) ** 2
    # n + p/2 - sqrt(n(n+p)) without cancellation
    denom = n + 0.5 * p + np.sqrt(n * (n + p))
    with np.errstate(divide="ignore", invalid="ignore"):
        loss = np.where(denom > 0, 0.25 * p * p / denom, 0.0)
    return _out(gain + 2.0 * loss)


def coeff_c(n, p, params: MaserParams):
    """ c_n^(p) = N sin(phi sqrt(n+1)) sin(phi sqrt(n+1+p)) """
    n = np.asarray(n, dtype=float)
    p = np.asarray(p, dtype=float)
    value = params.N * rabi_sin(params.phi, n + 1) * rabi_sin(params.phi, n + 1 + p)
    return _out(value)


def coeff_d(n, p):
    """ d_n^(p) = sqrt(n(n+p)) """
    n = np.asarray(n, dtype=float)
    p = np.asarray(p, dtype=float)
    return _out(np.sqrt(n * (n + p)))


def rescale_dissipative(params: MaserParams, eps: float) \
        -> Tuple[MaserParams, float]:
    """
    Absorb the local part of the shared loss channel into the cavity
    decay: N -> N/(1+eps), eps -> eps/(1+eps).
    """
    if eps < 0:
        raise errors.InvalidParameters("eps", eps, "must be >= 0")
    if eps == 0:
        return params, 0.0
    return params.with_rate(params.N / (1.0 + eps)), eps / (1.0 + eps)


class SectorGenerator(GeneratorSpec):
    """
    :param params_effective: parameters the equations are written with
    (rescaled for dissipative coupling)
    :param eps_effective: coupling strength in the equations
    :param rate_scale: the generator equals the bare master equation
    divided by this factor
    """
    kind = "sector"

    def __init__(self, matrix, params, coupling, trunc, *,
                 params_effective: MaserParams, eps_effective: float,
                 rate_scale: float = 1.0):
        super().__init__(matrix, params, coupling, trunc)
        self.params_effective = params_effective
        self.eps_effective = eps_effective
        self.rate_scale = rate_scale
        self.layout: SectorLayout = layout(trunc.n_max)

    def trace_weights(self) -> np.ndarray:
        w = np.zeros(self.dim)
        side = self.layout.side(0)
        w[:side * side] = 1.0
        return w

    def pin_rows(self) -> Tuple[int, int]:
        k = max(1, self.n_max // 2)
        return self.layout.index(0, 0, 0), self.layout.index(0, k, k)

    def block(self, p: int, q: int = None) -> sparse.csr_matrix:
        """ rows of sector p, columns of sector q (default p) """
        q = p if q is None else q
        lay = self.layout
        rows = slice(int(lay.offsets[p]), int(lay.offsets[p + 1]))
        cols = slice(int(lay.offsets[q]), int(lay.offsets[q + 1]))
        return self.matrix[rows, cols]


class _Assembler:
    """ collects (row, col, value) triplets in a fixed order """

    def __init__(self, lay: SectorLayout):
        self.lay = lay
        self.rows, self.cols, self.vals = [], [], []

    def add(self, row, col, val):
        self.rows.append(np.ravel(row))
        self.cols.append(np.ravel(col))
        self.vals.append(np.ravel(val).astype(complex))

    def add_ref(self, row, p, n, m, coef):
        coef = np.broadcast_to(np.asarray(coef, dtype=complex), row.shape)
        mask, idx = self.lay.resolve_many(p, n, m)
        keep = mask & (coef != 0)
        self.add(row[keep], idx[keep], coef[keep])

    def build(self) -> sparse.csr_matrix:
        dim = self.lay.dim
        coo = sparse.coo_matrix(
            (np.concatenate(self.vals),
             (np.concatenate(self.rows), np.concatenate(self.cols))),
            shape=(dim, dim))
        return coo.tocsr()


def _check_truncation(trunc: Truncation):
    """ a fixed n_max is taken as given; only a recorded tail is checked """
    if trunc.n_max > defaults.NMAX_HARD_CAP:
        raise errors.TruncationCapExceeded(trunc.n_max, defaults.NMAX_HARD_CAP)
    if trunc.tail_mass > trunc.threshold:
        raise errors.InvalidParameters(
            "truncation", trunc.n_max,
            f"tail mass {trunc.tail_mass:.2e} above its threshold {trunc.threshold:.1e}")


def assemble_sector_generator(params: MaserParams, coupling: CouplingSpec,
                              trunc: Truncation) -> SectorGenerator:
    _check_truncation(trunc)
    if coupling.kind == CouplingKind.DISSIPATIVE:
        eff, eps = rescale_dissipative(params, coupling.eps)
        rate_scale = 1.0 + coupling.eps
    else:
        eff, eps = params, coupling.eps
        rate_scale = 1.0

    n_max = trunc.n_max
    lay = layout(n_max)
    asm = _Assembler(lay)
    # gain out of the top level is truncated together with its anticommutator
    leak = 0.5 * eff.N * rabi_sin(eff.phi, n_max + 1) ** 2

    for p in range(n_max + 1):
        side = lay.side(p)
        n, m = np.meshgrid(np.arange(side), np.arange(side), indexing="ij")
        row = lay.offsets[p] + n * side + m

        diag = -(0.5 * (coeff_mu(n, p, eff) + coeff_mu(m, p, eff))
                 + coeff_c(n, p, eff) + coeff_d(n, p)
                 + coeff_c(m, p, eff) + coeff_d(m, p))
        top = ((n == n_max).astype(int) + (n + p == n_max)
               + (m == n_max) + (m + p == n_max))
        asm.add(row, row, diag + leak * top)

        asm.add_ref(row, p, n - 1, m, coeff_c(n - 1, p, eff))
        asm.add_ref(row, p, n, m - 1, coeff_c(m - 1, p, eff))
        asm.add_ref(row, p, n + 1, m, coeff_d(n + 1, p))
        asm.add_ref(row, p, n, m + 1, coeff_d(m + 1, p))

        if eps == 0:
            continue
        if coupling.kind == CouplingKind.COHERENT:
            _coherent_terms(asm, row, p, n, m, eps)
        else:
            _dissipative_terms(asm, row, p, n, m, eps)

    matrix = asm.build()
    logger.debug("sector generator n_max=%s D=%s nnz=%s",
                 n_max, lay.dim, matrix.nnz)
    return SectorGenerator(matrix, params, coupling, trunc,
                           params_effective=eff, eps_effective=eps,
                           rate_scale=rate_scale)


def _coherent_terms(asm, row, p, n, m, eps):
    """ -i[H, rho] with H = eps (a1 a2^+ + a1^+ a2) """
    g = -1j * eps
    asm.add_ref(row, p + 1, n - 1, m, g * np.sqrt(n * (m + p + 1)))
    asm.add_ref(row, p - 1, n + 1, m, g * np.sqrt((n + 1) * (m + p)))
    asm.add_ref(row, p - 1, n, m + 1, -g * np.sqrt((n + p) * (m + 1)))
    asm.add_ref(row, p + 1, n, m - 1, -g * np.sqrt((n + p + 1) * m))


def _dissipative_terms(asm, row, p, n, m, eps):
    """ cross terms of the shared loss channel a1 - a2 """
    asm.add_ref(row, p - 1, n + 1, m + 1, -eps * np.sqrt((n + 1) * (m + 1)))
    asm.add_ref(row, p + 1, n, m, -eps * np.sqrt((n + p + 1) * (m + p + 1)))
    asm.add_ref(row, p + 1, n - 1, m, 0.5 * eps * np.sqrt(n * (m + p + 1)))
    asm.add_ref(row, p + 1, n, m - 1, 0.5 * eps * np.sqrt((n + p + 1) * m))
    asm.add_ref(row, p - 1, n + 1, m, 0.5 * eps * np.sqrt((n + 1) * (m + p)))
    asm.add_ref(row, p - 1, n, m + 1, 0.5 * eps * np.sqrt((n + p) * (m + 1)))


class FullGenerator(GeneratorSpec):
    """ Lindblad superoperator acting on row-major vectorized two-mode matrices """
    kind = "full"

    @property
    def levels(self) -> int:
        return self.n_max + 1

    def trace_weights(self) -> np.ndarray:
        states = self.levels ** 2
        w = np.zeros(states * states)
        w[np.arange(states) * states + np.arange(states)] = 1.0
        return w

    def pin_rows(self) -> Tuple[int, int]:
        states = self.levels ** 2
        mid = states // 2
        return 0, mid * states + mid


def _mode_operators(params: MaserParams, n_max: int):
    d = n_max + 1
    k = np.arange(d, dtype=float)
    lower = sparse.diags(np.sqrt(k[1:]), 1, shape=(d, d), format="csr")
    cos_op = sparse.diags(np.cos(params.phi * np.sqrt(k + 1)), 0, format="csr")
    gain_op = sparse.diags(rabi_sin(params.phi, k[1:]), -1,
                           shape=(d, d), format="csr")
    return lower, cos_op, gain_op


def _dissipator(jump: sparse.spmatrix) -> sparse.csr_matrix:
    """ J rho J^+ - 1/2 {J^+ J, rho} in row-major vectorization """
    eye = sparse.identity(jump.shape[0], format="csr")
    jdj = (jump.conj().T @ jump).tocsr()
    return (sparse.kron(jump, jump.conj())
            - 0.5 * sparse.kron(jdj, eye)
            - 0.5 * sparse.kron(eye, jdj.T)).tocsr()


def _commutator(ham: sparse.spmatrix) -> sparse.csr_matrix:
    eye = sparse.identity(ham.shape[0], format="csr")
    return (-1j * (sparse.kron(ham, eye) - sparse.kron(eye, ham.T))).tocsr()


def assemble_full_generator(params: MaserParams, coupling: CouplingSpec,
                            trunc: Truncation,
                            cap: int = defaults.FULL_NMAX_CAP) -> FullGenerator:
    if trunc.n_max > cap:
        raise errors.GeneratorCapExceeded(trunc.n_max, cap)
    lower, cos_op, gain_op = _mode_operators(params, trunc.n_max)
    eye = sparse.identity(trunc.n_max + 1, format="csr")
    modes = [
        (sparse.kron(op, eye, format="csr"), sparse.kron(eye, op, format="csr"))
        for op in (lower, cos_op, gain_op)
    ]
    (a1, a2), (c1, c2), (g1, g2) = modes

    matrix = None
    for a, c, g in ((a1, c1, g1), (a2, c2, g2)):
        local = params.N * (_dissipator(c) + _dissipator(g)) + _dissipator(a)
        matrix = local if matrix is None else matrix + local

    eps = coupling.eps
    if eps > 0:
        if coupling.kind == CouplingKind.COHERENT:
            ham = eps * (a1 @ a2.T + a1.T @ a2)
            matrix = matrix + _commutator(ham)
        else:
            matrix = matrix + eps * _dissipator(a1 - a2)
    matrix = sparse.csr_matrix(matrix, dtype=complex)
    return FullGenerator(matrix, params, coupling, trunc)


def project_full_generator(full: FullGenerator) -> np.ndarray:
    """
    Dense restriction of the full generator to the stored sectors, column by
    column, with negative sectors supplied by the exchange identity. Divide by
    ``SectorGenerator.rate_scale`` before comparing with a sector generator.
    """
    n_max = full.n_max
    dim = layout(n_max).dim
    out = np.zeros((dim, dim), dtype=complex)
    for j in range(dim):
        unit = np.zeros(dim, dtype=complex)
        unit[j] = 1.0
        rho = sector_to_full(unit, n_max, mirror="exchange")
        drho = (full.matrix @ rho.ravel()).reshape(rho.shape)
        out[:, j] = full_to_sector(drho, n_max)
    return out
