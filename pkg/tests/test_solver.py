import math

import numpy as np
import pytest
from scipy import sparse

from masersync import errors
from masersync.analytics import fano_factor, steady_number_distribution
from masersync.base import GeneratorSpec
from masersync.fock import charge, full_to_sector
from masersync.generator import assemble_full_generator, assemble_sector_generator
from masersync.phase import relative_phase_distribution, sync_strength
from masersync.solver import (null_vector, solve_full_steady_state, solve_point,
                              solve_sector_steady_state)
from masersync.types import CouplingKind, CouplingSpec, MaserParams, Truncation


def test_uncoupled_state_is_a_product(params, trunc, kind):
    state = solve_point(params, CouplingSpec.uncoupled(kind), n_max=trunc.n_max)
    probs = steady_number_distribution(params, trunc).probs
    assert np.max(np.abs(state.populations - np.outer(probs, probs))) < 1e-10
    for p in range(1, trunc.n_max + 1):
        assert np.max(np.abs(state.block(p))) < 1e-10
    assert state.residual < 1e-10


def test_no_pumping_gives_vacuum(kind):
    state = solve_point(MaserParams(N=0.0, phi=1.0), CouplingSpec(kind=kind, eps=0.3))
    assert state.populations[0, 0] == pytest.approx(1.0, abs=1e-12)
    assert state.mean_n() == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("n_max", [3, 4, 5])
@pytest.mark.parametrize("eps", [0.01, 0.1])
def test_sector_matches_full_steady_state(small_params, kind, n_max, eps):
    coupling = CouplingSpec(kind=kind, eps=eps)
    trunc = Truncation(n_max=n_max)
    sector = solve_sector_steady_state(
        assemble_sector_generator(small_params, coupling, trunc))
    rho = solve_full_steady_state(assemble_full_generator(small_params, coupling, trunc))
    assert np.max(np.abs(full_to_sector(rho, n_max) - sector.vector)) < 1e-9
    assert np.max(np.abs(rho[charge(n_max) != 0])) < 1e-10


def test_exchange_symmetry(params, trunc, kind):
    state = solve_point(params, CouplingSpec(kind=kind, eps=0.1), n_max=trunc.n_max)
    for block in state.blocks:
        assert np.max(np.abs(block - block.conj().T)) < 1e-10
    assert np.allclose(state.marginal(1), state.marginal(2), atol=1e-12)


def test_reconstructed_state_is_positive(params, trunc, kind):
    state = solve_point(params, CouplingSpec(kind=kind, eps=0.5), n_max=trunc.n_max)
    rho = state.density_matrix()
    assert np.linalg.eigvalsh(rho).min() > -1e-8
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)


def test_coherent_odd_sectors_are_imaginary(params, trunc):
    state = solve_point(params, CouplingSpec(kind=CouplingKind.COHERENT, eps=0.2),
                        n_max=trunc.n_max)
    for p, block in enumerate(state.blocks):
        part = block.real if p % 2 else block.imag
        assert np.max(np.abs(part)) < 1e-10


def test_truncation_robustness(params, trunc):
    coupling = CouplingSpec(kind=CouplingKind.DISSIPATIVE, eps=0.1)
    a = solve_point(params, coupling, n_max=trunc.n_max)
    b = solve_point(params, coupling, n_max=2 * trunc.n_max)
    assert b.mean_n() == pytest.approx(a.mean_n(), rel=1e-6)
    s_a = sync_strength(relative_phase_distribution(a)).value
    s_b = sync_strength(relative_phase_distribution(b)).value
    assert s_b == pytest.approx(s_a, rel=1e-6)


def test_adaptive_truncation_at_trapping(trapped_params):
    coupling = CouplingSpec(kind=CouplingKind.DISSIPATIVE, eps=0.5)
    state = solve_point(trapped_params, coupling)
    assert state.truncation_ok
    assert not state.warnings
    assert state.top_occupation() <= 1e-8
    # the exchange term lifts |1,1> to |2,0>, so the cutoff does not hold
    assert state.marginal(1)[2:].sum() > 1e-3
    grown = solve_point(trapped_params, coupling, n_max=state.n_max + 8)
    assert grown.mean_n(1) == pytest.approx(state.mean_n(1), rel=1e-5)
    lifted = state.marginal(1)[2:].sum()
    assert grown.marginal(1)[2:].sum() == pytest.approx(lifted, rel=1e-5)


def test_adaptive_cap_is_reported(params):
    state = solve_point(params, CouplingSpec(kind=CouplingKind.COHERENT, eps=0.1),
                        min_nmax=2, threshold=0.5, cap=3)
    assert not state.truncation_ok
    assert state.warnings


class _ZeroGenerator(GeneratorSpec):
    kind = "zero"

    def trace_weights(self):
        return np.ones(self.dim)

    def pin_rows(self):
        return 0, 1


def test_singular_generator_is_reported(small_params):
    gen = _ZeroGenerator(sparse.csr_matrix((3, 3), dtype=complex), small_params,
                         CouplingSpec.uncoupled(), Truncation(n_max=1))
    with pytest.raises(errors.SingularSteadyState):
        null_vector(gen)


def test_full_state_uncoupled_product(small_params):
    trunc = Truncation(n_max=3)
    rho = solve_full_steady_state(
        assemble_full_generator(small_params, CouplingSpec.uncoupled(), trunc))
    probs = steady_number_distribution(small_params, trunc).probs
    assert np.max(np.abs(rho - np.diag(np.kron(probs, probs)))) < 1e-10
    assert math.isclose(np.trace(rho).real, 1.0, abs_tol=1e-12)


def test_uncoupled_fano_matches_analytic(params, trunc, kind):
    state = solve_point(params, CouplingSpec.uncoupled(kind), n_max=trunc.n_max)
    expected = fano_factor(steady_number_distribution(params, trunc))
    assert state.fano(1) == pytest.approx(expected, rel=1e-8)
    assert state.fano(2) == pytest.approx(expected, rel=1e-8)
