import numpy as np
import pytest

from masersync import errors
from masersync.analytics import steady_number_distribution
from masersync.perturbation import (first_order_source, perturbative_phase_distribution,
                                    perturbative_sync_strength, solve_first_order,
                                    solve_perturbative, solve_second_order_coherent)
from masersync.phase import relative_phase_distribution, sync_strength
from masersync.solver import solve_point
from masersync.types import CouplingKind, CouplingSpec, MaserParams, Truncation


def _exact(params, kind, eps, n_max):
    return solve_point(params, CouplingSpec(kind=kind, eps=eps), n_max=n_max)


def test_coherent_source_values(params, trunc):
    dist = steady_number_distribution(params, trunc)
    source = first_order_source(CouplingKind.COHERENT, params, dist)
    P = dist.probs
    assert np.all(np.diag(source) == 0)
    assert source[0, 1] == pytest.approx(-1j * np.sqrt(2) * (P[1] * P[1] - P[0] * P[2]))


def test_dissipative_source_vanishes_for_vacuum():
    params = MaserParams(N=0.0, phi=1.0)
    trunc = Truncation(n_max=3)
    dist = steady_number_distribution(params, trunc)
    assert np.all(first_order_source(CouplingKind.DISSIPATIVE, params, dist) == 0)


def test_coherent_first_order_structure(params, trunc):
    rho1 = solve_first_order(CouplingKind.COHERENT, params, trunc).rho1
    scale = np.max(np.abs(rho1))
    assert scale > 0
    assert np.max(np.abs(rho1.real)) <= 1e-9 * scale
    assert np.max(np.abs(rho1 + rho1.T)) <= 1e-9 * scale
    assert abs(rho1.sum()) <= 1e-9 * scale


def test_dissipative_first_order_structure(params, trunc):
    state = solve_first_order(CouplingKind.DISSIPATIVE, params, trunc)
    rho1 = state.rho1
    assert np.max(np.abs(rho1.imag)) == 0
    assert np.max(np.abs(rho1 - rho1.T)) <= 1e-9 * np.max(np.abs(rho1))
    assert state.c1 == pytest.approx(2 * rho1.sum().real)
    assert state.c0 is None


def test_first_order_matches_exact(params, trunc, kind):
    eps = 1e-4
    first = solve_first_order(kind, params, trunc, eps=eps)
    exact = _exact(params, kind, eps, trunc.n_max).block(1)
    assert np.max(np.abs(exact - eps * first.rho1)) < 1e-9


def test_first_order_converges_quadratically(params, trunc):
    bare = solve_first_order(CouplingKind.DISSIPATIVE, params, trunc).rho1
    errs = []
    for eps in (2e-4, 1e-4):
        exact = _exact(params, CouplingKind.DISSIPATIVE, eps, trunc.n_max).block(1)
        errs.append(np.max(np.abs(exact - eps * bare)))
    assert 3.5 <= errs[0] / errs[1] <= 4.5


def test_second_order_is_real(params, trunc):
    state = solve_second_order_coherent(params, trunc)
    assert state.rho2.dtype == float
    assert state.c0 == pytest.approx(2 * state.rho2.sum())
    assert state.c0 != 0


def test_second_order_rejects_dissipative(params, trunc):
    first = solve_first_order(CouplingKind.DISSIPATIVE, params, trunc)
    with pytest.raises(errors.InvalidParameters):
        solve_second_order_coherent(params, trunc, first)


def test_second_order_needs_two_levels(params):
    state = solve_second_order_coherent(params, Truncation(n_max=1))
    assert state.c0 == 0.0


def test_perturbative_sync_matches_exact(params, trunc, kind):
    eps = 1e-3
    state = solve_perturbative(kind, params, trunc, eps)
    exact = sync_strength(relative_phase_distribution(
        _exact(params, kind, eps, trunc.n_max))).value
    assert perturbative_sync_strength(state, eps) == pytest.approx(exact, rel=0.05)


def test_perturbative_distribution_shape(params, trunc, kind):
    eps = 1e-2
    state = solve_perturbative(kind, params, trunc, eps)
    dist = perturbative_phase_distribution(state, eps)
    assert dist.integral() == pytest.approx(1.0, abs=1e-12)
    s = sync_strength(dist)
    assert s.value == pytest.approx(perturbative_sync_strength(state, eps), rel=1e-9)
    if kind == CouplingKind.COHERENT:
        # pi-periodic
        assert np.allclose(dist.density(dist.grid + np.pi), dist.values, atol=1e-14)
