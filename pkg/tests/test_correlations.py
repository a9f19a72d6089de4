import math

import numpy as np
import pytest

from masersync import errors
from masersync.analytics import steady_number_distribution
from masersync.correlations import (correlation_report, logarithmic_negativity,
                                    mutual_information, partial_trace,
                                    partial_transpose, swap_modes,
                                    von_neumann_entropy)
from masersync.solver import solve_point
from masersync.types import CouplingSpec


def _ket(d, n1, n2):
    v = np.zeros(d * d, dtype=complex)
    v[n1 * d + n2] = 1.0
    return v


def _bell(d=3):
    psi = (_ket(d, 0, 1) + _ket(d, 1, 0)) / math.sqrt(2)
    return np.outer(psi, psi.conj())


def test_entropy_limits():
    assert von_neumann_entropy(np.diag([1.0, 0, 0])) == 0.0
    assert von_neumann_entropy(np.eye(4) / 4) == pytest.approx(math.log(4), abs=1e-12)
    probs = np.array([0.5, 0.3, 0.2])
    assert von_neumann_entropy(np.diag(probs)) == \
        pytest.approx(-np.sum(probs * np.log(probs)), abs=1e-12)


def test_entropy_rejects_negative_state():
    with pytest.raises(errors.InvalidState):
        von_neumann_entropy(np.diag([1.2, -0.2]))


def test_partial_trace_of_product():
    a = np.diag([0.7, 0.2, 0.1]).astype(complex)
    b = np.diag([0.1, 0.3, 0.6]).astype(complex)
    rho = np.kron(a, b)
    assert np.allclose(partial_trace(rho, 1), a)
    assert np.allclose(partial_trace(rho, 2), b)
    with pytest.raises(errors.InvalidParameters):
        partial_trace(rho, 3)


def test_product_state_is_uncorrelated():
    a = np.diag([0.7, 0.2, 0.1])
    report = correlation_report(np.kron(a, a))
    assert abs(report.mi) < 1e-12
    assert report.log_neg == 0.0


def test_bell_state():
    rho = _bell()
    info = mutual_information(rho)
    assert info.s12 == pytest.approx(0.0, abs=1e-12)
    assert info.mi == pytest.approx(2 * math.log(2), abs=1e-12)
    neg = logarithmic_negativity(rho)
    assert neg.log_neg == pytest.approx(1.0, abs=1e-12)
    assert neg.min_ev_pt == pytest.approx(-0.5, abs=1e-12)


def test_transposes():
    rho = _bell()
    assert np.allclose(swap_modes(rho), rho)
    assert np.allclose(partial_transpose(partial_transpose(rho)), rho)


def test_uncoupled_state_has_no_correlations(params, trunc, kind):
    state = solve_point(params, CouplingSpec.uncoupled(kind), n_max=trunc.n_max)
    report = correlation_report(state)
    probs = steady_number_distribution(params, trunc).probs
    probs = probs[probs > 0]
    assert report.s1 == pytest.approx(-np.sum(probs * np.log(probs)), abs=1e-10)
    assert abs(report.mi) < 1e-10
    assert report.log_neg == 0.0


def test_swap_invariance(params, trunc, kind):
    state = solve_point(params, CouplingSpec(kind=kind, eps=0.3), n_max=trunc.n_max)
    rho = state.density_matrix()
    assert np.max(np.abs(swap_modes(rho) - rho)) < 1e-10
    report = correlation_report(state)
    assert report.s1 == pytest.approx(report.s2, abs=1e-10)
    assert report.mi > 0


def test_shape_check():
    with pytest.raises(errors.InvalidState):
        partial_transpose(np.eye(5) / 5)



def test_negativity_rejects_invalid_states():
    rho = _bell()
    skewed = rho.copy()
    skewed[1, 3] += 0.1
    with pytest.raises(errors.InvalidState):
        logarithmic_negativity(skewed)
    with pytest.raises(errors.InvalidState):
        logarithmic_negativity(2.0 * rho)
