import csv
import math

import numpy as np
import pytest

from masersync import errors
from masersync.phase import (_check_density, distribution_from_harmonics, export_phase_csv,
                             phase_grid, relative_phase_distribution,
                             single_phase_distribution, sync_strength)
from masersync.solver import solve_point
from masersync.types import CouplingKind, CouplingSpec


def _coherent_state(amplitude, angle, levels=20):
    n = np.arange(levels)
    log_fact = np.array([math.lgamma(k + 1) for k in n])
    c = np.exp(n * math.log(amplitude) - 0.5 * log_fact) * np.exp(1j * n * angle)
    c /= np.linalg.norm(c)
    return np.outer(c, c.conj())


def test_phase_grid():
    grid = phase_grid(16)
    assert grid[0] == -math.pi
    assert grid[-1] < math.pi
    with pytest.raises(errors.InvalidParameters):
        phase_grid(4)


def test_uncoupled_distribution_is_uniform(params, trunc):
    state = solve_point(params, CouplingSpec.uncoupled(), n_max=trunc.n_max)
    dist = relative_phase_distribution(state)
    assert np.max(np.abs(dist.values - 1 / (2 * math.pi))) < 1e-10
    assert abs(sync_strength(dist).value) < 1e-9


def test_superposition_of_two_levels():
    rho = np.full((2, 2), 0.5, dtype=complex)
    dist = single_phase_distribution(rho)
    expected = (1 + np.cos(dist.grid)) / (2 * math.pi)
    assert np.max(np.abs(dist.values - expected)) < 1e-12
    s = sync_strength(dist)
    assert s.value == pytest.approx(1.0, abs=1e-9)
    assert s.location == pytest.approx(0.0, abs=1e-6)


def test_diagonal_state_has_no_phase():
    dist = single_phase_distribution(np.diag([0.5, 0.3, 0.2]))
    assert np.allclose(dist.values, 1 / (2 * math.pi), atol=1e-15)


def test_coherent_state_peaks_at_its_phase():
    dist = single_phase_distribution(_coherent_state(1.5, 0.7))
    assert sync_strength(dist).location == pytest.approx(0.7, abs=1e-6)
    assert dist.integral() == pytest.approx(1.0, abs=1e-10)


def test_single_mode_input_checks():
    with pytest.raises(errors.InvalidState):
        single_phase_distribution(np.array([[0.5, 0.5], [0.0, 0.5]]))
    with pytest.raises(errors.InvalidState):
        single_phase_distribution(np.eye(2))


def test_negative_density_is_rejected():
    dist = distribution_from_harmonics([1.0])
    with pytest.raises(errors.InvalidState):
        _check_density(dist)


def test_normalization_and_grid_convergence(params, trunc):
    state = solve_point(params, CouplingSpec(kind=CouplingKind.DISSIPATIVE, eps=0.1),
                        n_max=trunc.n_max)
    fine = relative_phase_distribution(state, 2048)
    coarse = relative_phase_distribution(state, 1024)
    assert fine.integral() == pytest.approx(1.0, abs=1e-10)
    assert abs(sync_strength(fine).value - sync_strength(coarse).value) < 1e-9


def test_working_point_shapes(params, trunc):
    """ dissipative locks in phase, coherent at both 0 and pi """
    dis = relative_phase_distribution(solve_point(
        params, CouplingSpec(kind=CouplingKind.DISSIPATIVE, eps=0.1), n_max=trunc.n_max))
    coh = relative_phase_distribution(solve_point(
        params, CouplingSpec(kind=CouplingKind.COHERENT, eps=0.1), n_max=trunc.n_max))
    assert np.max(np.abs(coh.density(coh.grid + math.pi) - coh.values)) < 1e-8
    assert abs(dis.density(math.pi) - dis.density(0.0)) > 1e-3
    assert sync_strength(dis).value > sync_strength(coh).value


def test_export_phase_csv(tmp_path):
    dist = distribution_from_harmonics([0.1], grid_size=16)
    fpath = tmp_path / "phase.csv"
    export_phase_csv(dist, fpath)
    with open(fpath) as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["phi", "P"]
    assert len(rows) == 17
    assert float(rows[1][0]) == -math.pi
