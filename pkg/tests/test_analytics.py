import math

import numpy as np
import pytest

from masersync import errors
from masersync.analytics import (fano_factor, mean_occupation, rabi_sin,
                                 steady_number_distribution, trapping_angles)
from masersync.fock import choose_truncation
from masersync.types import MaserParams, Truncation


def test_rabi_sin_exact_trapping_zero():
    phi = math.pi / math.sqrt(2)
    assert rabi_sin(phi, 2) == 0.0
    assert rabi_sin(phi, 1) != 0.0
    assert rabi_sin(math.pi, 1) == 0.0


def test_detailed_balance_random_points():
    rng = np.random.default_rng(7)
    for _ in range(200):
        N = rng.uniform(0.5, 50.0)
        theta = rng.uniform(0.2, 6.0)
        params = MaserParams.from_theta(N, theta)
        dist = steady_number_distribution(params, choose_truncation(params))
        probs = dist.probs
        n = np.arange(1, len(probs))
        gain = N * rabi_sin(params.phi, n) ** 2
        assert abs(probs.sum() - 1.0) < 1e-12
        assert np.max(np.abs(probs[1:] * n - gain * probs[:-1])) < 1e-12


def test_normalization_constant(params, trunc):
    dist = steady_number_distribution(params, trunc)
    assert dist.K == pytest.approx(dist.probs[0], rel=1e-12)
    assert dist.log_K == pytest.approx(math.log(dist.K), rel=1e-12)


def test_vacuum_trap():
    params = MaserParams(N=5.0, phi=math.pi)
    trunc = choose_truncation(params)
    dist = steady_number_distribution(params, trunc)
    assert dist.probs[0] == 1.0
    assert mean_occupation(dist) == 0.0
    with pytest.raises(errors.InvalidParameters):
        fano_factor(dist)


def test_trapping_cutoff_distribution(trapped_params):
    trunc = choose_truncation(trapped_params)
    assert trunc.n_max == 1
    assert trunc.tail_mass == 0.0
    dist = steady_number_distribution(trapped_params, trunc)
    ratio = 5.0 * math.sin(math.pi / math.sqrt(2)) ** 2
    assert mean_occupation(dist) == pytest.approx(ratio / (1 + ratio), rel=1e-12)


def test_fano_of_two_level_distribution():
    params = MaserParams(N=2.0, phi=math.pi / math.sqrt(2))
    dist = steady_number_distribution(params, Truncation(n_max=1))
    p1 = dist.probs[1]
    # Bernoulli: variance p(1-p), mean p
    assert fano_factor(dist) == pytest.approx(1 - p1, rel=1e-12)


def test_peak_moves_out_above_threshold():
    below = MaserParams.from_theta(20.0, 0.5)
    above = MaserParams.from_theta(20.0, 1.5)
    assert steady_number_distribution(below, choose_truncation(below)).peak() == 0
    assert steady_number_distribution(above, choose_truncation(above)).peak() > 0


def test_trapping_angles_sorted():
    angles = trapping_angles(3, 1)
    assert [a.m for a in angles] == [3, 2, 1, 0]
    assert angles[0].phi == pytest.approx(math.pi / 2)
    n1 = [a for a in angles if a.m == 1][0]
    assert n1.theta(5.0) == pytest.approx(4.9673, abs=1e-4)


def test_trapping_angles_rejects_empty_range():
    with pytest.raises(errors.InvalidParameters):
        trapping_angles(0, 1)
