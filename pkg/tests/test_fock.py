import numpy as np
import pytest

from masersync import errors
from masersync.analytics import steady_number_distribution
from masersync.fock import (charge, choose_truncation, flat_index, full_to_sector,
                            layout, sector_dim, sector_index, sector_to_full)
from masersync.types import MaserParams, SectorIndex, Truncation


def test_sector_dim():
    assert sector_dim(1) == 5
    assert sector_dim(2) == 14
    assert layout(6).dim == sector_dim(6)


def test_index_map_is_a_bijection():
    trunc = Truncation(n_max=4)
    seen = set()
    for p in range(5):
        for n in range(5 - p):
            for m in range(5 - p):
                idx = SectorIndex(p=p, n=n, m=m)
                flat = flat_index(idx, trunc)
                assert sector_index(flat, trunc) == idx
                seen.add(flat)
    assert seen == set(range(sector_dim(4)))


def test_flat_index_out_of_range():
    with pytest.raises(errors.IndexOutOfRange):
        flat_index(SectorIndex(p=3, n=2, m=0), Truncation(n_max=4))
    with pytest.raises(errors.InvalidParameters):
        sector_index(sector_dim(4), Truncation(n_max=4))


def test_negative_sector_resolves_by_exchange():
    lay = layout(3)
    assert lay.resolve(-1, 1, 1) == lay.index(1, 0, 0)
    assert lay.resolve(-2, 3, 2) == lay.index(2, 0, 1)
    assert lay.resolve(-1, 0, 0) is None
    assert lay.resolve(1, 3, 0) is None


def test_truncation_is_minimal(params):
    trunc = choose_truncation(params)
    wide = steady_number_distribution(params, Truncation(n_max=200)).probs
    assert trunc.tail_mass < trunc.threshold
    assert wide[trunc.n_max + 1:].sum() < 1e-10
    assert wide[trunc.n_max:].sum() >= 1e-10


def test_truncation_at_trapping(trapped_params):
    trunc = choose_truncation(trapped_params)
    assert trunc.n_max == 1
    assert trunc.tail_mass == 0.0


def test_truncation_cap():
    with pytest.raises(errors.TruncationCapExceeded):
        choose_truncation(MaserParams.from_theta(50.0, 2.0), cap=5)


def test_truncation_threshold_range(params):
    with pytest.raises(errors.InvalidParameters):
        choose_truncation(params, threshold=0.0)


def test_sector_elements_are_charge_neutral():
    n_max = 3
    rng = np.random.default_rng(1)
    vec = rng.normal(size=sector_dim(n_max)) + 1j * rng.normal(size=sector_dim(n_max))
    # populations are real
    vec[:(n_max + 1) ** 2] = vec[:(n_max + 1) ** 2].real
    rho = sector_to_full(vec, n_max)
    q = charge(n_max)
    assert np.all(rho[q != 0] == 0)
    assert np.allclose(rho, rho.conj().T)
    assert np.array_equal(full_to_sector(rho, n_max), vec)
