import math

import pytest

from masersync.fock import choose_truncation
from masersync.types import CouplingKind, MaserParams, Truncation


@pytest.fixture
def params():
    """ the working point used throughout: N=5, Theta=2 """
    return MaserParams.from_theta(5.0, 2.0)


@pytest.fixture
def trunc(params):
    return choose_truncation(params)


@pytest.fixture
def small_params():
    return MaserParams.from_theta(2.0, 1.5)


@pytest.fixture
def small_trunc():
    return Truncation(n_max=4)


@pytest.fixture
def trapped_params():
    """ gain out of the n=1 level vanishes (Theta ~ 4.97 at N=5) """
    return MaserParams(N=5.0, phi=math.pi / math.sqrt(2))


@pytest.fixture(params=[CouplingKind.COHERENT, CouplingKind.DISSIPATIVE],
                ids=["coherent", "dissipative"])
def kind(request):
    return request.param
