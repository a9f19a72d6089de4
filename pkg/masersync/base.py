from abc import ABC, abstractmethod
from typing import Tuple

import numpy as np
from scipy import sparse

from masersync.types import CouplingSpec, MaserParams, Truncation


class GeneratorSpec(ABC):
    """
    Interface of a steady-state generator: a sparse linear map L whose
    null vector, normalized by a trace functional, is the steady state.

    :param kind: "sector" or "full"
    :param matrix: the generator in CSR form
    """
    kind: str

    def __init__(self, matrix: sparse.csr_matrix, params: MaserParams,
                 coupling: CouplingSpec, trunc: Truncation):
        self.matrix = matrix
        self.params = params
        self.coupling = coupling
        self.trunc = trunc

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_max(self) -> int:
        return self.trunc.n_max

    def apply(self, vec: np.ndarray) -> np.ndarray:
        return self.matrix @ vec

    @abstractmethod
    def trace_weights(self) -> np.ndarray:
        """ weights w such that w . x is the trace of the state x """
        pass

    @abstractmethod
    def pin_rows(self) -> Tuple[int, int]:
        """ two redundant equations that may carry the trace condition """
        pass
