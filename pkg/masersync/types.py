import math
from enum import Enum
from typing import Optional

from pydantic import BaseModel, validator

from masersync import defaults


class CouplingKind(str, Enum):
    COHERENT = "coherent"
    DISSIPATIVE = "dissipative"


class MaserParams(BaseModel):
    """
    Physical parameters of one micromaser in units where the cavity
    decay rate is one.

    :param N: atom injection rate
    :param phi: Rabi angle accumulated by one atom transit (radians)
    """
    N: float
    phi: float

    class Config:
        frozen = True

    @validator("N", "phi")
    def _non_negative(cls, v, field):
        if not math.isfinite(v) or v < 0:
            raise ValueError(f"{field.name} must be finite and >= 0, got {v}")
        return float(v)

    @property
    def theta(self) -> float:
        """ pump parameter phi * sqrt(N) """
        return self.phi * math.sqrt(self.N)

    @classmethod
    def from_theta(cls, N: float, theta: float) -> "MaserParams":
        """ sweeps vary phi at fixed N """
        if N <= 0:
            if theta != 0:
                raise ValueError("theta > 0 needs N > 0, pass phi instead")
            return cls(N=N, phi=0.0)
        return cls(N=N, phi=theta / math.sqrt(N))

    def with_rate(self, N: float) -> "MaserParams":
        return MaserParams(N=N, phi=self.phi)


class CouplingSpec(BaseModel):
    kind: CouplingKind
    eps: float = 0.0

    class Config:
        frozen = True

    @validator("eps")
    def _eps_non_negative(cls, v):
        if not math.isfinite(v) or v < 0:
            raise ValueError(f"eps must be finite and >= 0, got {v}")
        return float(v)

    @classmethod
    def uncoupled(cls, kind=CouplingKind.DISSIPATIVE) -> "CouplingSpec":
        return cls(kind=kind, eps=0.0)


class Truncation(BaseModel):
    """
    :param n_max: largest Fock occupation kept in each mode
    :param tail_mass: analytic P_n mass beyond n_max
    :param threshold: threshold the truncation was chosen for
    """
    n_max: int
    tail_mass: float = 0.0
    threshold: float = defaults.TRUNCATION_THRESHOLD

    class Config:
        frozen = True

    @validator("n_max")
    def _at_least_one(cls, v):
        if v < 1:
            raise ValueError(f"n_max must be >= 1, got {v}")
        return v

    @property
    def levels(self) -> int:
        return self.n_max + 1

    def grow(self, step: int) -> "Truncation":
        return Truncation(n_max=self.n_max + step, tail_mass=0.0,
                          threshold=self.threshold)


class SectorIndex(BaseModel):
    p: int
    n: int
    m: int

    class Config:
        frozen = True


class CorrelationReport(BaseModel):
    s1: float = 0.0
    s2: float = 0.0
    s12: float = 0.0
    mi: float = 0.0
    log_neg: float = 0.0
    min_ev_pt: float = 0.0


class SemiclassicalPrediction(BaseModel):
    """
    :param delta_tilde: linewidth of the rescaled uncoupled maser
    :param kappa: concentration eps_tilde / delta_tilde
    :param s_sc: synchronization strength of the von Mises distribution
    :param valid: False when the parameters are outside the regime the
    drift-diffusion picture assumes (advisory only)
    """
    delta_tilde: float
    kappa: float
    s_sc: float
    mean_n: float
    n_tilde: float
    eps_tilde: float
    valid: bool = True


class SweepRow(BaseModel):
    theta: float
    N: float
    phi: float
    eps: float
    coupling: CouplingKind
    n_max: Optional[int] = None
    mean_n: Optional[float] = None
    mean_n_uncoupled: Optional[float] = None
    fano: Optional[float] = None
    S_quantum: Optional[float] = None
    S_perturb: Optional[float] = None
    S_semiclassical: Optional[float] = None
    delta_tilde: Optional[float] = None
    kappa: Optional[float] = None
    rel_diff_sc: Optional[float] = None
    peak_location: Optional[float] = None
    mutual_info: Optional[float] = None
    log_negativity: Optional[float] = None
    residual: Optional[float] = None
    truncation_ok: Optional[bool] = None
    status: str = "ok"
    error: Optional[str] = None
    wall_time_ms: Optional[float] = None
