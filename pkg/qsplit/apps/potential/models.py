"""
Potential domain types and the fixed unit system
"""
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np

from qsplit.core import settings


class UnitSystem:
    """
    eV / nm / fs units with masses in electron masses.
    E(k) = hbar^2 k^2 / 2m with hbar^2/(2 m_e) = 0.0380998 eV nm^2.
    """
    hbar = settings.HBAR_EV_FS
    hbar2_2me = settings.HBAR2_2ME_EV_NM2

    @classmethod
    def hbar2_2m(cls, mass: float) -> float:
        """hbar^2/(2m) in eV nm^2"""
        return cls.hbar2_2me / mass

    @classmethod
    def energy(cls, k, mass: float):
        return cls.hbar2_2m(mass) * np.square(k)

    @classmethod
    def wavenumber(cls, energy, mass: float):
        return np.sqrt(np.asarray(energy, dtype=float) / cls.hbar2_2m(mass))

    @classmethod
    def hbar_over_m(cls, mass: float) -> float:
        """hbar/m in nm^2/fs, so that hbar*k/m is a velocity in nm/fs"""
        return 2.0 * cls.hbar2_2m(mass) / cls.hbar

    @classmethod
    def kappa2(cls, k, v0: float, mass: float):
        """Local squared wavenumber k^2 - 2m V0/hbar^2 (negative under the barrier)"""
        return np.square(k) - v0 / cls.hbar2_2m(mass)

    @classmethod
    def delta_coupling(cls, w: float, mass: float) -> float:
        """Derivative jump 2mW/hbar^2 (nm^-1) across a delta spike of strength W"""
        return w / cls.hbar2_2m(mass)


@dataclass(frozen=True)
class Segment:
    x_lo: float
    x_hi: float
    v0: float

    @property
    def width(self) -> float:
        return self.x_hi - self.x_lo


@dataclass(frozen=True)
class DeltaSpike:
    x0: float
    w: float


@dataclass
class PotentialSpec:
    """
    Unvalidated scattering potential as entered by the user.
    segments are (width_nm, v0_eV) pairs tiling [a, b] left to right;
    delta is (x_nm, w_eV_nm) and excludes segments.
    """
    a: Optional[float]
    b: Optional[float]
    mass: float
    segments: List[Tuple[float, float]] = field(default_factory=list)
    delta: Optional[Tuple[float, float]] = None


@dataclass(frozen=True)
class ValidatedPotential:
    a: float
    b: float
    mass: float
    segments: Tuple[Segment, ...]
    delta: Optional[DeltaSpike]
    symmetric: bool

    @property
    def d(self) -> float:
        return self.b - self.a

    @property
    def s(self) -> float:
        return self.a + self.b

    @property
    def x_mid(self) -> float:
        return 0.5 * (self.a + self.b)

    @property
    def is_delta(self) -> bool:
        return self.delta is not None

    @property
    def is_free(self) -> bool:
        return not self.segments and self.delta is None

    @property
    def is_rectangular(self) -> bool:
        return len(self.segments) == 1

    @property
    def pieces(self) -> Tuple[Union[Segment, DeltaSpike], ...]:
        """Interior pieces in left-to-right order"""
        if self.delta is not None:
            return (self.delta,)
        return self.segments

    @property
    def v_max(self) -> float:
        if self.delta is not None:
            return 0.0
        return max((abs(seg.v0) for seg in self.segments), default=0.0)

    def describe(self) -> str:
        if self.is_delta:
            return f"delta W={self.delta.w} eV nm at x={self.delta.x0} nm"
        if self.is_free:
            return "free particle"
        heights = ', '.join(f"{seg.width:g} nm @ {seg.v0:g} eV" for seg in self.segments)
        return f"[{self.a:g}, {self.b:g}] nm: {heights}"
