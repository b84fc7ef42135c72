"""
Stationary scattering states with a piecewise analytic representation
"""
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from qsplit.apps.potential.models import UnitSystem
from qsplit.apps.transfer_matrix.analyzers import fundamental_solutions


class Channel(str, Enum):
    FULL = 'full'
    TR = 'tr'
    REF = 'ref'


@dataclass(frozen=True)
class AmplitudeSet:
    """Amplitudes of the incoming/outgoing plane waves on both sides of the barrier"""
    a_in: np.ndarray
    b_out: np.ndarray
    a_out: np.ndarray
    b_in: np.ndarray

    def transfer_residual(self, q, p) -> np.ndarray:
        """|Y (a_out, b_in) - (a_in, b_out)|"""
        left_a = q * self.a_out + p * self.b_in
        left_b = np.conj(p) * self.a_out + np.conj(q) * self.b_in
        return np.hypot(np.abs(left_a - self.a_in), np.abs(left_b - self.b_out))

    def incoming_weight(self) -> np.ndarray:
        return np.abs(self.a_in) ** 2 + np.abs(self.b_in) ** 2

    def outgoing_weight(self) -> np.ndarray:
        return np.abs(self.a_out) ** 2 + np.abs(self.b_out) ** 2


@dataclass(frozen=True)
class Region:
    """
    One piece of a stationary state on [x_lo, x_hi).
    kind 'plane': c1 e^{ikx} + c2 e^{-ikx} in absolute x.
    kind 'segment': psi = c1 C(x - anchor) + c2 S(x - anchor) for the local
    kappa2 = k^2 - 2mV/hbar^2, i.e. c1, c2 are psi and psi' at the anchor.
    kind 'zero': identically zero.
    """
    x_lo: float
    x_hi: float
    kind: str
    c1: Optional[np.ndarray] = None
    c2: Optional[np.ndarray] = None
    anchor: float = 0.0
    kappa2: Optional[np.ndarray] = None

    @property
    def branch(self) -> np.ndarray:
        """'trig' or 'exp' per wavenumber for segment regions"""
        if self.kind != 'segment':
            return np.full(np.shape(self.c1) if self.c1 is not None else (), self.kind)
        return np.where(self.kappa2 >= 0, 'trig', 'exp')

    def evaluate(self, x: np.ndarray, k: np.ndarray, derivative: bool = False) -> np.ndarray:
        """Values (or x-derivatives) on the points x, shape (len(x), len(k))"""
        if self.kind == 'zero':
            return np.zeros((x.size, k.size), dtype=complex)
        if self.kind == 'plane':
            e = np.exp(1j * np.outer(x, k))
            if derivative:
                return 1j * k * (self.c1 * e - self.c2 * np.conj(e))
            return self.c1 * e + self.c2 * np.conj(e)
        C, S = fundamental_solutions(self.kappa2[None, :], (x - self.anchor)[:, None])
        if derivative:
            return -self.kappa2 * self.c1 * S + self.c2 * C
        return self.c1 * C + self.c2 * S

    def reanchor(self, anchor: float, k: np.ndarray) -> 'Region':
        """Same function of a segment region with (psi, psi') taken at a new anchor"""
        if self.kind != 'segment' or anchor == self.anchor:
            return self
        at = np.array([anchor], dtype=float)
        psi = self.evaluate(at, k)[0]
        dpsi = self.evaluate(at, k, derivative=True)[0]
        return replace(self, c1=psi, c2=dpsi, anchor=anchor)


@dataclass(frozen=True)
class StationaryState:
    """
    Stationary wave function of one channel for a vector of wavenumbers,
    normalised to unit incident amplitude.
    """
    k: np.ndarray
    channel: Channel
    regions: Tuple[Region, ...]
    mass: float
    T: np.ndarray
    lam: Optional[np.ndarray] = None

    @property
    def boundaries(self) -> Tuple[float, ...]:
        return tuple(region.x_lo for region in self.regions[1:])

    @property
    def flux(self) -> np.ndarray:
        """Constant probability current of the channel in nm/fs"""
        if self.channel == Channel.REF:
            return np.zeros_like(self.k)
        return UnitSystem.hbar_over_m(self.mass) * self.k * self.T

    def _evaluate(self, x, derivative: bool) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        k = np.atleast_1d(self.k)
        out = np.zeros((flat.size, k.size), dtype=complex)
        for region in self.regions:
            index = np.nonzero((flat >= region.x_lo) & (flat < region.x_hi))[0]
            if index.size and region.kind != 'zero':
                out[index] = region.evaluate(flat[index], k, derivative)
        return out.reshape(x.shape + np.shape(self.k))

    def values(self, x) -> np.ndarray:
        """Psi(x; k), shape x.shape + k.shape"""
        return self._evaluate(x, derivative=False)

    def derivatives(self, x) -> np.ndarray:
        return self._evaluate(x, derivative=True)

    def current(self, x) -> np.ndarray:
        """Local probability current (hbar/m) Im(psi* psi')"""
        psi = self.values(x)
        dpsi = self.derivatives(x)
        return UnitSystem.hbar_over_m(self.mass) * np.imag(np.conj(psi) * dpsi)

    def limits(self, x: float) -> Tuple[np.ndarray, np.ndarray]:
        """Left and right limits of psi at a region boundary"""
        k = np.atleast_1d(self.k)
        at = np.array([x], dtype=float)
        left = right = None
        for region in self.regions:
            if region.x_hi == x:
                left = region.evaluate(at, k)[0]
            if region.x_lo == x:
                right = region.evaluate(at, k)[0]
        return left, right


@dataclass(frozen=True)
class EigenSolution:
    """Scattering-matrix eigenvector pair sharing the eigenvalue (1 + i mu |p|)/q"""
    mu: int
    eigenvalue: np.ndarray
    reflection: AmplitudeSet
    transmission: AmplitudeSet
    residual: np.ndarray
