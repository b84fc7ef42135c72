"""
Momentum-space wave packets on a uniform k-grid
"""
import logging
from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property
from typing import Optional

import numpy as np

from qsplit.apps.potential.models import UnitSystem
from qsplit.core import settings
from qsplit.core.workers import parallel_map

logger = logging.getLogger(__name__)

INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


@dataclass(frozen=True)
class KGrid:
    """Uniform grid of positive wavenumbers (nm^-1)"""
    k_min: float
    k_max: float
    n: int

    @classmethod
    def around(cls, k0: float, l0: float, n: int = settings.K_GRID_POINTS,
               span_sigmas: float = settings.K_SPAN_SIGMAS) -> 'KGrid':
        """k0 +- span_sigmas * sigma_k with sigma_k = 1/(2 l0), clipped to k > 0"""
        half = span_sigmas / (2.0 * l0)
        k_min = k0 - half
        if k_min <= 0:
            k_min = 2.0 * half / n
            logger.warning(f"k-grid clipped at k_min={k_min:.3g} nm^-1 (k0={k0:g}, span {half:g})")
        return cls(k_min=float(k_min), k_max=float(k0 + half), n=int(n))

    @cached_property
    def k(self) -> np.ndarray:
        return np.linspace(self.k_min, self.k_max, self.n)

    @property
    def dk(self) -> float:
        return (self.k_max - self.k_min) / (self.n - 1)

    @cached_property
    def weights(self) -> np.ndarray:
        """Trapezoid quadrature weights"""
        w = np.full(self.n, self.dk)
        w[0] = w[-1] = 0.5 * self.dk
        return w


class PacketChannel(str, Enum):
    IN_FULL = 'in_full'
    OUT_TR = 'out_tr'
    OUT_REF = 'out_ref'
    IN_TR = 'in_tr'
    IN_REF = 'in_ref'

    @property
    def direction(self) -> int:
        """+1 for packets built from e^{ikx}, -1 for the reflected out packet"""
        return -1 if self is PacketChannel.OUT_REF else 1


@dataclass(frozen=True)
class SpectralPacket:
    """
    Amplitudes f(k, t0) on a k-grid. The x-space field is
    (2 pi)^{-1/2} sum_k w_k f(k, t) e^{i dir k x}, with free evolution
    f(k, t) = f(k, t0) e^{-i E(k) (t - t0)/hbar}.
    """
    grid: KGrid
    amps: np.ndarray
    channel: PacketChannel
    mass: float
    t0: float = 0.0
    l0: Optional[float] = None
    k0: Optional[float] = None

    @property
    def k(self) -> np.ndarray:
        return self.grid.k

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    @property
    def norm2(self) -> float:
        return float(np.sum(self.density * self.grid.weights))

    @property
    def mean_k(self) -> float:
        return float(np.sum(self.k * self.density * self.grid.weights) / self.norm2)

    def phases(self, t: float) -> np.ndarray:
        return np.exp(-1j * UnitSystem.energy(self.k, self.mass) * (t - self.t0) / UnitSystem.hbar)

    def at(self, t: float) -> 'SpectralPacket':
        """The same packet freely evolved to time t (fs)"""
        if t == self.t0:
            return self
        return replace(self, amps=self.amps * self.phases(t), t0=float(t))

    def quadrature_weights(self, times) -> np.ndarray:
        """(2 pi)^{-1/2} w_k f(k, t) as an (n_k, n_t) matrix"""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        energy = UnitSystem.energy(self.k, self.mass)
        phase = np.exp(-1j * np.outer(energy, times - self.t0) / UnitSystem.hbar)
        return INV_SQRT_2PI * (self.grid.weights * self.amps)[:, None] * phase

    def to_x(self, x, t: Optional[float] = None, chunk: int = settings.SYNTH_CHUNK) -> np.ndarray:
        """x-space field of the packet at time t (default t0), as a free plane-wave superposition"""
        x = np.asarray(x, dtype=float)
        t = self.t0 if t is None else t
        weights = self.quadrature_weights([t])[:, 0]
        kx = self.channel.direction * self.k

        def render(block):
            return np.exp(1j * np.outer(block, kx)) @ weights

        blocks = [x.ravel()[i:i + chunk] for i in range(0, x.size, chunk)]
        if not blocks:
            return np.zeros(x.shape, dtype=complex)
        return np.concatenate(parallel_map(render, blocks)).reshape(x.shape)
