"""
Gaussian spectra, x-space synthesis of the stationary channels and the
in/out asymptote packets
"""
import logging
import time
from typing import Dict, Iterable, Optional

import numpy as np
from scipy.special import erfc

from qsplit.apps.potential.models import ValidatedPotential
from qsplit.apps.stationary.analyzers import full_state, split_states
from qsplit.apps.stationary.models import Channel
from qsplit.apps.transfer_matrix.analyzers import params_table
from qsplit.apps.transfer_matrix.models import ParamsTable
from qsplit.core import settings
from qsplit.core.exceptions import AsymmetricPotential, GridTooCoarse, SpectrumLeaksNegativeK
from qsplit.core.workers import parallel_map
from .models import KGrid, PacketChannel, SpectralPacket

logger = logging.getLogger(__name__)


def gaussian_spectrum(l0: float, k0: float, grid: KGrid, mass: float) -> SpectralPacket:
    """
    Normalised Gaussian A_in(k) = (2 l0^2/pi)^{1/4} exp(-l0^2 (k - k0)^2),
    centred at x = 0 at t = 0 with <x^2> = l0^2.
    """
    if k0 <= 0 or l0 <= 0:
        raise SpectrumLeaksNegativeK(f"need k0 > 0 and l0 > 0, got k0={k0}, l0={l0}")
    negative_mass = 0.5 * erfc(np.sqrt(2.0) * l0 * k0)
    if negative_mass > settings.NEGATIVE_K_MASS:
        raise SpectrumLeaksNegativeK(
            f"{negative_mass:.3g} of the packet lies at k <= 0 (l0*k0 = {l0 * k0:.3g} too small)"
        )

    amps = (2.0 * l0 * l0 / np.pi) ** 0.25 * np.exp(-(l0 * (grid.k - k0)) ** 2)
    edge = max(amps[0], amps[-1]) / amps.max()
    if edge > settings.K_TAIL_CUTOFF:
        raise GridTooCoarse(f"k-grid [{grid.k_min:.4g}, {grid.k_max:.4g}] truncates the spectrum "
                            f"(edge amplitude {edge:.3g} of the peak)")

    packet = SpectralPacket(grid=grid, amps=amps.astype(complex), channel=PacketChannel.IN_FULL,
                            mass=mass, t0=0.0, l0=float(l0), k0=float(k0))
    logger.debug(f"Gaussian spectrum l0={l0:g} nm, k0={k0:.6g} nm^-1, norm^2={packet.norm2:.12f}")
    return packet


def check_nyquist(grid: KGrid, x) -> None:
    """The k-grid must resolve every x on the output grid: dk * max|x| <= pi"""
    x_max = float(np.max(np.abs(x)))
    if grid.dk * x_max > np.pi:
        raise GridTooCoarse(f"dk * max|x| = {grid.dk * x_max:.3g} > pi; refine the k-grid or shrink the x-grid")


def _require_same_grid(table: ParamsTable, packet: SpectralPacket):
    if len(table) != packet.grid.n or not np.allclose(table.k, packet.k, rtol=0.0, atol=1e-12):
        raise ValueError("tunneling parameters and packet live on different k-grids")


class Synthesizer:
    """
    Time-dependent channel fields
    Psi_ch(x, t) = (2 pi)^{-1/2} sum_k w_k A_in(k) Psi_ch(x; k) e^{-i E(k) t/hbar}.
    The stationary states are built once; x is processed in chunks across
    the worker pool and all requested times share one basis evaluation.
    """

    def __init__(self, pot: ValidatedPotential, packet: SpectralPacket, table: Optional[ParamsTable] = None):
        self.pot = pot
        self.packet = packet
        self.table = table if table is not None else params_table(pot, packet.k)
        _require_same_grid(self.table, packet)
        self._states = None

    @property
    def states(self) -> Dict[Channel, object]:
        if self._states is None:
            start_time = time.time()
            params = self.table.as_params()
            if self.pot.symmetric:
                full, tr, ref = split_states(params, self.pot)
                self._states = {Channel.FULL: full, Channel.TR: tr, Channel.REF: ref}
            else:
                self._states = {Channel.FULL: full_state(params, self.pot)}
            logger.info(f"Stationary states for {len(self.table)} wavenumbers "
                        f"built in {time.time() - start_time:.2f} seconds")
        return self._states

    def fields(self, x, times, channels: Iterable[Channel] = (Channel.FULL, Channel.TR, Channel.REF),
               chunk: int = settings.SYNTH_CHUNK) -> Dict[Channel, np.ndarray]:
        """Fields of the requested channels, each of shape (len(times), len(x))"""
        channels = [Channel(c) for c in channels]
        if not self.pot.symmetric and any(c != Channel.FULL for c in channels):
            raise AsymmetricPotential("channel decomposition needs a mirror-symmetric potential")
        x = np.asarray(x, dtype=float).ravel()
        times = np.atleast_1d(np.asarray(times, dtype=float))
        check_nyquist(self.packet.grid, x)

        start_time = time.time()
        states = self.states
        weights = self.packet.quadrature_weights(times)
        need_ref = any(c != Channel.FULL for c in channels)

        def synthesize_block(block):
            full = states[Channel.FULL].values(block)
            ref = states[Channel.REF].values(block) if need_ref else None
            out = {}
            for channel in channels:
                if channel == Channel.FULL:
                    basis = full
                elif channel == Channel.REF:
                    basis = ref
                else:
                    basis = full - ref
                out[channel] = (basis @ weights).T
            return out

        blocks = [x[i:i + chunk] for i in range(0, x.size, chunk)]
        results = parallel_map(synthesize_block, blocks)
        fields = {
            channel: np.concatenate([r[channel] for r in results], axis=1)
            for channel in channels
        }
        logger.info(f"Synthesized {len(channels)} channels on {x.size} points x {times.size} times "
                    f"in {time.time() - start_time:.2f} seconds")
        return fields


def synthesize(packet: SpectralPacket, channel: Channel, pot: ValidatedPotential, t: float, x,
               table: Optional[ParamsTable] = None) -> np.ndarray:
    """Field of one channel at one time on the points x"""
    x = np.asarray(x, dtype=float)
    fields = Synthesizer(pot, packet, table).fields(x, [t], channels=[channel])
    return fields[Channel(channel)][0].reshape(x.shape)


def asymptote(packet: SpectralPacket, which: PacketChannel, table: ParamsTable, pot: ValidatedPotential,
              t: Optional[float] = None) -> SpectralPacket:
    """
    Free in/out asymptote packets of the incident spectrum:
      out_tr  sqrt(T) A e^{i(J - kd)}
      out_ref sqrt(R) A e^{i(J - F - pi/2 + 2ka)}   (on e^{-ikx})
      in_tr   sqrt(T) A e^{i(Lambda - alpha pi/2)}, alpha = 1 if Lambda >= 0 else -1
      in_ref  sqrt(R) A e^{i Lambda}
    """
    which = PacketChannel(which)
    if packet.channel != PacketChannel.IN_FULL:
        raise ValueError(f"asymptotes are built from the incident packet, got {packet.channel.value}")
    _require_same_grid(table, packet)
    k = packet.k
    A = packet.amps
    sqrt_T = np.sqrt(table.T)
    sqrt_R = np.sqrt(table.R)

    if which == PacketChannel.IN_FULL:
        amps = A
    elif which == PacketChannel.OUT_TR:
        amps = sqrt_T * A * np.exp(1j * (table.J - k * pot.d))
    elif which == PacketChannel.OUT_REF:
        amps = sqrt_R * A * np.exp(1j * (table.J - table.F - 0.5 * np.pi + 2.0 * k * pot.a))
    else:
        if not pot.symmetric or table.Lam is None:
            raise AsymmetricPotential(f"{which.value} asymptote needs the odd reflection root")
        if which == PacketChannel.IN_TR:
            alpha = np.where(table.Lam >= 0, 1.0, -1.0)
            amps = sqrt_T * A * np.exp(1j * (table.Lam - 0.5 * np.pi * alpha))
        else:
            amps = sqrt_R * A * np.exp(1j * table.Lam)

    result = SpectralPacket(grid=packet.grid, amps=np.asarray(amps, dtype=complex), channel=which,
                            mass=packet.mass, t0=packet.t0, l0=packet.l0, k0=packet.k0)
    return result if t is None else result.at(t)
