"""
Moments of x-space fields and packet-weighted averages of tunneling parameters
"""
import logging
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import trapezoid

from qsplit.apps.potential.models import UnitSystem, ValidatedPotential
from qsplit.apps.spectral.analyzers import Synthesizer
from qsplit.apps.spectral.models import SpectralPacket
from qsplit.apps.stationary.models import Channel
from qsplit.apps.transfer_matrix.models import ParamsTable
from qsplit.core import settings
from qsplit.core.exceptions import ZeroNorm, ZeroWeight
from .models import LineFit, Moments

logger = logging.getLogger(__name__)

QUANTITIES = {
    'k': lambda table: table.k,
    'T': lambda table: table.T,
    'R': lambda table: table.R,
    'dT': lambda table: table.dT,
    'dJ': lambda table: table.dJ,
    'dF': lambda table: table.dF,
    'dLam': lambda table: table.dLam,
    'dJ-dF': lambda table: table.dJ - table.dF,
}


def moments_x(field, x, mass: Optional[float] = None) -> Moments:
    """
    Trapezoid-rule norm, mean, variance and mean wavenumber of a field.
    The flux profile is (hbar/m) Im(psi* psi') in nm/fs when mass is given,
    else Im(psi* psi') in nm^-1.
    """
    field = np.asarray(field, dtype=complex)
    x = np.asarray(x, dtype=float)
    density = np.abs(field) ** 2
    norm2 = float(trapezoid(density, x))
    if norm2 < settings.ZERO_NORM:
        raise ZeroNorm(f"field norm^2 = {norm2:.3g} is below {settings.ZERO_NORM:g}")

    mean_x = float(trapezoid(x * density, x) / norm2)
    var_x = float(trapezoid((x - mean_x) ** 2 * density, x) / norm2)
    current = np.imag(np.conj(field) * np.gradient(field, x))
    mean_k = float(trapezoid(current, x) / norm2)
    if mass is not None:
        current = UnitSystem.hbar_over_m(mass) * current
    return Moments(norm2=norm2, mean_x=mean_x, var_x=max(var_x, 0.0), mean_k=mean_k, flux=current)


def weighted_mean(table: ParamsTable, weight: Optional[str], quantity: Union[str, np.ndarray],
                  packet: SpectralPacket) -> float:
    """
    sum q * weight * |A_in|^2 dk / sum weight * |A_in|^2 dk, with weight
    'T', 'R' or None. Points with zero weight never contribute, so a nan
    in the quantity there is harmless.
    """
    if isinstance(quantity, str):
        if quantity not in QUANTITIES:
            raise ValueError(f"unknown quantity '{quantity}', expected one of {sorted(QUANTITIES)}")
        values = QUANTITIES[quantity](table)
        if values is None:
            raise ValueError(f"quantity '{quantity}' is not available for this potential")
    else:
        values = np.asarray(quantity, dtype=float)

    w = packet.density * packet.grid.weights
    if weight is not None:
        w = w * {'T': table.T, 'R': table.R}[weight]
    total = float(np.sum(w))
    if total < settings.ZERO_WEIGHT:
        raise ZeroWeight(f"<{weight}>-weight {total:.3g} is below {settings.ZERO_WEIGHT:g}")
    contributions = np.where(w > 0, values * w, 0.0)
    return float(np.sum(contributions) / total)


def norm_split(table: ParamsTable, packet: SpectralPacket) -> Tuple[float, float]:
    """(<T>_in, <R>_in) for a normalised incident packet"""
    norm2 = packet.norm2
    w = packet.density * packet.grid.weights
    return float(np.sum(table.T * w) / norm2), float(np.sum(table.R * w) / norm2)


def cm_trajectory(channel: Channel, pot: ValidatedPotential, packet: SpectralPacket, times: Sequence[float],
                  x, synthesizer: Optional[Synthesizer] = None, table: Optional[ParamsTable] = None) -> np.ndarray:
    """(t, <x>) rows of the synthesized channel field"""
    synthesizer = synthesizer or Synthesizer(pot, packet, table)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    fields = synthesizer.fields(x, times, channels=[channel])[Channel(channel)]
    means = np.array([moments_x(psi, x).mean_x for psi in fields])
    return np.column_stack((times, means))


def fit_line(t, x) -> LineFit:
    """Least-squares line through CM samples"""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    slope, intercept = np.polyfit(t, x, 1)
    residual = x - (slope * t + intercept)
    spread = np.sum((x - x.mean()) ** 2)
    r2 = 1.0 - np.sum(residual ** 2) / spread if spread > 0 else 1.0
    return LineFit(slope=float(slope), intercept=float(intercept), r2=float(r2))


def inner_product(f, g, x) -> complex:
    """<f|g> by the trapezoid rule"""
    return complex(trapezoid(np.conj(f) * g, x))


def l2_distance(reference, other, x, align_phase: bool = True) -> float:
    """
    ||reference - e^{i phi} other|| / ||reference||, with phi removing the
    global phase difference when align_phase is set.
    """
    reference = np.asarray(reference, dtype=complex)
    other = np.asarray(other, dtype=complex)
    if align_phase:
        overlap = inner_product(other, reference, x)
        if abs(overlap) > 0:
            other = other * overlap / abs(overlap)
    norm = np.sqrt(trapezoid(np.abs(reference) ** 2, x))
    if norm < np.sqrt(settings.ZERO_NORM):
        raise ZeroNorm("reference field has zero norm")
    return float(np.sqrt(trapezoid(np.abs(reference - other) ** 2, x)) / norm)
