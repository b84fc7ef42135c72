"""
Tunneling times
Exact times come from root finding on the channel CM trajectories; the
asymptotic times, effective widths and starting points come from packet
averages of J', F' and Lambda'. The legacy SWPA times are kept for
comparison with their dependence on the launch distance.
"""
import logging
import time
from functools import partial
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import bisect

from qsplit.apps.observables.analyzers import moments_x, norm_split, weighted_mean
from qsplit.apps.potential.models import UnitSystem, ValidatedPotential
from qsplit.apps.spectral.analyzers import Synthesizer, asymptote
from qsplit.apps.spectral.models import PacketChannel, SpectralPacket
from qsplit.apps.stationary.models import Channel
from qsplit.apps.transfer_matrix.models import ParamsTable
from qsplit.core import settings
from qsplit.core.exceptions import AsymmetricPotential, WindowTooShort, ZeroNorm, ZeroWeight
from .models import AsymptoticTimes, CMTrajectories, ExactTime, MomentumShifts, SwpaTimes, TimeStatus, TimingReport

logger = logging.getLogger(__name__)


def _hyperbolic_factors(x: np.ndarray):
    """
    e^{-x}-scaled sinh^2(x/2), sinh x/x, (sinh x - x)/x^3 and
    (cosh x - sinh x/x)/x^2, finite for any x >= 0
    """
    u = np.exp(-x)
    em2 = -np.expm1(-2.0 * x)            # 1 - e^{-2x}
    half_sq = np.expm1(-x) ** 2 / 4.0
    small = x < settings.SERIES_SWITCH
    xs = np.where(small, 1.0, x)
    x2 = x * x

    s1 = np.where(small, u * (1 + x2 / 6 + x2 ** 2 / 120 + x2 ** 3 / 5040), em2 / (2.0 * xs))
    s3 = np.where(small, u * (1 / 6 + x2 / 120 + x2 ** 2 / 5040 + x2 ** 3 / 362880),
                  (0.5 * em2 - xs * u) / xs ** 3)
    c3 = np.where(small, u * (1 / 3 + x2 / 30 + x2 ** 2 / 840 + x2 ** 3 / 45360),
                  (0.5 * (1.0 + u * u) - em2 / (2.0 * xs)) / xs ** 2)
    return u, half_sq, s1, s3, c3


def _trigonometric_factors(x: np.ndarray):
    """sin^2(x/2), sin x/x, (x - sin x)/x^3, (sin x/x - cos x)/x^2"""
    small = x < settings.SERIES_SWITCH
    xs = np.where(small, 1.0, x)
    x2 = x * x
    s1 = np.where(small, 1 - x2 / 6 + x2 ** 2 / 120 - x2 ** 3 / 5040, np.sin(xs) / xs)
    s3 = np.where(small, 1 / 6 - x2 / 120 + x2 ** 2 / 5040 - x2 ** 3 / 362880, (xs - np.sin(xs)) / xs ** 3)
    c3 = np.where(small, 1 / 3 - x2 / 30 + x2 ** 2 / 840 - x2 ** 3 / 45360,
                  (np.sin(xs) / xs - np.cos(xs)) / xs ** 2)
    return np.sin(0.5 * x) ** 2, s1, s3, c3


def rect_deff_xstart(v0: float, d: float, mass: float, k) -> Tuple[np.ndarray, np.ndarray]:
    """
    Effective width J' - Lambda' and starting point -Lambda' of a single
    rectangular barrier (v0 > 0) or well (v0 < 0) of width d, in closed form.
    Below the barrier the hyperbolic factors are carried scaled by e^{-|kappa| d}.
    """
    k = np.atleast_1d(np.asarray(k, dtype=float))
    kappa0_2 = abs(v0) / UnitSystem.hbar2_2m(mass)
    beta = 1.0 if v0 >= 0 else -1.0
    kappa2 = UnitSystem.kappa2(k, v0, mass)
    k2 = k * k
    d2 = d * d

    d_eff = np.empty_like(k)
    x_start = np.empty_like(k)

    below = kappa2 < 0
    if np.any(below):
        kb2 = k2[below]
        x = d * np.sqrt(-kappa2[below])
        u, half_sq, s1, s3, c3 = _hyperbolic_factors(x)
        den = 4.0 * kb2 * u * u + kappa0_2 ** 2 * d2 * s1 * s1
        d_eff[below] = 4.0 * d * (kb2 * u + kappa0_2 * half_sq) * (u + kappa0_2 * d2 * s3) / den
        x_start[below] = -2.0 * kappa0_2 * d * u * (s1 + kb2 * d2 * c3) / den

    above = ~below
    if np.any(above):
        ka2 = k2[above]
        x = d * np.sqrt(kappa2[above])
        half_sq, s1, s3, c3 = _trigonometric_factors(x)
        den = 4.0 * ka2 + kappa0_2 ** 2 * d2 * s1 * s1
        d_eff[above] = 4.0 * d * (ka2 - beta * kappa0_2 * half_sq) * (1.0 + beta * kappa0_2 * d2 * s3) / den
        x_start[above] = -2.0 * beta * kappa0_2 * d * (s1 + ka2 * d2 * c3) / den

    return d_eff, x_start


def delta_deff_xstart(w: float, mass: float, k) -> Tuple[np.ndarray, np.ndarray]:
    """d_eff = 0 and x_start = -m hbar^2 W / (hbar^4 k^2 + m^2 W^2) for a delta spike"""
    k = np.atleast_1d(np.asarray(k, dtype=float))
    g = UnitSystem.delta_coupling(w, mass)
    return np.zeros_like(k), -2.0 * g / (4.0 * k * k + g * g)


def closed_form_deff_xstart(pot: ValidatedPotential, k) -> Tuple[np.ndarray, np.ndarray]:
    if pot.is_delta:
        return delta_deff_xstart(pot.delta.w, pot.mass, k)
    if pot.is_rectangular:
        seg = pot.segments[0]
        return rect_deff_xstart(seg.v0, seg.width, pot.mass, k)
    raise ValueError("closed forms exist only for a single rectangular segment or a delta spike")


def _crossings(times: np.ndarray, cm: np.ndarray, level: float,
               cm_at: Optional[Callable[[float], float]] = None) -> List[float]:
    """
    All times where CM(t) crosses level: sign changes between the samples,
    each refined by bisection on cm_at (the spline through the samples
    when no evaluator is given)
    """
    shifted = cm - level
    if cm_at is None:
        cm_at = CubicSpline(times, cm)
    roots = []
    for i in range(len(times) - 1):
        lo, hi = shifted[i], shifted[i + 1]
        if lo == 0.0:
            roots.append(float(times[i]))
        elif lo * hi < 0.0:
            roots.append(float(bisect(lambda t: float(cm_at(t)) - level, times[i], times[i + 1],
                                      xtol=settings.ROOT_TOL)))
    if shifted[-1] == 0.0:
        roots.append(float(times[-1]))
    return roots


def cm_evaluator(synthesizer: Synthesizer, x) -> Callable[[Channel, float], float]:
    """CM of one channel at one time, synthesized afresh on x"""
    def cm_at(channel: Channel, t: float) -> float:
        psi = synthesizer.fields(x, [t], [channel])[channel][0]
        return moments_x(psi, x).mean_x
    return cm_at


def _check_ballistic(times: np.ndarray, cm: np.ndarray, label: str):
    """CM speed must vary by less than BALLISTIC_TOL over the last tenth of the window"""
    tail = times >= times[-1] - 0.1 * (times[-1] - times[0])
    if np.count_nonzero(tail) < 3:
        raise WindowTooShort(f"{label}: fewer than 3 samples in the last tenth of the window")
    speed = np.gradient(cm, times)[tail]
    scale = max(abs(float(np.mean(speed))), 1e-12)
    variation = float(np.max(speed) - np.min(speed)) / scale
    if variation > settings.BALLISTIC_TOL:
        raise WindowTooShort(f"{label} CM speed still varies by {variation:.2%} at the end of the window")


def scan_trajectories(synthesizer: Synthesizer, window: Tuple[float, float], x,
                      dt: float = settings.ROOT_SCAN_DT) -> CMTrajectories:
    """
    CM of the tr and ref channels sampled every dt over the window; a
    channel with no norm is stored as None
    """
    if not synthesizer.pot.symmetric:
        raise AsymmetricPotential("exact times need the tr/ref decomposition")
    t_lo, t_hi = window
    times = np.arange(t_lo, t_hi + 0.5 * dt, dt)
    start_time = time.time()
    fields = synthesizer.fields(x, times, channels=[Channel.TR, Channel.REF])
    cms = {}
    for channel, values in fields.items():
        try:
            cms[channel] = np.array([moments_x(psi, x).mean_x for psi in values])
        except ZeroNorm:
            logger.warning(f"{channel.value} channel carries no norm; its exact time is absent")
            cms[channel] = None
    logger.info(f"CM trajectories over {times.size} samples in {time.time() - start_time:.2f} seconds")
    return CMTrajectories(times=times, tr=cms[Channel.TR], ref=cms[Channel.REF])


def times_from_trajectories(trajectories: CMTrajectories, pot: ValidatedPotential, L1: float, L2: float,
                            cm_at: Optional[Callable[[Channel, float], float]] = None) -> Tuple[ExactTime, ExactTime]:
    """
    Delta t_tr = largest root of CM_tr(t) = b + L2 minus smallest root of
    CM_tr(t) = a - L1; Delta t_ref = largest minus smallest root of
    CM_ref(t) = a - L1. Missing roots give an absent time, not an error.
    Roots are bracketed on the samples and bisected on cm_at when given
    (see cm_evaluator), on a spline through the samples otherwise.
    """
    times = trajectories.times
    left, right = pot.a - L1, pot.b + L2
    refine_tr = None if cm_at is None else partial(cm_at, Channel.TR)
    refine_ref = None if cm_at is None else partial(cm_at, Channel.REF)

    cm_tr = trajectories.tr
    if cm_tr is None:
        exact_tr = ExactTime.absent("transmitted channel is empty")
    else:
        _check_ballistic(times, cm_tr, 'tr')
        if cm_tr[0] >= left:
            raise WindowTooShort(f"tr CM is already at {cm_tr[0]:.4g} nm >= a - L1 at t = {times[0]} fs")
        entries = _crossings(times, cm_tr, left, refine_tr)
        exits = _crossings(times, cm_tr, right, refine_tr)
        if not entries or not exits:
            exact_tr = ExactTime.absent(f"tr CM does not cross both a - L1 = {left:g} and b + L2 = {right:g} nm",
                                        entries + exits)
        else:
            exact_tr = ExactTime(value=max(exits) - min(entries), status=TimeStatus.OK,
                                 roots=(min(entries), max(exits)))

    cm_ref = trajectories.ref
    if cm_ref is None:
        exact_ref = ExactTime.absent("reflected channel is empty")
    else:
        _check_ballistic(times, cm_ref, 'ref')
        crossings = _crossings(times, cm_ref, left, refine_ref)
        if len(crossings) < 2:
            exact_ref = ExactTime.absent(f"ref CM crosses a - L1 = {left:g} nm {len(crossings)} time(s)",
                                         crossings)
        else:
            exact_ref = ExactTime(value=max(crossings) - min(crossings), status=TimeStatus.OK,
                                  roots=(min(crossings), max(crossings)))
    return exact_tr, exact_ref


def exact_times(synthesizer: Synthesizer, L1: float, L2: float, window: Tuple[float, float], x,
                dt: float = settings.ROOT_SCAN_DT) -> Tuple[ExactTime, ExactTime]:
    """Exact transmission and reflection times for one pair of distances"""
    trajectories = scan_trajectories(synthesizer, window, x, dt)
    return times_from_trajectories(trajectories, synthesizer.pot, L1, L2, cm_evaluator(synthesizer, x))


def _optional_mean(table, weight, quantity, packet) -> Optional[float]:
    try:
        return weighted_mean(table, weight, quantity, packet)
    except ZeroWeight:
        return None


def asymptotic_times(table: ParamsTable, packet: SpectralPacket, pot: ValidatedPotential) -> AsymptoticTimes:
    """
    tau_tr = m (<J'>_T - <Lambda'>_T) / (hbar <k>_T) and
    tau_ref = m (<J' - F'>_R - <Lambda'>_R) / (hbar <k>_R), with the
    effective widths d_eff and starting points x_start = -<Lambda'>.
    The ref quantities are None when the packet is fully transmitted.
    """
    if not pot.symmetric or table.dLam is None:
        raise AsymmetricPotential("asymptotic times need Lambda' of a mirror-symmetric potential")
    hbar_over_m = UnitSystem.hbar_over_m(pot.mass)
    T_in, R_in = norm_split(table, packet)

    mean_k_tr = weighted_mean(table, 'T', 'k', packet)
    x_start_tr = -weighted_mean(table, 'T', 'dLam', packet)
    d_eff_tr = weighted_mean(table, 'T', 'dJ', packet) + x_start_tr
    tau_tr = d_eff_tr / (hbar_over_m * mean_k_tr)

    mean_k_ref = _optional_mean(table, 'R', 'k', packet)
    if mean_k_ref is None:
        logger.warning("reflection weight vanishes; reflection times are absent")
        x_start_ref = d_eff_ref = tau_ref = None
    else:
        x_start_ref = -weighted_mean(table, 'R', 'dLam', packet)
        d_eff_ref = weighted_mean(table, 'R', 'dJ-dF', packet) + x_start_ref
        tau_ref = d_eff_ref / (hbar_over_m * mean_k_ref)

    return AsymptoticTimes(
        tau_tr=tau_tr, tau_ref=tau_ref, d_eff_tr=d_eff_tr, d_eff_ref=d_eff_ref,
        x_start_tr=x_start_tr, x_start_ref=x_start_ref, mean_k_tr=mean_k_tr, mean_k_ref=mean_k_ref,
        T_in=T_in, R_in=R_in,
    )


def swpa_times(table: ParamsTable, packet: SpectralPacket, pot: ValidatedPotential, L1: float, L2: float,
               a: Optional[float] = None) -> SwpaTimes:
    """
    Standard wave-packet analysis times, measured from the incident packet
    reaching a - L1:
      tr  = (m/hbar) [(<J'>_T + L2)/k_tr + L1/k0 + a (1/k_tr - 1/k0)]
      ref = (m/hbar) [(<J' - F'>_R + L1)/k_ref + L1/k0 + a (1/k_ref - 1/k0)]
    """
    a = pot.a if a is None else float(a)
    hbar_over_m = UnitSystem.hbar_over_m(pot.mass)
    k0 = packet.mean_k
    k_tr = weighted_mean(table, 'T', 'k', packet)
    dJ_tr = weighted_mean(table, 'T', 'dJ', packet)
    tr = ((dJ_tr + L2) / k_tr + L1 / k0 + a * (1.0 / k_tr - 1.0 / k0)) / hbar_over_m

    k_ref = _optional_mean(table, 'R', 'k', packet)
    ref = None
    if k_ref is not None:
        dJF_ref = weighted_mean(table, 'R', 'dJ-dF', packet)
        ref = ((dJF_ref + L1) / k_ref + L1 / k0 + a * (1.0 / k_ref - 1.0 / k0)) / hbar_over_m
    return SwpaTimes(tr=tr, ref=ref, L1=L1, L2=L2, a=a, k0=k0, k_tr=k_tr, k_ref=k_ref)


def momentum_shifts(table: ParamsTable, packet: SpectralPacket, pot: ValidatedPotential) -> MomentumShifts:
    """
    <k> - k0 of the out_tr and out_ref asymptote packets, each read off its
    own spectrum, with the Gaussian prediction <T'>/(4 l0^2 <T>) for the
    transmitted shift. The channel weights are the asymptote norms, so
    <T> dk_tr + <R> dk_ref vanishes only when T + R = 1 over the packet.
    """
    k0 = packet.mean_k
    out_tr = asymptote(packet, PacketChannel.OUT_TR, table, pot)
    out_ref = asymptote(packet, PacketChannel.OUT_REF, table, pot)
    T_in = out_tr.norm2 / packet.norm2
    R_in = out_ref.norm2 / packet.norm2
    dk_tr = out_tr.mean_k - k0
    dk_ref = out_ref.mean_k - k0 if R_in > settings.ZERO_WEIGHT else None
    predicted = None
    if packet.l0 is not None:
        predicted = weighted_mean(table, None, 'dT', packet) / (4.0 * packet.l0 ** 2 * T_in)
    return MomentumShifts(dk_tr=dk_tr, dk_ref=dk_ref, predicted_dk_tr=predicted, T_in=T_in, R_in=R_in)


def timing_report(synthesizer: Synthesizer, L1: float, L2: float, window: Tuple[float, float], x,
                  trajectories: Optional[CMTrajectories] = None, exact: bool = True) -> TimingReport:
    """All timing quantities of one scenario for the given distances"""
    pot, packet, table = synthesizer.pot, synthesizer.packet, synthesizer.table
    asym = asymptotic_times(table, packet, pot)
    predicted_tr, predicted_ref = asym.predicted(L1, L2, UnitSystem.hbar_over_m(pot.mass))
    if exact:
        if trajectories is None:
            trajectories = scan_trajectories(synthesizer, window, x)
        exact_tr, exact_ref = times_from_trajectories(trajectories, pot, L1, L2, cm_evaluator(synthesizer, x))
    else:
        exact_tr = exact_ref = ExactTime.absent("exact times not requested")
    return TimingReport(
        L1=L1, L2=L2, window=tuple(window),
        exact_tr=exact_tr, exact_ref=exact_ref, asymptotic=asym,
        swpa=swpa_times(table, packet, pot, L1, L2),
        shifts=momentum_shifts(table, packet, pot),
        predicted_tr=predicted_tr, predicted_ref=predicted_ref,
    )
