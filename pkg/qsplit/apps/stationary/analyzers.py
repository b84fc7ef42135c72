"""
Stationary full, transmission and reflection states
The reflection state is the solution whose out-of-barrier part is odd about
the barrier midpoint, truncated to zero beyond it; the transmission state is
the remainder of the full state
"""
import logging
from dataclasses import replace
from typing import Dict, Optional, Tuple

import numpy as np

from qsplit.apps.potential.models import DeltaSpike, UnitSystem, ValidatedPotential
from qsplit.apps.transfer_matrix.analyzers import fundamental_solutions, odd_root_sign
from qsplit.apps.transfer_matrix.models import TunnelingParams
from qsplit.core import settings
from qsplit.core.exceptions import AsymmetricPotential, FullTransmission, ParityMismatch
from .models import AmplitudeSet, Channel, EigenSolution, Region, StationaryState

logger = logging.getLogger(__name__)

PROBE_OFFSETS = np.array([0.3, 1.1])


def _arrays(params: TunnelingParams):
    k = np.atleast_1d(params.k)
    return (k, np.atleast_1d(params.q), np.atleast_1d(params.p),
            np.atleast_1d(params.T), np.atleast_1d(params.R), np.atleast_1d(params.F))


def _require_symmetric(pot: ValidatedPotential):
    if not pot.symmetric:
        raise AsymmetricPotential(
            "transmission/reflection states are only constructed for mirror-symmetric potentials"
        )


def _require_reflection(R: np.ndarray):
    if np.any(R < settings.R_DEGENERATE):
        raise FullTransmission(f"R = {np.min(R):.3g} < {settings.R_DEGENERATE:g}: reflection phase undefined")


def amplitude_sets(params: TunnelingParams) -> Dict[str, AmplitudeSet]:
    """
    One-source amplitudes of the problem at hand and the two two-source
    sets whose superposition reproduces it: 'reflection' has no outgoing
    transmitted wave, 'transmission' no outgoing reflected wave.
    """
    _, q, p, _, _, _ = _arrays(params)
    q2 = np.abs(q) ** 2
    zeros = np.zeros_like(q)
    return {
        'problem': AmplitudeSet(a_in=np.ones_like(q), b_out=np.conj(p) / q, a_out=1.0 / q, b_in=zeros),
        'reflection': AmplitudeSet(a_in=np.abs(p) ** 2 / q2 + 0j, b_out=np.conj(p) / q,
                                   a_out=zeros, b_in=np.conj(p) / q2),
        'transmission': AmplitudeSet(a_in=1.0 / q2 + 0j, b_out=zeros, a_out=1.0 / q, b_in=-np.conj(p) / q2),
    }


def _plane_pair_at(k, c1, c2, x):
    e = np.exp(1j * k * x)
    return c1 * e + c2 * np.conj(e), 1j * k * (c1 * e - c2 * np.conj(e))


def _interior_regions(pot: ValidatedPotential, k, psi, dpsi, cut: Optional[float]):
    """Propagate (psi, psi') from a through every piece, splitting at cut"""
    regions = []
    for piece in pot.pieces:
        if isinstance(piece, DeltaSpike):
            dpsi = dpsi + UnitSystem.delta_coupling(piece.w, pot.mass) * psi
            continue
        kappa2 = UnitSystem.kappa2(k, piece.v0, pot.mass)
        edges = [piece.x_lo, piece.x_hi]
        if cut is not None and piece.x_lo < cut < piece.x_hi:
            edges = [piece.x_lo, cut, piece.x_hi]
        for lo, hi in zip(edges[:-1], edges[1:]):
            regions.append(Region(lo, hi, 'segment', c1=psi, c2=dpsi, anchor=lo, kappa2=kappa2))
            C, S = fundamental_solutions(kappa2, hi - lo)
            psi, dpsi = psi * C + dpsi * S, -kappa2 * psi * S + dpsi * C
    return regions, psi, dpsi


def full_state(params: TunnelingParams, pot: ValidatedPotential, cut: Optional[float] = None) -> StationaryState:
    """
    e^{ikx} + (p*/q) e^{-ikx} left of a, (1/q) e^{ikx} right of b, matched
    through the segments. cut adds a region boundary (used at x_mid).
    """
    k, q, p, T, _, _ = _arrays(params)
    b_out = np.conj(p) / q
    psi_a, dpsi_a = _plane_pair_at(k, 1.0, b_out, pot.a)
    interior, _, _ = _interior_regions(pot, k, psi_a, dpsi_a, cut)
    regions = (
        Region(-np.inf, pot.a, 'plane', c1=np.ones_like(q), c2=b_out),
        *interior,
        Region(pot.b, np.inf, 'plane', c1=1.0 / q, c2=np.zeros_like(q)),
    )
    return StationaryState(k=params.k, channel=Channel.FULL, regions=regions, mass=pot.mass, T=params.T)


def lambda_roots(params: TunnelingParams) -> Tuple[np.ndarray, np.ndarray]:
    """lambda = +-arctan(sqrt(T/R)), so that e^{i lambda} = sqrt(R) +- i sqrt(T)"""
    R = np.asarray(params.R)
    _require_reflection(np.atleast_1d(R))
    root = np.arctan2(np.sqrt(params.T), np.sqrt(R))
    return root, -root


def parity_residual(params: TunnelingParams, pot: ValidatedPotential, lam) -> Tuple[np.ndarray, np.ndarray]:
    """
    Oddness defect of the untruncated reflection solution at two probe
    pairs x_mid +- x' outside the barrier, with the tolerance scaled by the
    conditioning of the transfer matrix.
    """
    k, q, p, _, R, _ = _arrays(params)
    lam = np.atleast_1d(lam)
    A = np.sqrt(R) * np.exp(1j * lam)
    b = np.conj(p) / q
    C = np.conj(q) * A - p * b
    D = -np.conj(p) * A + q * b

    offsets = 0.5 * pot.d + PROBE_OFFSETS[:, None] / k[None, :]
    x_left = pot.x_mid - offsets
    x_right = pot.x_mid + offsets
    psi_left = A * np.exp(1j * k * x_left) + b * np.exp(-1j * k * x_left)
    psi_right = C * np.exp(1j * k * x_right) + D * np.exp(-1j * k * x_right)

    residual = np.max(np.abs(psi_right + psi_left), axis=0)
    tolerance = settings.PARITY_TOL * (np.abs(A) + np.abs(b)) * np.maximum(1.0, np.abs(q))
    return residual, tolerance


def _odd_root(params: TunnelingParams, pot: ValidatedPotential, degenerate: np.ndarray) -> np.ndarray:
    k, _, _, T, R, F = _arrays(params)
    lam = np.zeros_like(k)
    good = ~degenerate
    if not np.any(good):
        return lam
    root = np.arctan2(np.sqrt(T[good]), np.sqrt(R[good]))
    lam[good] = odd_root_sign(F[good]) * root

    residual, tolerance = parity_residual(params, pot, lam)
    bad = good & (residual > tolerance)
    if np.any(bad):
        worst = int(np.argmax(np.where(bad, residual / tolerance, 0.0)))
        logger.error(f"Odd-root rule failed the probe parity check at k={k[worst]:.6g} "
                     f"(F={F[worst]:.6g}, residual {residual[worst]:.3g})")
        raise ParityMismatch(f"{int(bad.sum())} wavenumbers fail the parity probe after root selection")
    return lam


def select_odd_root(params: TunnelingParams, pot: ValidatedPotential) -> np.ndarray:
    """
    The reflection root making the out-of-barrier solution odd about x_mid:
    +arctan(sqrt(T/R)) when F = 0, the negative root when F = pi. Always
    verified with the probe parity check.
    """
    _require_symmetric(pot)
    R = np.atleast_1d(params.R)
    _require_reflection(R)
    lam = _odd_root(params, pot, np.zeros(R.shape, dtype=bool))
    return lam.reshape(np.shape(params.k))


def probe_odd_root(params: TunnelingParams, pot: ValidatedPotential) -> np.ndarray:
    """Root selection from the parity probe alone (no use of F)"""
    _require_symmetric(pot)
    plus, minus = lambda_roots(params)
    res_plus, _ = parity_residual(params, pot, plus)
    res_minus, _ = parity_residual(params, pot, minus)
    lam = np.where(res_plus <= res_minus, np.atleast_1d(plus), np.atleast_1d(minus))
    return lam.reshape(np.shape(params.k))


def rect_ref_interior(k, psi_a, pot: ValidatedPotential) -> Region:
    """
    Odd interior c S(x - x_mid) of the reflection state in a single
    rectangular segment (sinh, sin or linear in x - x_mid), matched in value
    to psi_a at the left edge
    """
    seg = pot.segments[0]
    kappa2 = UnitSystem.kappa2(k, seg.v0, pot.mass)
    _, S_edge = fundamental_solutions(kappa2, pot.a - pot.x_mid)
    safe = np.abs(S_edge) > 1e-300
    slope = np.where(safe, psi_a / np.where(safe, S_edge, 1.0), 0.0)
    return Region(pot.a, pot.x_mid, 'segment', c1=np.zeros_like(slope), c2=slope,
                  anchor=pot.x_mid, kappa2=kappa2)


def _reflection_regions(params: TunnelingParams, pot: ValidatedPotential, lam, degenerate):
    k, q, p, _, R, _ = _arrays(params)
    A = np.where(degenerate, 0.0, np.sqrt(R) * np.exp(1j * np.atleast_1d(lam)))
    b = np.where(degenerate, 0.0, np.conj(p) / q)
    regions = [Region(-np.inf, pot.a, 'plane', c1=A, c2=b)]
    psi_a, dpsi_a = _plane_pair_at(k, A, b, pot.a)

    if pot.is_rectangular:
        regions.append(rect_ref_interior(k, psi_a, pot))
        regions.append(Region(pot.x_mid, pot.b, 'zero'))
    else:
        interior, _, _ = _interior_regions(pot, k, psi_a, dpsi_a, pot.x_mid)
        for region in interior:
            regions.append(region if region.x_hi <= pot.x_mid else Region(region.x_lo, region.x_hi, 'zero'))
    regions.append(Region(pot.b, np.inf, 'zero'))
    return tuple(regions)


def ref_state(params: TunnelingParams, pot: ValidatedPotential, lam_sel=None) -> StationaryState:
    """
    sqrt(R) e^{i lambda} e^{ikx} + (p*/q) e^{-ikx} left of a, the odd interior
    up to x_mid, zero from x_mid on. Zero flux everywhere.
    """
    _require_symmetric(pot)
    if lam_sel is None:
        lam_sel = select_odd_root(params, pot)
    degenerate = np.zeros(np.atleast_1d(params.k).shape, dtype=bool)
    regions = _reflection_regions(params, pot, lam_sel, degenerate)
    return StationaryState(k=params.k, channel=Channel.REF, regions=regions, mass=pot.mass,
                           T=params.T, lam=np.asarray(lam_sel))


def _difference(full: StationaryState, ref: StationaryState, channel: Channel) -> StationaryState:
    k = np.atleast_1d(full.k)
    regions = []
    for f, r in zip(full.regions, ref.regions):
        if (f.x_lo, f.x_hi) != (r.x_lo, r.x_hi):
            raise ValueError(f"region mismatch: [{f.x_lo}, {f.x_hi}) vs [{r.x_lo}, {r.x_hi})")
        if r.kind == 'zero':
            regions.append(f)
            continue
        if f.kind == 'segment':
            r = r.reanchor(f.anchor, k)
        regions.append(replace(f, c1=f.c1 - r.c1, c2=f.c2 - r.c2))
    return StationaryState(k=full.k, channel=channel, regions=tuple(regions), mass=full.mass,
                           T=full.T, lam=ref.lam)


def tr_state(params: TunnelingParams, pot: ValidatedPotential, lam_sel=None) -> StationaryState:
    """Full state minus the reflection state; derivative kink at x_mid"""
    _require_symmetric(pot)
    if lam_sel is None:
        lam_sel = select_odd_root(params, pot)
    full = full_state(params, pot, cut=pot.x_mid)
    ref = ref_state(params, pot, lam_sel)
    return _difference(full, ref, Channel.TR)


def split_states(params: TunnelingParams, pot: ValidatedPotential) -> Tuple[StationaryState, ...]:
    """
    (full, tr, ref) over a k-grid. Wavenumbers with R below the degeneracy
    threshold get a vanishing reflection state instead of an error.
    """
    _require_symmetric(pot)
    R = np.atleast_1d(params.R)
    degenerate = R < settings.R_DEGENERATE
    if np.any(degenerate):
        logger.warning(f"{int(degenerate.sum())} wavenumbers fully transmitted; reflection state set to zero there")
    lam = _odd_root(params, pot, degenerate)
    full = full_state(params, pot, cut=pot.x_mid)
    ref = StationaryState(k=params.k, channel=Channel.REF, mass=pot.mass, T=params.T, lam=lam,
                          regions=_reflection_regions(params, pot, lam, degenerate))
    return full, _difference(full, ref, Channel.TR), ref


def matching_mu(params: TunnelingParams) -> np.ndarray:
    """mu of the eigenvector pair that reproduces the odd reflection root"""
    return odd_root_sign(params.F).astype(int)


def smatrix_eigensolutions(params: TunnelingParams, mu: int) -> EigenSolution:
    """
    Eigenvectors of S = [[1/q, -p/q], [p*/q, 1/q]] with eigenvalue
    (1 + i mu |p|)/q: a reflection-type set (a_out = i mu |p|/q) and a
    transmission-type set (a_out = 1/q).
    """
    if mu not in (1, -1):
        raise ValueError(f"mu must be +1 or -1, got {mu}")
    _, q, p, _, R, _ = _arrays(params)
    _require_reflection(R)
    ap = np.abs(p)
    denom = 1.0 + 1j * mu * ap
    eigenvalue = denom / q
    reflection = AmplitudeSet(a_in=1j * mu * ap / denom, b_out=np.conj(p) / q,
                              a_out=1j * mu * ap / q, b_in=np.conj(p) / denom)
    w = -1j * mu * ap / p
    transmission = AmplitudeSet(a_in=1.0 / denom, b_out=w / q, a_out=1.0 / q, b_in=w / denom)

    residual = np.zeros_like(ap)
    for amps in (reflection, transmission):
        out_a = (amps.a_in - p * amps.b_in) / q
        out_b = (np.conj(p) * amps.a_in + amps.b_in) / q
        scale = np.sqrt(amps.outgoing_weight())
        scatter = np.hypot(np.abs(out_a - amps.a_out), np.abs(out_b - amps.b_out)) / scale
        eigen = np.hypot(np.abs(amps.a_out - eigenvalue * amps.a_in),
                         np.abs(amps.b_out - eigenvalue * amps.b_in)) / scale
        residual = np.maximum(residual, np.maximum(scatter, eigen))
    return EigenSolution(mu=mu, eigenvalue=eigenvalue, reflection=reflection,
                         transmission=transmission, residual=residual)
