"""
Transfer matrix and real tunneling parameters
Segment propagators are products of real (psi, psi') matrices, converted to
plane-wave amplitudes at the barrier edges
"""
import logging
import time

import numpy as np

from qsplit.apps.potential.models import DeltaSpike, UnitSystem, ValidatedPotential
from qsplit.core import settings
from qsplit.core.exceptions import NonPositiveK, StepTooLarge
from .models import ParamsTable, TunnelingParams

logger = logging.getLogger(__name__)

STENCIL = np.array([-2.0, -1.0, 1.0, 2.0])
STENCIL_WEIGHTS = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0


def _as_k(k) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    if np.any(k <= 0):
        raise NonPositiveK(f"wavenumbers must be positive, got min {np.min(k)}")
    return k


def fundamental_solutions(kappa2, dx):
    """
    Solutions C, S of psi'' = -kappa2 psi with C(0)=1, C'(0)=0, S(0)=0, S'(0)=1.
    Oscillatory and evanescent branches use cos/sin and cosh/sinh on real
    arguments; |kappa2 dx^2| < 1e-6 uses the series. C' = -kappa2 S, S' = C.
    """
    kappa2, dx = np.broadcast_arrays(np.asarray(kappa2, dtype=float), np.asarray(dx, dtype=float))
    u = kappa2 * dx * dx
    K = np.sqrt(np.abs(kappa2))
    z = K * dx

    C = np.empty(u.shape)
    S = np.empty(u.shape)
    small = np.abs(u) < 1e-6
    osc = (kappa2 > 0) & ~small
    evan = (kappa2 < 0) & ~small

    C[osc] = np.cos(z[osc])
    S[osc] = np.sin(z[osc]) / K[osc]
    C[evan] = np.cosh(z[evan])
    S[evan] = np.sinh(z[evan]) / K[evan]
    us, dxs = u[small], dx[small]
    C[small] = 1.0 - us / 2.0 + us * us / 24.0 - us ** 3 / 720.0
    S[small] = dxs * (1.0 - us / 6.0 + us * us / 120.0 - us ** 3 / 5040.0)
    return C, S


def piece_matrix(piece, k: np.ndarray, mass: float) -> np.ndarray:
    """(psi, psi') propagator across one segment or delta spike, shape k.shape + (2, 2)"""
    M = np.empty(k.shape + (2, 2))
    if isinstance(piece, DeltaSpike):
        M[..., 0, 0] = 1.0
        M[..., 0, 1] = 0.0
        M[..., 1, 0] = UnitSystem.delta_coupling(piece.w, mass)
        M[..., 1, 1] = 1.0
        return M
    kappa2 = UnitSystem.kappa2(k, piece.v0, mass)
    C, S = fundamental_solutions(kappa2, piece.width)
    M[..., 0, 0] = C
    M[..., 0, 1] = S
    M[..., 1, 0] = -kappa2 * S
    M[..., 1, 1] = C
    return M


def interior_propagator(pot: ValidatedPotential, k: np.ndarray) -> np.ndarray:
    """Ordered product mapping (psi, psi') at a onto (psi, psi') at b"""
    M = np.broadcast_to(np.eye(2), k.shape + (2, 2)).copy()
    for piece in pot.pieces:
        M = piece_matrix(piece, k, pot.mass) @ M
    return M


def plane_wave_basis(k: np.ndarray, x: float) -> np.ndarray:
    """Maps (A, B) of A e^{ikx} + B e^{-ikx} onto (psi, psi') at x"""
    e = np.exp(1j * k * x)
    P = np.empty(k.shape + (2, 2), dtype=complex)
    P[..., 0, 0] = e
    P[..., 0, 1] = 1.0 / e
    P[..., 1, 0] = 1j * k * e
    P[..., 1, 1] = -1j * k / e
    return P


def plane_wave_amplitudes(k: np.ndarray, x: float) -> np.ndarray:
    """Inverse of plane_wave_basis"""
    e = np.exp(1j * k * x)
    Pinv = np.empty(k.shape + (2, 2), dtype=complex)
    Pinv[..., 0, 0] = 0.5 / e
    Pinv[..., 0, 1] = 0.5 / (1j * k * e)
    Pinv[..., 1, 0] = 0.5 * e
    Pinv[..., 1, 1] = -0.5 * e / (1j * k)
    return Pinv


def transfer_matrix(pot: ValidatedPotential, k) -> np.ndarray:
    """
    Y with (A_in, B_out) = Y (A_out, B_in), amplitudes of e^{+ikx}, e^{-ikx}
    left of a and right of b. Structure [[q, p], [p*, q*]], det Y = 1.
    """
    k = _as_k(k)
    M = interior_propagator(pot, k)
    M_inv = np.empty_like(M)
    M_inv[..., 0, 0] = M[..., 1, 1]
    M_inv[..., 0, 1] = -M[..., 0, 1]
    M_inv[..., 1, 0] = -M[..., 1, 0]
    M_inv[..., 1, 1] = M[..., 0, 0]
    return plane_wave_amplitudes(k, pot.a) @ M_inv @ plane_wave_basis(k, pot.b)


def _raw_params(pot: ValidatedPotential, k: np.ndarray):
    Y = transfer_matrix(pot, k)
    q = Y[..., 0, 0]
    p = Y[..., 0, 1]
    T = 1.0 / np.abs(q) ** 2
    R = np.abs(p) ** 2 * T
    J = -np.angle(q * np.exp(-1j * k * pot.d))
    F = np.angle(-1j * p * np.exp(1j * k * pot.s))
    return q, p, T, R, J, F


def tunneling_params(pot: ValidatedPotential, k) -> TunnelingParams:
    """
    T = 1/|q|^2, J = kd - arg q, F = arg p - pi/2 + ks on their principal
    branches (J and F in (-pi, pi]); R is computed as |p|^2 T.
    """
    k = _as_k(k)
    q, p, T, R, J, F = _raw_params(pot, k)
    return TunnelingParams(k=k, T=T, R=R, J=J, F=F, q=q, p=p)


def params_derivatives(pot: ValidatedPotential, k, h: float = settings.FD_STEP):
    """
    5-point central differences (T', J', F'). J is unwrapped with period
    2*pi and F with period pi across the stencil, since F jumps by pi where
    p changes sign.
    """
    k = _as_k(k)
    if np.any(k - 2 * h <= 0):
        raise StepTooLarge(f"stencil k - 2h reaches non-positive wavenumbers (h={h})")
    nodes = k[None, ...] + h * STENCIL.reshape((-1,) + (1,) * k.ndim)
    _, _, T, R, J, F = _raw_params(pot, nodes)
    # without reflection p is rounding noise and F carries no information
    degenerate = np.any(R < settings.R_DEGENERATE, axis=0)

    J = np.unwrap(J, axis=0)
    F = np.where(degenerate, 0.0, np.unwrap(F, axis=0, period=np.pi))
    if np.any(np.abs(np.diff(J, axis=0)) > 0.5 * np.pi):
        raise StepTooLarge(f"J jumps by more than pi/2 between stencil points (h={h})")
    if np.any(np.abs(np.diff(F, axis=0)) > 0.25 * np.pi):
        raise StepTooLarge(f"F jumps by more than pi/4 between stencil points (h={h})")

    w = STENCIL_WEIGHTS.reshape((-1,) + (1,) * k.ndim)
    dT = np.sum(w * T, axis=0) / h
    dJ = np.sum(w * J, axis=0) / h
    dF = np.sum(w * F, axis=0) / h
    return dT, dJ, dF


def odd_root_sign(F) -> np.ndarray:
    """
    +1 where the reflection root is +arctan(sqrt(T/R)) (F = 0), -1 where it
    is the negative root (F = pi); from e^{i lambda} = sqrt(R) + i sqrt(T) e^{-iF}.
    """
    return np.where(np.cos(F) >= 0.0, 1.0, -1.0)


def lambda_prime(sign, T, R, dT):
    """Lambda' = sign * T' / (2 sqrt(R T)); nan where R or T vanish"""
    with np.errstate(divide='ignore', invalid='ignore'):
        return sign * dT / (2.0 * np.sqrt(R * T))


def _delta_closed_forms(pot: ValidatedPotential, k: np.ndarray):
    g = UnitSystem.delta_coupling(pot.delta.w, pot.mass)
    den = 4.0 * k * k + g * g
    dJ = 2.0 * g / den
    dT = 8.0 * k * g * g / den ** 2
    return dT, dJ, np.zeros_like(k)


def rect_transmission_phase(v0: float, d: float, mass: float, k) -> np.ndarray:
    """
    Continuous J(k) of a single rectangular segment; kd for v0 = 0.
      below the top: J = -arctan((kappa^2 - k^2) tanh(kappa d) / (2 k kappa))
      above the top: J = theta + arctan2(c sin(theta) cos(theta), 1 + c sin(theta)^2),
                     theta = K d, c = (K - k)^2 / (2 k K)
    """
    k = _as_k(k)
    kappa2 = UnitSystem.kappa2(k, v0, mass)
    below = kappa2 <= 0.0
    kappa = np.sqrt(np.where(below, -kappa2, 0.0))
    with np.errstate(divide='ignore', invalid='ignore'):
        tanh_over_kappa = np.where(kappa > 0.0, np.tanh(kappa * d) / kappa, d)
    J_below = -np.arctan((kappa * kappa - k * k) * tanh_over_kappa / (2.0 * k))

    K = np.sqrt(np.where(below, 0.0, kappa2))
    theta = K * d
    with np.errstate(divide='ignore', invalid='ignore'):
        c = np.where(K > 0.0, (K - k) ** 2 / (2.0 * k * K), 0.0)
    sin, cos = np.sin(theta), np.cos(theta)
    J_above = theta + np.arctan2(c * sin * cos, 1.0 + c * sin * sin)
    return np.where(below, J_below, J_above)


def params_table(pot: ValidatedPotential, k, h: float = settings.FD_STEP) -> ParamsTable:
    """
    Tunneling parameters over a whole k-grid. Phases are unwrapped along
    the grid starting from the principal branch at the smallest k; for a
    single rectangular segment J is then shifted by 2 pi n onto the
    continuous branch of rect_transmission_phase.
    """
    start_time = time.time()
    k = _as_k(k)
    q, p, T, R, J, F = _raw_params(pot, k)
    J = np.unwrap(J)
    F = np.unwrap(F)
    if pot.is_rectangular:
        seg = pot.segments[0]
        J_ref = rect_transmission_phase(seg.v0, seg.width, pot.mass, k[:1])[0]
        J = J + 2.0 * np.pi * np.round((J_ref - J[0]) / (2.0 * np.pi))

    if pot.is_delta:
        dT, dJ, dF = _delta_closed_forms(pot, k)
    else:
        dT, dJ, dF = params_derivatives(pot, k, h)

    degenerate = R < settings.R_DEGENERATE
    table = ParamsTable(
        k=k, T=T, R=R, J=J, F=F, q=q, p=p, dT=dT, dJ=dJ, dF=dF,
        symmetric=pot.symmetric, degenerate=degenerate,
    )

    if pot.symmetric:
        sign = odd_root_sign(F)
        Lam = sign * np.arctan2(np.sqrt(T), np.sqrt(R))
        if pot.is_delta:
            dLam = dJ.copy()
        else:
            dLam = lambda_prime(sign, T, R, dT)
            if np.all(degenerate):
                dLam = np.zeros_like(k)
            elif np.any(degenerate):
                good = ~degenerate
                dLam[degenerate] = np.interp(k[degenerate], k[good], dLam[good])
                logger.warning(f"{int(degenerate.sum())} grid points with R < {settings.R_DEGENERATE:g}; "
                               f"Lambda' interpolated there")
        table.sign = sign
        table.Lam = Lam
        table.dLam = dLam

    logger.info(f"Tunneling parameters for {len(k)} wavenumbers in {time.time() - start_time:.2f} seconds")
    return table


def lambda_prime_fd(pot: ValidatedPotential, k, h: float = settings.FD_STEP) -> np.ndarray:
    """
    Finite-difference Lambda' of the odd reflection root, for checking the
    analytic T'/(2 sqrt(RT)). The root sign is taken at the centre point.
    """
    k = _as_k(k)
    if np.any(k - 2 * h <= 0):
        raise StepTooLarge(f"stencil k - 2h reaches non-positive wavenumbers (h={h})")
    _, _, _, _, _, F = _raw_params(pot, k)
    sign = odd_root_sign(F)
    nodes = k[None, ...] + h * STENCIL.reshape((-1,) + (1,) * k.ndim)
    _, _, T, R, _, _ = _raw_params(pot, nodes)
    Lam = sign * np.arctan2(np.sqrt(T), np.sqrt(R))
    w = STENCIL_WEIGHTS.reshape((-1,) + (1,) * k.ndim)
    return np.sum(w * Lam, axis=0) / h
