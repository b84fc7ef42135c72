"""
Crank-Nicolson finite-difference propagator
Independent of the transfer-matrix pipeline: the potential is sampled on
the grid and the Schroedinger equation is stepped with a tridiagonal
implicit scheme between zero Dirichlet walls.
"""
import logging
import time
from typing import List, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid
from scipy.linalg import solve_banded

from qsplit.apps.potential.analyzers import potential_on_grid
from qsplit.apps.potential.models import UnitSystem, ValidatedPotential
from qsplit.core import settings
from qsplit.core.exceptions import BoundaryLeak, CFLAccuracyViolation
from .models import GridField

logger = logging.getLogger(__name__)

LEAK_CHECK_EVERY = 100
EDGE_POINTS = 5
SPECTRUM_FLOOR = 1e-10


def oracle_grid(domain: Tuple[float, float] = settings.ORACLE_DOMAIN, dx: float = settings.ORACLE_DX) -> np.ndarray:
    n = int(round((domain[1] - domain[0]) / dx)) + 1
    return domain[0] + dx * np.arange(n)


def gaussian_field(x, l0: float, k0: float, mass: float, t: float = 0.0, x0: float = 0.0) -> GridField:
    """
    Free Gaussian packet with density width l0 at t = 0, evolved analytically
    to time t; same phase convention as the normalised k-space spectrum.
    """
    x = np.asarray(x, dtype=float)
    hbar_over_m = UnitSystem.hbar_over_m(mass)
    spread = 1.0 + 1j * hbar_over_m * t / (2.0 * l0 * l0)
    centred = x - x0 - hbar_over_m * k0 * t
    values = (
        (2.0 * np.pi * l0 * l0) ** -0.25 / np.sqrt(spread)
        * np.exp(-centred ** 2 / (4.0 * l0 * l0 * spread))
        * np.exp(1j * (k0 * (x - x0) - 0.5 * hbar_over_m * k0 * k0 * t))
    )
    return GridField(x=x, values=values, t=float(t))


def free_width(l0: float, mass: float, t: float) -> float:
    """Density standard deviation of a free Gaussian at time t"""
    return l0 * np.sqrt(1.0 + (UnitSystem.hbar_over_m(mass) * t / (2.0 * l0 * l0)) ** 2)


def max_wavenumber(field: GridField) -> float:
    """Largest |k| carrying spectral power above SPECTRUM_FLOOR of the peak"""
    power = np.abs(np.fft.fft(field.values)) ** 2
    k = 2.0 * np.pi * np.fft.fftfreq(field.x.size, d=field.dx)
    return float(np.max(np.abs(k[power > SPECTRUM_FLOOR * power.max()])))


def check_preconditions(field: GridField, pot: ValidatedPotential, dt: float) -> float:
    """
    dt * E_max / hbar < ORACLE_PHASE_LIMIT and 2 pi / k_max resolved by
    ORACLE_POINTS_PER_WAVELENGTH nodes. Returns E_max in eV.
    """
    k_max = max_wavenumber(field)
    e_max = UnitSystem.energy(k_max, pot.mass) + pot.v_max
    phase = dt * e_max / UnitSystem.hbar
    if phase >= settings.ORACLE_PHASE_LIMIT:
        raise CFLAccuracyViolation(f"dt * E_max / hbar = {phase:.3g} >= {settings.ORACLE_PHASE_LIMIT} "
                                   f"(dt={dt} fs, E_max={e_max:.4g} eV)")
    if field.dx > 2.0 * np.pi / (settings.ORACLE_POINTS_PER_WAVELENGTH * k_max):
        raise CFLAccuracyViolation(f"dx = {field.dx} nm resolves 2 pi / k_max = {2 * np.pi / k_max:.4g} nm "
                                   f"with fewer than {settings.ORACLE_POINTS_PER_WAVELENGTH} points")
    return e_max


def edge_density(values: np.ndarray) -> float:
    density = np.abs(values) ** 2
    return float(max(density[:EDGE_POINTS].max(), density[-EDGE_POINTS:].max()))


class CrankNicolson:
    """
    (B + i dt K / 2 hbar) psi_{n+1} = (B - i dt K / 2 hbar) psi_n

    B = 1 + delta^2 / 12 is the compact (Numerov) weight, so that
    B^-1 delta^2 / dx^2 is a fourth-order Laplacian, and
    K = -hbar^2/2m delta^2 / dx^2 + B V with V averaged over each bond.
    Both B and K are real symmetric tridiagonal; the step conserves
    psi^H B psi exactly. The left-hand matrix is kept in banded form.
    """

    def __init__(self, x: np.ndarray, pot: ValidatedPotential, dt: float):
        self.x = x
        self.dt = dt
        dx = x[1] - x[0]
        self.v = potential_on_grid(pot, x)
        kinetic = UnitSystem.hbar2_2m(pot.mass) / (dx * dx)
        beta = 1j * dt / (2.0 * UnitSystem.hbar)

        k_diag = 2.0 * kinetic + 10.0 * self.v / 12.0
        k_bond = -kinetic + (self.v[:-1] + self.v[1:]) / 24.0

        n = x.size
        self.ab = np.zeros((3, n), dtype=complex)
        self.ab[0, 1:] = 1.0 / 12.0 + beta * k_bond
        self.ab[1, :] = 10.0 / 12.0 + beta * k_diag
        self.ab[2, :-1] = 1.0 / 12.0 + beta * k_bond
        self.explicit_diag = 10.0 / 12.0 - beta * k_diag
        self.explicit_bond = 1.0 / 12.0 - beta * k_bond

    def step(self, psi: np.ndarray) -> np.ndarray:
        rhs = self.explicit_diag * psi
        rhs[1:] += self.explicit_bond * psi[:-1]
        rhs[:-1] += self.explicit_bond * psi[1:]
        return solve_banded((1, 1), self.ab, rhs, overwrite_b=True, check_finite=False)

    def run(self, psi: np.ndarray, steps: int) -> np.ndarray:
        for n in range(1, steps + 1):
            psi = self.step(psi)
            if n % LEAK_CHECK_EVERY == 0 or n == steps:
                leak = edge_density(psi)
                if leak > settings.BOUNDARY_LEAK:
                    logger.error(f"Boundary density {leak:.3g} after {n} steps")
                    raise BoundaryLeak(f"density {leak:.3g} at the domain edge exceeds {settings.BOUNDARY_LEAK:g}; "
                                       f"widen the oracle domain")
        return psi


def propagate(initial: GridField, pot: ValidatedPotential, dt: float = settings.ORACLE_DT, steps: int = 1,
              check: bool = True) -> GridField:
    """Advance a field by steps Crank-Nicolson steps of size dt (fs)"""
    if check:
        check_preconditions(initial, pot, dt)
    start_time = time.time()
    psi = CrankNicolson(initial.x, pot, dt).run(initial.values.astype(complex), steps)
    logger.info(f"Propagated {steps} steps of {dt} fs on {initial.x.size} points "
                f"in {time.time() - start_time:.2f} seconds")
    return GridField(x=initial.x, values=psi, t=initial.t + steps * dt)


def evolve(initial: GridField, pot: ValidatedPotential, times: Sequence[float],
           dt: float = settings.ORACLE_DT) -> List[GridField]:
    """
    Snapshots at the requested times (fs, ascending). Each leg uses the
    largest step not above dt that lands exactly on the checkpoint.
    """
    check_preconditions(initial, pot, dt)
    snapshots = []
    field = initial
    for t in sorted(float(t) for t in times):
        span = t - field.t
        if span < -1e-9:
            raise ValueError(f"checkpoint {t} fs lies before the current time {field.t} fs")
        steps = int(np.ceil(span / dt - 1e-9)) if span > 1e-9 else 0
        if steps:
            field = propagate(field, pot, span / steps, steps, check=False)
            field = GridField(x=field.x, values=field.values, t=t)
        snapshots.append(field)
    return snapshots


def scheme_norm2(field: GridField) -> float:
    """dx psi^H B psi, the quantity CrankNicolson conserves to rounding"""
    psi = field.values
    weighted = 10.0 * np.sum(np.abs(psi) ** 2) + 2.0 * np.real(np.vdot(psi[:-1], psi[1:]))
    return float(field.dx * weighted / 12.0)


def split_by_region(field: GridField, x_cut: float) -> Tuple[float, float]:
    """Trapezoid norms left and right of x_cut, with the density interpolated at x_cut"""
    x, density = field.x, field.density
    if x_cut <= x[0]:
        return 0.0, float(trapezoid(density, x))
    if x_cut >= x[-1]:
        return float(trapezoid(density, x)), 0.0
    cut_density = np.interp(x_cut, x, density)
    left = x < x_cut
    right = x > x_cut
    left_norm = trapezoid(np.append(density[left], cut_density), np.append(x[left], x_cut))
    right_norm = trapezoid(np.insert(density[right], 0, cut_density), np.insert(x[right], 0, x_cut))
    return float(left_norm), float(right_norm)
