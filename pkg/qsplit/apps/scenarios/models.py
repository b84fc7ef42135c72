"""
Scenario configuration and the lazily built objects of one scenario run
"""
import logging
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import List, Optional, Tuple

import numpy as np

from qsplit.apps.potential.analyzers import validate
from qsplit.apps.potential.models import PotentialSpec, UnitSystem, ValidatedPotential
from qsplit.apps.spectral.analyzers import Synthesizer, gaussian_spectrum
from qsplit.apps.spectral.models import KGrid, SpectralPacket
from qsplit.apps.transfer_matrix.analyzers import params_table
from qsplit.apps.transfer_matrix.models import ParamsTable
from qsplit.core import settings

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class XGridConfig:
    min: float
    max: float
    step: float

    @property
    def points(self) -> np.ndarray:
        n = int(round((self.max - self.min) / self.step)) + 1
        return self.min + self.step * np.arange(n)


@dataclass(frozen=True)
class PacketConfig:
    l0: float
    e0: Optional[float] = None
    k0: Optional[float] = None

    def wavenumber(self, mass: float) -> float:
        if self.k0 is not None:
            return float(self.k0)
        return float(UnitSystem.wavenumber(self.e0, mass))


@dataclass(frozen=True)
class TimingConfig:
    L1: float = 0.0
    L2: float = 0.0
    window: Tuple[float, float] = (0.0, 900.0)      # fs
    x_grid: XGridConfig = XGridConfig(-600.0, 1600.0, 0.5)


@dataclass(frozen=True)
class OracleConfig:
    dx: float = settings.ORACLE_DX
    dt: float = settings.ORACLE_DT
    domain: Tuple[float, float] = settings.ORACLE_DOMAIN


@dataclass(frozen=True)
class Scenario:
    name: str
    potential: PotentialSpec
    packet: PacketConfig
    k_points: int = settings.K_GRID_POINTS
    span_sigmas: float = settings.K_SPAN_SIGMAS
    x_grid: XGridConfig = XGridConfig(**settings.X_GRID)
    times: List[float] = field(default_factory=lambda: [0.0])   # fs
    timing: TimingConfig = TimingConfig()
    oracle: OracleConfig = OracleConfig()
    description: str = ''

    def with_distances(self, L1: Optional[float] = None, L2: Optional[float] = None) -> 'Scenario':
        timing = replace(
            self.timing,
            L1=self.timing.L1 if L1 is None else float(L1),
            L2=self.timing.L2 if L2 is None else float(L2),
        )
        return replace(self, timing=timing)


class ScenarioContext:
    """
    Validated potential, incident packet, parameter table and synthesizer
    of a scenario, each built on first use
    """

    def __init__(self, scenario: Scenario):
        self.scenario = scenario

    @cached_property
    def pot(self) -> ValidatedPotential:
        return validate(self.scenario.potential)

    @cached_property
    def k0(self) -> float:
        return self.scenario.packet.wavenumber(self.pot.mass)

    @cached_property
    def grid(self) -> KGrid:
        return KGrid.around(self.k0, self.scenario.packet.l0, self.scenario.k_points, self.scenario.span_sigmas)

    @cached_property
    def packet(self) -> SpectralPacket:
        return gaussian_spectrum(self.scenario.packet.l0, self.k0, self.grid, self.pot.mass)

    @cached_property
    def table(self) -> ParamsTable:
        return params_table(self.pot, self.grid.k)

    @cached_property
    def synthesizer(self) -> Synthesizer:
        return Synthesizer(self.pot, self.packet, self.table)

    @property
    def x(self) -> np.ndarray:
        return self.scenario.x_grid.points

    def region_x(self, margin: float = 10.0, step: float = 0.01) -> np.ndarray:
        """Fine grid over the barrier and its immediate surroundings"""
        n = int(round((self.pot.d + 2.0 * margin) / step)) + 1
        return self.pot.a - margin + step * np.arange(n)
