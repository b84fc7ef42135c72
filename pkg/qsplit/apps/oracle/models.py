"""
Fields on a uniform spatial grid
"""
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid


@dataclass(frozen=True)
class GridField:
    x: np.ndarray
    values: np.ndarray
    t: float = 0.0

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    @property
    def norm2(self) -> float:
        return float(trapezoid(self.density, self.x))

    def restricted(self, x_lo: float, x_hi: float, stride: int = 1) -> 'GridField':
        """Sub-grid of the nodes in [x_lo, x_hi], every stride-th one"""
        mask = (self.x >= x_lo) & (self.x <= x_hi)
        return GridField(x=self.x[mask][::stride], values=self.values[mask][::stride], t=self.t)
