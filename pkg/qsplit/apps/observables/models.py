"""
Expectation values of x-space fields
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class Moments:
    norm2: float
    mean_x: float
    var_x: float
    mean_k: float
    flux: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def std_x(self) -> float:
        return float(np.sqrt(self.var_x))

    def to_dict(self) -> dict:
        return {
            'norm2': self.norm2,
            'mean_x': self.mean_x,
            'var_x': self.var_x,
            'mean_k': self.mean_k,
        }


@dataclass(frozen=True)
class LineFit:
    """Least-squares line x = slope * t + intercept"""
    slope: float
    intercept: float
    r2: float

    def __call__(self, t):
        return self.slope * np.asarray(t, dtype=float) + self.intercept
