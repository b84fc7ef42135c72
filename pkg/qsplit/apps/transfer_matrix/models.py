"""
Tunneling parameter records
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class TunnelingParams:
    """
    Real tunneling parameters at one wavenumber (or a vector of them).
    q, p are the elements of the transfer matrix [[q, p], [p*, q*]].
    """
    k: np.ndarray
    T: np.ndarray
    R: np.ndarray
    J: np.ndarray
    F: np.ndarray
    q: np.ndarray
    p: np.ndarray

    def reconstruct_q(self, d: float):
        return np.exp(1j * (self.k * d - self.J)) / np.sqrt(self.T)

    def reconstruct_p(self, s: float):
        return np.sqrt(self.R / self.T) * np.exp(1j * (0.5 * np.pi + self.F - self.k * s))


@dataclass
class ParamsTable:
    """
    Tunneling parameters and their k-derivatives over a whole k-grid.
    J and F are unwrapped along the grid (2*pi branches). For symmetric
    potentials the odd-root sign, Lambda and Lambda' are filled in.
    """
    k: np.ndarray
    T: np.ndarray
    R: np.ndarray
    J: np.ndarray
    F: np.ndarray
    q: np.ndarray
    p: np.ndarray
    dT: np.ndarray
    dJ: np.ndarray
    dF: np.ndarray
    symmetric: bool
    sign: Optional[np.ndarray] = None
    Lam: Optional[np.ndarray] = None
    dLam: Optional[np.ndarray] = None
    degenerate: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.degenerate is None:
            self.degenerate = np.zeros(self.k.shape, dtype=bool)

    def __len__(self):
        return len(self.k)

    def at(self, index: int) -> TunnelingParams:
        return TunnelingParams(
            k=self.k[index], T=self.T[index], R=self.R[index], J=self.J[index],
            F=self.F[index], q=self.q[index], p=self.p[index],
        )

    def as_params(self) -> TunnelingParams:
        return TunnelingParams(k=self.k, T=self.T, R=self.R, J=self.J, F=self.F, q=self.q, p=self.p)

    def to_frame(self):
        """pandas view used by the params and sweep outputs"""
        import pandas as pd

        data = {
            'k': self.k, 'T': self.T, 'R': self.R, 'J': self.J, 'F': self.F,
            'dT': self.dT, 'dJ': self.dJ, 'dF': self.dF,
        }
        if self.dLam is not None:
            data['Lambda'] = self.Lam
            data['dLambda'] = self.dLam
        return pd.DataFrame(data)
