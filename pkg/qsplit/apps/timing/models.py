"""
Timing results
"""
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from qsplit.core import settings
from qsplit.core.exceptions import NoRoot


class TimeStatus(str, Enum):
    OK = 'ok'
    NO_ROOT = 'no_root'


@dataclass(frozen=True)
class ExactTime:
    """Root-finding time of one channel; value is None unless status is OK"""
    value: Optional[float]
    status: TimeStatus
    roots: Tuple[float, ...] = ()
    reason: str = ''

    @classmethod
    def absent(cls, reason: str, roots=()) -> 'ExactTime':
        return cls(value=None, status=TimeStatus.NO_ROOT, roots=tuple(roots), reason=reason)

    @property
    def present(self) -> bool:
        return self.status == TimeStatus.OK

    def require(self) -> float:
        if not self.present:
            raise NoRoot(self.reason)
        return self.value

    def to_dict(self) -> dict:
        return {
            'value_fs': self.value,
            'status': self.status.value,
            'roots_fs': list(self.roots),
            'reason': self.reason or None,
        }


@dataclass(frozen=True)
class AsymptoticTimes:
    tau_tr: float
    tau_ref: Optional[float]
    d_eff_tr: float
    d_eff_ref: Optional[float]
    x_start_tr: float
    x_start_ref: Optional[float]
    mean_k_tr: float
    mean_k_ref: Optional[float]
    T_in: float
    R_in: float

    def predicted(self, L1: float, L2: float, hbar_over_m: float) -> Tuple[float, Optional[float]]:
        """Times between the CM crossings of a - L1 and b + L2 (tr) or a - L1 twice (ref)"""
        tr = self.tau_tr + (L1 + L2) / (hbar_over_m * self.mean_k_tr)
        ref = None
        if self.tau_ref is not None:
            ref = self.tau_ref + 2.0 * L1 / (hbar_over_m * self.mean_k_ref)
        return tr, ref


@dataclass(frozen=True)
class SwpaTimes:
    tr: float
    ref: Optional[float]
    L1: float
    L2: float
    a: float
    k0: float
    k_tr: float
    k_ref: Optional[float]


@dataclass(frozen=True)
class MomentumShifts:
    dk_tr: float
    dk_ref: Optional[float]
    predicted_dk_tr: Optional[float]
    T_in: float
    R_in: float

    @property
    def identity_residual(self) -> float:
        """<T> dk_tr + <R> dk_ref, zero up to rounding"""
        return self.T_in * self.dk_tr + self.R_in * (self.dk_ref or 0.0)


@dataclass
class TimingReport:
    L1: float
    L2: float
    window: Tuple[float, float]
    exact_tr: ExactTime
    exact_ref: ExactTime
    asymptotic: AsymptoticTimes
    swpa: SwpaTimes
    shifts: MomentumShifts
    predicted_tr: float
    predicted_ref: Optional[float]
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            'schema_version': settings.SCHEMA_VERSION,
            'L1_nm': self.L1,
            'L2_nm': self.L2,
            'window_fs': list(self.window),
            'exact_tr': self.exact_tr.to_dict(),
            'exact_ref': self.exact_ref.to_dict(),
            'asymptotic': asdict(self.asymptotic),
            'predicted_tr_fs': self.predicted_tr,
            'predicted_ref_fs': self.predicted_ref,
            'swpa': asdict(self.swpa),
            'momentum_shifts': {**asdict(self.shifts), 'identity_residual': self.shifts.identity_residual},
            **self.extras,
        }


@dataclass(frozen=True)
class CMTrajectories:
    """CM samples of the tr and ref channels on a common time axis (fs, nm)"""
    times: np.ndarray
    tr: Optional[np.ndarray]
    ref: Optional[np.ndarray]

    def to_frame(self):
        import pandas as pd

        frame = pd.DataFrame({'t_fs': self.times})
        if self.tr is not None:
            frame['cm_tr'] = self.tr
        if self.ref is not None:
            frame['cm_ref'] = self.ref
        return frame
