"""
Potential validation and evaluation
"""
import logging
from typing import List

import numpy as np

from qsplit.core.exceptions import DeltaNotPointwise, GapError, NonPositiveA, NonPositiveMass
from .models import DeltaSpike, PotentialSpec, Segment, ValidatedPotential

logger = logging.getLogger(__name__)

TILING_RTOL = 1e-12


def _is_mirror_symmetric(segments: List[Segment]) -> bool:
    """Segment list equals its reversal in widths and heights"""
    for left, right in zip(segments, reversed(segments)):
        scale = max(abs(left.width), abs(right.width), 1.0)
        if abs(left.width - right.width) > TILING_RTOL * scale:
            return False
        if left.v0 != right.v0:
            return False
    return True


def validate(spec: PotentialSpec) -> ValidatedPotential:
    """
    Check the geometry and derive d, s, x_mid and the symmetry flag.
    """
    if spec.mass is None or spec.mass <= 0:
        raise NonPositiveMass(f"mass must be positive, got {spec.mass}")

    if spec.delta is not None:
        if spec.segments:
            raise GapError("a potential is either segments or a single delta spike, not both")
        x0, w = spec.delta
        if x0 <= 0:
            raise NonPositiveA(f"delta position must be positive, got {x0}")
        for edge in (spec.a, spec.b):
            if edge is not None and abs(edge - x0) > TILING_RTOL * max(abs(x0), 1.0):
                raise GapError(f"delta potential needs a = b = x0 = {x0}, got edge {edge}")
        pot = ValidatedPotential(
            a=float(x0), b=float(x0), mass=float(spec.mass),
            segments=(), delta=DeltaSpike(float(x0), float(w)), symmetric=True,
        )
        logger.debug(f"Validated {pot.describe()}")
        return pot

    if spec.a is None or spec.a <= 0:
        raise NonPositiveA(f"left edge a must be positive, got {spec.a}")
    if spec.b is None or spec.b < spec.a:
        raise GapError(f"right edge b must satisfy b >= a, got a={spec.a}, b={spec.b}")

    segments = []
    x = float(spec.a)
    for width, v0 in spec.segments:
        if width <= 0:
            raise GapError(f"segment widths must be positive, got {width}")
        segments.append(Segment(x, x + float(width), float(v0)))
        x += float(width)

    d = spec.b - spec.a
    if abs(x - spec.b) > TILING_RTOL * max(d, 1.0):
        raise GapError(f"segments cover {x - spec.a:.15g} nm but b - a = {d:.15g} nm")
    if segments:
        # snap the last edge onto b so that region boundaries agree exactly
        last = segments[-1]
        segments[-1] = Segment(last.x_lo, float(spec.b), last.v0)

    pot = ValidatedPotential(
        a=float(spec.a), b=float(spec.b), mass=float(spec.mass),
        segments=tuple(segments), delta=None,
        symmetric=_is_mirror_symmetric(segments),
    )
    logger.debug(f"Validated {pot.describe()} (symmetric={pot.symmetric})")
    return pot


def evaluate(pot: ValidatedPotential, x):
    """
    V(x) in eV. Segments are left-closed, right-open; zero outside [a, b).
    """
    if pot.is_delta:
        raise DeltaNotPointwise("a delta potential has no pointwise value")
    x = np.asarray(x, dtype=float)
    v = np.zeros_like(x)
    for seg in pot.segments:
        v = np.where((x >= seg.x_lo) & (x < seg.x_hi), seg.v0, v)
    return v if v.ndim else float(v)


def potential_on_grid(pot: ValidatedPotential, x: np.ndarray) -> np.ndarray:
    """
    Cell-averaged potential on a uniform grid; a delta spike becomes a single
    cell of height W/dx at the node nearest to it.
    """
    x = np.asarray(x, dtype=float)
    dx = x[1] - x[0]
    v = np.zeros_like(x)
    if pot.is_delta:
        index = int(np.argmin(np.abs(x - pot.delta.x0)))
        v[index] = pot.delta.w / dx
        return v
    lo, hi = x - 0.5 * dx, x + 0.5 * dx
    for seg in pot.segments:
        overlap = np.clip(np.minimum(hi, seg.x_hi) - np.maximum(lo, seg.x_lo), 0.0, None)
        v += seg.v0 * overlap / dx
    return v
