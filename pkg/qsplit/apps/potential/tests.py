import numpy as np
import pytest

from qsplit.core.exceptions import DeltaNotPointwise, GapError, NonPositiveA, NonPositiveMass
from .analyzers import evaluate, potential_on_grid, validate
from .models import PotentialSpec, UnitSystem


def test_single_barrier_is_symmetric(barrier):
    assert barrier.symmetric
    assert barrier.d == pytest.approx(5.0)
    assert barrier.s == pytest.approx(1005.0)
    assert barrier.x_mid == pytest.approx(502.5)
    assert barrier.is_rectangular


def test_unequal_heights_break_symmetry(stepped):
    assert not stepped.symmetric


def test_mirrored_segments_are_symmetric(double_barrier):
    assert double_barrier.symmetric
    assert double_barrier.x_mid == pytest.approx(508.0)


def test_delta_potential():
    pot = validate(PotentialSpec(a=None, b=None, mass=0.067, delta=(500.0, -1.0)))
    assert pot.symmetric
    assert pot.d == 0.0
    assert pot.is_delta
    assert pot.x_mid == 500.0


@pytest.mark.parametrize('spec, error', [
    (PotentialSpec(a=0.0, b=5.0, mass=0.067, segments=[(5.0, 0.3)]), NonPositiveA),
    (PotentialSpec(a=-1.0, b=4.0, mass=0.067, segments=[(5.0, 0.3)]), NonPositiveA),
    (PotentialSpec(a=500.0, b=505.0, mass=0.067, segments=[(4.0, 0.3)]), GapError),
    (PotentialSpec(a=500.0, b=505.0, mass=0.067, segments=[(5.0, 0.3), (-1.0, 0.1)]), GapError),
    (PotentialSpec(a=500.0, b=499.0, mass=0.067), GapError),
    (PotentialSpec(a=500.0, b=505.0, mass=0.0, segments=[(5.0, 0.3)]), NonPositiveMass),
    (PotentialSpec(a=500.0, b=505.0, mass=0.067, segments=[(5.0, 0.3)], delta=(500.0, 1.0)), GapError),
    (PotentialSpec(a=None, b=None, mass=0.067, delta=(-3.0, 1.0)), NonPositiveA),
])
def test_invalid_specs(spec, error):
    with pytest.raises(error):
        validate(spec)


def test_config_errors_exit_with_two():
    with pytest.raises(GapError) as info:
        validate(PotentialSpec(a=500.0, b=505.0, mass=0.067, segments=[(4.0, 0.3)]))
    assert info.value.exit_code == 2
    assert 'GapError' in str(info.value)


def test_evaluate(barrier, stepped):
    assert evaluate(barrier, 502.0) == pytest.approx(0.3)
    assert evaluate(barrier, 499.0) == 0.0
    assert evaluate(barrier, 500.0) == pytest.approx(0.3)
    assert evaluate(barrier, 505.0) == 0.0
    np.testing.assert_allclose(evaluate(stepped, [501.0, 503.0, 510.0]), [0.3, 0.1, 0.0])


def test_evaluate_rejects_delta(delta):
    with pytest.raises(DeltaNotPointwise):
        evaluate(delta, 500.0)


def test_potential_on_grid_preserves_area(barrier, delta):
    x = np.arange(490.0, 515.0, 0.1)
    v = potential_on_grid(barrier, x)
    assert np.sum(v) * 0.1 == pytest.approx(0.3 * 5.0, rel=1e-9)

    spike = potential_on_grid(delta, x)
    assert np.count_nonzero(spike) == 1
    assert np.sum(spike) * 0.1 == pytest.approx(0.1)


def test_unit_system():
    assert UnitSystem.hbar2_2m(1.0) == pytest.approx(0.0380998)
    k = UnitSystem.wavenumber(0.25, 0.067)
    assert UnitSystem.energy(k, 0.067) == pytest.approx(0.25)
    # hbar k / m in nm/fs for a free electron at 1 nm^-1
    assert UnitSystem.hbar_over_m(1.0) == pytest.approx(0.1157676, rel=1e-5)
