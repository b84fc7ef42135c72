import numpy as np
import pytest

from qsplit.apps.observables.analyzers import l2_distance, moments_x
from qsplit.apps.potential.analyzers import validate
from qsplit.apps.potential.models import PotentialSpec, UnitSystem
from qsplit.apps.spectral.analyzers import Synthesizer
from qsplit.apps.stationary.models import Channel
from qsplit.core.exceptions import BoundaryLeak, CFLAccuracyViolation
from .analyzers import (
    edge_density, evolve, free_width, gaussian_field, max_wavenumber, oracle_grid, propagate, scheme_norm2,
    split_by_region,
)
from .models import GridField

L0 = 7.5
MASS = 0.067


@pytest.fixture(scope='module')
def small_grid():
    return oracle_grid((-100.0, 200.0), 0.025)


def test_oracle_grid():
    x = oracle_grid((-400.0, 1200.0), 0.025)
    assert x.size == 64001
    assert x[0] == -400.0
    assert x[-1] == pytest.approx(1200.0)
    np.testing.assert_allclose(np.diff(x), 0.025)


def test_gaussian_field_is_normalised(small_grid, k0):
    field = gaussian_field(small_grid, L0, k0, MASS)
    assert field.norm2 == pytest.approx(1.0, rel=1e-9)
    assert field.t == 0.0
    assert max_wavenumber(field) > k0


def test_free_gaussian_follows_analytic_solution(small_grid, free, k0):
    initial = gaussian_field(small_grid, L0, k0, MASS)
    final = propagate(initial, free, steps=2500)
    assert final.t == pytest.approx(50.0)
    expected = gaussian_field(small_grid, L0, k0, MASS, t=50.0).values
    assert l2_distance(expected, final.values, small_grid) < 5e-4

    moments = moments_x(final.values, small_grid, mass=MASS)
    velocity = UnitSystem.hbar_over_m(MASS) * k0
    assert moments.mean_x == pytest.approx(velocity * 50.0, abs=0.01)
    assert moments.std_x == pytest.approx(free_width(L0, MASS, 50.0), rel=1e-3)


def test_propagation_conserves_the_norm(small_grid, k0):
    near = validate(PotentialSpec(a=50.0, b=55.0, mass=MASS, segments=[(5.0, 0.3)]))
    initial = gaussian_field(small_grid, L0, k0, MASS)
    final = propagate(initial, near, steps=2000)
    assert scheme_norm2(final) == pytest.approx(scheme_norm2(initial), rel=1e-10)
    # the plain norm moves only while the packet overlaps the barrier
    assert final.norm2 == pytest.approx(initial.norm2, rel=1e-5)


def test_time_step_too_large(small_grid, free, k0):
    initial = gaussian_field(small_grid, L0, k0, MASS)
    with pytest.raises(CFLAccuracyViolation):
        propagate(initial, free, dt=1.0)


def test_grid_too_coarse(free, k0):
    initial = gaussian_field(np.linspace(-100.0, 100.0, 201), L0, k0, MASS)
    with pytest.raises(CFLAccuracyViolation) as excinfo:
        propagate(initial, free)
    assert 'resolves' in str(excinfo.value)


def test_boundary_leak(free, k0):
    # smooth packet well inside the domain, run until its front reaches the right wall
    initial = gaussian_field(oracle_grid((-80.0, 80.0), 0.025), L0, k0, MASS)
    assert edge_density(initial.values) < 1e-20
    with pytest.raises(BoundaryLeak) as excinfo:
        propagate(initial, free, steps=3000)
    assert 'widen' in str(excinfo.value)


def test_edge_density():
    values = np.zeros(1000, dtype=complex)
    assert edge_density(values) == 0.0
    values[500] = 1.0
    assert edge_density(values) == 0.0
    values[-1] = 1e-3j
    assert edge_density(values) == pytest.approx(1e-6)


def test_split_by_region(small_grid, k0):
    field = gaussian_field(small_grid, L0, k0, MASS)
    left, right = split_by_region(field, 0.0)
    assert left == pytest.approx(0.5, rel=1e-6)
    assert left + right == pytest.approx(field.norm2, rel=1e-12)
    # a cut between nodes
    left, right = split_by_region(field, 3.0101)
    assert left + right == pytest.approx(field.norm2, rel=1e-12)
    assert split_by_region(field, 500.0) == (pytest.approx(field.norm2), 0.0)
    assert split_by_region(field, -500.0) == (0.0, pytest.approx(field.norm2))


def test_restricted(small_grid, k0):
    field = gaussian_field(small_grid, L0, k0, MASS, t=3.0)
    sub = field.restricted(-10.0, 10.0, stride=2)
    assert sub.x[0] >= -10.0 and sub.x[-1] <= 10.0
    assert sub.dx == pytest.approx(0.05)
    assert sub.t == 3.0
    np.testing.assert_array_equal(sub.values, field.values[(small_grid >= -10.0) & (small_grid <= 10.0)][::2])


def test_evolve_lands_on_checkpoints(small_grid, free, k0):
    initial = gaussian_field(small_grid, L0, k0, MASS)
    snapshots = evolve(initial, free, [5.0, 0.0, 2.01])
    assert [s.t for s in snapshots] == [0.0, 2.01, 5.0]
    np.testing.assert_array_equal(snapshots[0].values, initial.values)
    expected = gaussian_field(small_grid, L0, k0, MASS, t=5.0).values
    assert l2_distance(expected, snapshots[-1].values, small_grid) < 1e-4


def test_evolve_rejects_past_checkpoints(small_grid, free, k0):
    later = gaussian_field(small_grid, L0, k0, MASS, t=10.0)
    with pytest.raises(ValueError):
        evolve(later, free, [5.0])


@pytest.mark.slow
def test_oracle_agrees_with_spectral_synthesis(barrier, packet):
    x = oracle_grid((-250.0, 1000.0), 0.025)
    initial = GridField(x=x, values=packet.to_x(x), t=0.0)
    snapshot, = evolve(initial, barrier, [450.0])
    sub = snapshot.restricted(-200.0, 950.0, stride=4)
    synthesized = Synthesizer(barrier, packet).fields(sub.x, [450.0], [Channel.FULL])[Channel.FULL][0]
    assert l2_distance(synthesized, sub.values, sub.x) < 1e-3
