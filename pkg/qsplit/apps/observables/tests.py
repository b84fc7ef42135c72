import numpy as np
import pytest

from qsplit.apps.oracle.analyzers import gaussian_field
from qsplit.apps.potential.models import UnitSystem
from qsplit.apps.stationary.models import Channel
from qsplit.apps.transfer_matrix.analyzers import params_table
from qsplit.core.exceptions import ZeroNorm, ZeroWeight
from .analyzers import cm_trajectory, fit_line, inner_product, l2_distance, moments_x, norm_split, weighted_mean

X = np.linspace(-200.0, 800.0, 4001)


def test_moments_of_a_gaussian(k0):
    x = np.linspace(-100.0, 100.0, 4001)
    field = gaussian_field(x, 7.5, k0, 0.067).values
    moments = moments_x(field, x, mass=0.067)
    assert moments.norm2 == pytest.approx(1.0, rel=1e-9)
    assert moments.mean_x == pytest.approx(0.0, abs=1e-9)
    assert moments.var_x == pytest.approx(7.5 ** 2, rel=1e-6)
    assert moments.std_x == pytest.approx(7.5, rel=1e-6)
    assert moments.mean_k == pytest.approx(k0, rel=1e-3)
    # flux at the centre is |psi|^2 hbar k / m
    centre = np.argmin(np.abs(x))
    expected = np.abs(field[centre]) ** 2 * UnitSystem.hbar_over_m(0.067) * k0
    assert moments.flux[centre] == pytest.approx(expected, rel=1e-3)
    assert set(moments.to_dict()) == {'norm2', 'mean_x', 'var_x', 'mean_k'}


def test_moments_of_an_empty_field():
    with pytest.raises(ZeroNorm):
        moments_x(np.zeros(100, dtype=complex), np.linspace(0, 1, 100))


def test_bundled_transmission_probabilities(barrier_context, well_context):
    T_in, R_in = norm_split(barrier_context.table, barrier_context.packet)
    assert T_in == pytest.approx(0.149, abs=0.002)
    assert T_in + R_in == pytest.approx(1.0, abs=1e-10)

    T_in, _ = norm_split(well_context.table, well_context.packet)
    assert T_in == pytest.approx(0.863, abs=0.005)


def test_weighted_means(barrier, packet, k0):
    table = params_table(barrier, packet.k)
    assert weighted_mean(table, None, 'k', packet) == pytest.approx(k0, rel=1e-10)

    w = packet.density * packet.grid.weights * table.T
    expected = np.sum(table.dJ * w) / np.sum(w)
    assert weighted_mean(table, 'T', 'dJ', packet) == pytest.approx(expected, rel=1e-12)
    # tunneling favours the fast components
    assert weighted_mean(table, 'T', 'k', packet) > k0 > weighted_mean(table, 'R', 'k', packet)
    explicit = weighted_mean(table, 'R', table.dJ - table.dF, packet)
    assert weighted_mean(table, 'R', 'dJ-dF', packet) == pytest.approx(explicit, rel=1e-12)


def test_weighted_mean_errors(free, stepped, packet):
    table = params_table(free, packet.k)
    with pytest.raises(ZeroWeight):
        weighted_mean(table, 'R', 'k', packet)
    with pytest.raises(ValueError):
        weighted_mean(table, 'T', 'velocity', packet)
    with pytest.raises(ValueError):
        weighted_mean(params_table(stepped, packet.k), 'T', 'dLam', packet)


def test_free_cm_moves_ballistically(free, packet, k0):
    times = [0.0, 100.0, 200.0, 300.0]
    trajectory = cm_trajectory(Channel.FULL, free, packet, times, X)
    assert trajectory.shape == (4, 2)
    velocity = UnitSystem.hbar_over_m(0.067) * k0
    np.testing.assert_allclose(trajectory[:, 1], velocity * np.array(times), atol=1e-4)

    line = fit_line(trajectory[:, 0], trajectory[:, 1])
    assert line.slope == pytest.approx(velocity, rel=1e-6)
    assert line.r2 == pytest.approx(1.0)
    assert line(150.0) == pytest.approx(150.0 * velocity, rel=1e-5)


def test_l2_distance_removes_global_phase(k0):
    x = np.linspace(-100.0, 100.0, 2001)
    field = gaussian_field(x, 7.5, k0, 0.067).values
    rotated = np.exp(0.7j) * field
    assert l2_distance(field, rotated, x) == pytest.approx(0.0, abs=1e-12)
    assert l2_distance(field, rotated, x, align_phase=False) == pytest.approx(abs(1 - np.exp(0.7j)), rel=1e-9)
    with pytest.raises(ZeroNorm):
        l2_distance(np.zeros_like(field), field, x)


def test_inner_product(k0):
    x = np.linspace(-100.0, 100.0, 2001)
    field = gaussian_field(x, 7.5, k0, 0.067).values
    assert inner_product(field, field, x).real == pytest.approx(1.0, rel=1e-9)
    assert inner_product(field, 2j * field, x) == pytest.approx(2j, rel=1e-9)
