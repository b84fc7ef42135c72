import numpy as np
import pytest

from qsplit.apps.potential.analyzers import validate
from qsplit.apps.potential.models import PotentialSpec, UnitSystem
from qsplit.core.exceptions import NonPositiveK, StepTooLarge
from .analyzers import (
    lambda_prime_fd, odd_root_sign, params_derivatives, params_table, rect_transmission_phase, transfer_matrix,
    tunneling_params,
)


def rect_transmission(k, v0, d, mass):
    """Textbook T(E) of a rectangular barrier below its top"""
    energy = UnitSystem.energy(k, mass)
    kappa = np.sqrt(v0 / UnitSystem.hbar2_2m(mass) - k * k)
    return 1.0 / (1.0 + v0 ** 2 * np.sinh(kappa * d) ** 2 / (4.0 * energy * (v0 - energy)))


def test_transfer_matrix_structure(barrier, stepped):
    k = np.linspace(0.2, 1.2, 25)
    for pot in (barrier, stepped):
        Y = transfer_matrix(pot, k)
        np.testing.assert_allclose(np.linalg.det(Y), 1.0, atol=1e-10)
        np.testing.assert_allclose(Y[:, 1, 0], np.conj(Y[:, 0, 1]), atol=1e-10)
        np.testing.assert_allclose(Y[:, 1, 1], np.conj(Y[:, 0, 0]), atol=1e-10)


def test_unitarity(barrier, well, stepped, double_barrier):
    k = np.linspace(0.05, 1.5, 200)
    for pot in (barrier, well, stepped, double_barrier):
        params = tunneling_params(pot, k)
        np.testing.assert_allclose(params.T + params.R, 1.0, atol=1e-10)


def test_rectangular_barrier_transmission(barrier):
    k = np.linspace(0.2, 0.7, 11)
    params = tunneling_params(barrier, k)
    np.testing.assert_allclose(params.T, rect_transmission(k, 0.3, 5.0, barrier.mass), rtol=1e-9)


def test_free_potential_is_transparent(free):
    k = np.array([0.3, 0.6, 0.9])
    params = tunneling_params(free, k)
    np.testing.assert_allclose(params.T, 1.0, atol=1e-12)
    np.testing.assert_allclose(params.R, 0.0, atol=1e-24)
    # J - kd is the transmitted phase, zero without a barrier
    np.testing.assert_allclose(np.exp(1j * params.J), np.exp(1j * k * free.d), rtol=1e-12)


def test_delta_transmission(delta):
    k = np.array([0.2, 0.5, 1.0])
    g = UnitSystem.delta_coupling(0.1, delta.mass)
    params = tunneling_params(delta, k)
    np.testing.assert_allclose(params.T, 4 * k * k / (4 * k * k + g * g), rtol=1e-12)


def test_q_and_p_reconstruct_from_real_parameters(barrier, double_barrier):
    k = np.linspace(0.3, 1.1, 9)
    for pot in (barrier, double_barrier):
        params = tunneling_params(pot, k)
        np.testing.assert_allclose(params.reconstruct_q(pot.d), params.q, rtol=1e-10)
        np.testing.assert_allclose(params.reconstruct_p(pot.s), params.p, rtol=1e-8)


def test_delta_derivatives_agree_with_finite_differences(delta):
    k = np.linspace(0.3, 1.0, 8)
    table = params_table(delta, k)
    dT, dJ, dF = params_derivatives(delta, k)
    np.testing.assert_allclose(table.dJ, dJ, rtol=1e-7)
    np.testing.assert_allclose(table.dT, dT, rtol=1e-7, atol=1e-12)
    np.testing.assert_allclose(dF, 0.0, atol=1e-7)


def test_transmission_derivative_against_analytic_curve(barrier):
    k = np.linspace(0.3, 0.65, 8)
    dT, _, _ = params_derivatives(barrier, k)
    h = 1e-6
    expected = (rect_transmission(k + h, 0.3, 5.0, barrier.mass)
                - rect_transmission(k - h, 0.3, 5.0, barrier.mass)) / (2 * h)
    np.testing.assert_allclose(dT, expected, rtol=1e-5)


def test_lambda_prime_matches_finite_difference(barrier, well):
    k = np.linspace(0.3, 0.7, 15)
    for pot in (barrier, well):
        table = params_table(pot, k)
        np.testing.assert_allclose(table.dLam, lambda_prime_fd(pot, k), rtol=1e-6, atol=1e-8)


def test_params_table_fields(barrier, stepped):
    k = np.linspace(0.2, 1.2, 300)
    table = params_table(barrier, k)
    assert len(table) == 300
    assert table.symmetric
    assert set(np.unique(table.sign)) <= {-1.0, 1.0}
    np.testing.assert_array_equal(table.sign, odd_root_sign(table.F))
    np.testing.assert_allclose(np.abs(table.Lam), np.arctan2(np.sqrt(table.T), np.sqrt(table.R)))
    assert np.max(np.abs(np.diff(table.J))) < 0.5 * np.pi
    # F only takes the values 0 and pi for a symmetric barrier
    np.testing.assert_allclose(np.sin(table.F), 0.0, atol=1e-9)

    frame = table.to_frame()
    assert list(frame.columns[:5]) == ['k', 'T', 'R', 'J', 'F']
    assert 'dLambda' in frame

    asym = params_table(stepped, k)
    assert asym.dLam is None
    assert 'dLambda' not in asym.to_frame()


def test_rejects_non_positive_k(barrier):
    with pytest.raises(NonPositiveK):
        tunneling_params(barrier, np.array([0.0, 0.5]))


def test_step_too_large(barrier):
    with pytest.raises(StepTooLarge):
        params_derivatives(barrier, np.array([0.01]), h=0.01)


def stack(a, layers, mass=0.067):
    width = sum(w for w, _ in layers)
    return validate(PotentialSpec(a=a, b=a + width, mass=mass, segments=list(layers)))


def test_transfer_matrices_compose_over_adjacent_stacks(rng):
    k = np.linspace(0.1, 1.5, 40)
    for _ in range(20):
        layers = [(rng.uniform(1.0, 5.0), rng.uniform(-0.4, 0.4)) for _ in range(3)]
        a = rng.uniform(50.0, 500.0)
        edges = a + np.concatenate([[0.0], np.cumsum([w for w, _ in layers])])
        Y = transfer_matrix(stack(a, layers), k)
        parts = [transfer_matrix(stack(x, [layer]), k) for x, layer in zip(edges, layers)]
        scale = np.max(np.abs(Y))
        np.testing.assert_allclose(Y, parts[0] @ parts[1] @ parts[2], rtol=1e-8, atol=1e-10 * scale)
        np.testing.assert_allclose(Y, transfer_matrix(stack(a, layers[:2]), k) @ parts[2],
                                   rtol=1e-8, atol=1e-10 * scale)


def test_high_energy_reflection_envelope(barrier):
    v0 = 0.3
    kappa0 = np.sqrt(v0 / UnitSystem.hbar2_2m(barrier.mass))
    peaks = []
    for lo in 10.0 * kappa0 * 2.0 ** np.arange(4):
        k = np.linspace(lo, 2.0 * lo, 4000)
        params = tunneling_params(barrier, k)
        energy = UnitSystem.energy(k, barrier.mass)
        # 1 - T = R touches zero on every resonance, only its envelope decays
        assert np.all(params.R <= v0 ** 2 / (4.0 * energy * (energy - v0)) * (1.0 + 1e-9))
        peaks.append(np.max(params.R))
    assert np.all(np.diff(peaks) < 0.0)
    far = tunneling_params(barrier, np.array([100.0 * kappa0]))
    assert 1.0 - far.T[0] < 1e-6


def test_rect_phase_matches_the_transfer_matrix(barrier, well, free):
    k = np.linspace(0.05, 1.5, 300)
    for pot in (barrier, well, free):
        seg = pot.segments[0]
        params = tunneling_params(pot, k)
        expected = rect_transmission_phase(seg.v0, seg.width, pot.mass, k)
        np.testing.assert_allclose(np.exp(1j * params.J), np.exp(1j * expected), atol=1e-9)


def test_params_table_uses_the_continuous_rect_phase(barrier, well, free):
    k = np.linspace(0.05, 1.5, 600)
    for pot in (barrier, well):
        seg = pot.segments[0]
        table = params_table(pot, k)
        np.testing.assert_allclose(table.J, rect_transmission_phase(seg.v0, seg.width, pot.mass, k), atol=1e-9)
    np.testing.assert_allclose(params_table(free, k).J, k * free.d, atol=1e-9)


def test_rect_phase_is_continuous_at_the_barrier_top():
    v0, d, mass = 0.3, 5.0, 0.067
    k_top = np.sqrt(v0 / UnitSystem.hbar2_2m(mass))
    J = rect_transmission_phase(v0, d, mass, k_top * np.array([1 - 1e-9, 1.0, 1 + 1e-9]))
    np.testing.assert_allclose(J, np.arctan(k_top * d / 2.0), atol=1e-6)
