import numpy as np
import pytest

from qsplit.apps.potential.analyzers import validate
from qsplit.apps.potential.models import PotentialSpec, UnitSystem
from qsplit.apps.transfer_matrix.analyzers import tunneling_params
from qsplit.core.exceptions import AsymmetricPotential, FullTransmission
from .analyzers import (
    amplitude_sets, full_state, lambda_roots, matching_mu, parity_residual, probe_odd_root, ref_state,
    select_odd_root, smatrix_eigensolutions, split_states, tr_state,
)
from .models import Channel, Region

K = np.linspace(0.25, 1.2, 40)


def probes(pot, n=64):
    return np.linspace(pot.a - 50.0, pot.b + 50.0, n)


@pytest.fixture(scope='module')
def barrier_params(barrier):
    return tunneling_params(barrier, K)


def test_full_state_is_continuous_with_constant_current(barrier, stepped):
    for pot in (barrier, stepped):
        params = tunneling_params(pot, K)
        state = full_state(params, pot)
        for edge in (pot.a, pot.b):
            left, right = state.limits(edge)
            np.testing.assert_allclose(left, right, rtol=1e-10, atol=1e-12)
        current = state.current(probes(pot))
        np.testing.assert_allclose(current, np.broadcast_to(state.flux, current.shape), rtol=1e-9)


def test_full_state_asymptotes(barrier, barrier_params):
    state = full_state(barrier_params, barrier)
    x = np.array([400.0, 650.0])
    psi = state.values(x)
    q, p = barrier_params.q, barrier_params.p
    np.testing.assert_allclose(psi[0], np.exp(1j * K * 400.0) + np.conj(p) / q * np.exp(-1j * K * 400.0))
    np.testing.assert_allclose(psi[1], np.exp(1j * K * 650.0) / q)


def test_lambda_roots(barrier_params):
    plus, minus = lambda_roots(barrier_params)
    T, R = barrier_params.T, barrier_params.R
    np.testing.assert_allclose(np.exp(1j * plus), np.sqrt(R) + 1j * np.sqrt(T))
    np.testing.assert_allclose(np.exp(1j * minus), np.sqrt(R) - 1j * np.sqrt(T))


def test_lambda_roots_reject_full_transmission(free):
    with pytest.raises(FullTransmission):
        lambda_roots(tunneling_params(free, K))


@pytest.mark.parametrize('name', ['barrier', 'well', 'delta', 'double_barrier'])
def test_odd_root_rule_agrees_with_parity_probe(name, request):
    pot = request.getfixturevalue(name)
    params = tunneling_params(pot, K)
    selected = select_odd_root(params, pot)
    np.testing.assert_array_equal(selected, probe_odd_root(params, pot))

    residual, tolerance = parity_residual(params, pot, selected)
    assert np.all(residual <= tolerance)
    wrong, _ = parity_residual(params, pot, -selected)
    assert np.all(wrong > tolerance)


def test_odd_root_rule_on_random_rectangles(rng):
    checked = 0
    for _ in range(200):
        v0 = rng.choice([-1.0, 1.0]) * rng.uniform(0.05, 0.5)
        d = rng.uniform(1.0, 10.0)
        pot = validate(PotentialSpec(a=200.0, b=200.0 + d, mass=0.067, segments=[(d, v0)]))
        params = tunneling_params(pot, np.array([rng.uniform(0.05, 1.5)]))
        if params.R[0] < 1e-6:
            continue
        np.testing.assert_array_equal(select_odd_root(params, pot), probe_odd_root(params, pot))
        checked += 1
    assert checked > 150


def test_odd_root_needs_symmetry(stepped):
    with pytest.raises(AsymmetricPotential):
        select_odd_root(tunneling_params(stepped, K), stepped)


@pytest.mark.parametrize('name', ['barrier', 'well', 'delta', 'double_barrier'])
def test_reflection_state_vanishes_beyond_midpoint(name, request):
    pot = request.getfixturevalue(name)
    params = tunneling_params(pot, K)
    ref = ref_state(params, pot)
    right = np.linspace(pot.x_mid, pot.b + 100.0, 50)
    assert np.all(ref.values(right) == 0.0)
    x = probes(pot)
    scale = np.max(np.abs(ref.values(x)))
    assert np.max(np.abs(ref.current(x))) < 1e-10 * max(scale, 1.0) ** 2
    np.testing.assert_array_equal(ref.flux, 0.0)


@pytest.mark.parametrize('name', ['barrier', 'well', 'double_barrier'])
def test_transmission_state_carries_the_full_flux(name, request):
    pot = request.getfixturevalue(name)
    params = tunneling_params(pot, K)
    tr = tr_state(params, pot)
    x = np.append(probes(pot), [pot.x_mid - 1e-9, pot.x_mid, pot.x_mid + 1e-9])
    current = tr.current(x)
    np.testing.assert_allclose(current, np.broadcast_to(tr.flux, current.shape), rtol=1e-9)
    np.testing.assert_allclose(tr.flux, full_state(params, pot).flux)


def test_channels_add_up_to_full_state(barrier, barrier_params):
    full, tr, ref = split_states(barrier_params, barrier)
    x = probes(barrier, 200)
    np.testing.assert_allclose(tr.values(x) + ref.values(x), full.values(x), rtol=1e-12, atol=1e-12)
    assert full.channel == Channel.FULL and tr.channel == Channel.TR and ref.channel == Channel.REF
    # the transmission state keeps the value at x_mid; only its slope has a kink
    left, right = tr.limits(barrier.x_mid)
    np.testing.assert_allclose(left, right, rtol=1e-10, atol=1e-12)


def test_rectangular_interior_matches_segment_propagation(barrier, well):
    for pot in (barrier, well):
        params = tunneling_params(pot, K)
        ref = ref_state(params, pot)
        edge = np.array([pot.a])
        outside = ref.regions[0]
        psi_a = outside.evaluate(edge, K)[0]
        dpsi_a = outside.evaluate(edge, K, derivative=True)[0]
        seg = pot.segments[0]
        kappa2 = UnitSystem.kappa2(K, seg.v0, pot.mass)
        propagated = Region(pot.a, pot.x_mid, 'segment', c1=psi_a, c2=dpsi_a, anchor=pot.a, kappa2=kappa2)
        x = np.linspace(pot.a, pot.x_mid, 30, endpoint=False)
        expected = propagated.evaluate(x, K)
        np.testing.assert_allclose(ref.values(x), expected, atol=1e-8 * np.max(np.abs(expected)))


def test_split_states_tolerate_full_transmission(free):
    params = tunneling_params(free, K)
    full, tr, ref = split_states(params, free)
    x = probes(free)
    assert np.all(ref.values(x) == 0.0)
    np.testing.assert_allclose(tr.values(x), full.values(x))


def test_amplitude_sets_satisfy_the_transfer_matrix(barrier_params):
    sets = amplitude_sets(barrier_params)
    assert set(sets) == {'problem', 'reflection', 'transmission'}
    q, p = barrier_params.q, barrier_params.p
    scale = np.maximum(1.0, np.abs(q) ** 2)
    for amps in sets.values():
        assert np.all(amps.transfer_residual(q, p) < 1e-12 * scale)
    np.testing.assert_allclose(sets['reflection'].a_out, 0.0)
    np.testing.assert_allclose(sets['transmission'].b_out, 0.0)
    combined = sets['reflection'].a_in + sets['transmission'].a_in
    np.testing.assert_allclose(combined, 1.0)
    np.testing.assert_allclose(sets['reflection'].b_in + sets['transmission'].b_in, 0.0, atol=1e-12)


def test_smatrix_eigenvectors(barrier, double_barrier):
    for pot in (barrier, double_barrier):
        params = tunneling_params(pot, K)
        for mu in (1, -1):
            eigen = smatrix_eigensolutions(params, mu)
            assert np.all(eigen.residual < 1e-12)
            np.testing.assert_allclose(np.abs(eigen.eigenvalue), 1.0, rtol=1e-12)
        assert set(np.unique(matching_mu(params))) <= {1, -1}


def test_smatrix_rejects_bad_mu(barrier_params):
    with pytest.raises(ValueError):
        smatrix_eigensolutions(barrier_params, 0)
