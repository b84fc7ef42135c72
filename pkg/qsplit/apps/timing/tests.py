import json
from dataclasses import replace

import numpy as np
import pytest

from qsplit.apps.observables.analyzers import fit_line
from qsplit.apps.potential.analyzers import validate
from qsplit.apps.potential.models import PotentialSpec, UnitSystem
from qsplit.apps.spectral.analyzers import Synthesizer, gaussian_spectrum
from qsplit.apps.spectral.models import KGrid
from qsplit.apps.transfer_matrix.analyzers import params_table, tunneling_params
from qsplit.core.exceptions import AsymmetricPotential, NoRoot, WindowTooShort
from .analyzers import (
    asymptotic_times, closed_form_deff_xstart, cm_evaluator, delta_deff_xstart, exact_times, momentum_shifts,
    rect_deff_xstart, scan_trajectories, swpa_times, times_from_trajectories, timing_report,
)
from .models import CMTrajectories, TimeStatus


def random_barriers(rng, count, sign=1.0):
    """(potential, k) pairs, k below the barrier top for barriers"""
    for _ in range(count):
        v0 = sign * rng.uniform(0.05, 0.5)
        d = rng.uniform(1.0, 10.0)
        mass = rng.uniform(0.05, 0.2)
        pot = validate(PotentialSpec(a=100.0, b=100.0 + d, mass=mass, segments=[(d, v0)]))
        k_top = np.sqrt(abs(v0) / UnitSystem.hbar2_2m(mass))
        yield pot, np.array([rng.uniform(0.1, 0.95) * k_top])


def test_closed_forms_below_the_barrier(rng):
    for pot, k in random_barriers(rng, 50):
        table = params_table(pot, k)
        d_eff, x_start = rect_deff_xstart(pot.segments[0].v0, pot.d, pot.mass, k)
        np.testing.assert_allclose(d_eff, table.dJ - table.dLam, rtol=1e-6)
        np.testing.assert_allclose(x_start, -table.dLam, rtol=1e-6)


def test_closed_forms_over_a_well(rng):
    checked = 0
    for pot, k in random_barriers(rng, 50, sign=-1.0):
        k = 2.0 * k
        if tunneling_params(pot, k).R[0] < 1e-8:
            # Lambda' is 0/0 on a transmission resonance
            continue
        table = params_table(pot, k)
        d_eff, x_start = rect_deff_xstart(pot.segments[0].v0, pot.d, pot.mass, k)
        np.testing.assert_allclose(d_eff, table.dJ - table.dLam, rtol=1e-6, atol=1e-9 * pot.d)
        np.testing.assert_allclose(x_start, -table.dLam, rtol=1e-6, atol=1e-9 * pot.d)
        checked += 1
    assert checked > 40


def test_closed_forms_are_finite_at_the_barrier_top():
    v0, d, mass = 0.3, 5.0, 0.067
    k_top = np.sqrt(v0 / UnitSystem.hbar2_2m(mass))
    k = k_top * np.array([1 - 1e-9, 1.0, 1 + 1e-9])
    d_eff, x_start = rect_deff_xstart(v0, d, mass, k)
    assert np.all(np.isfinite(d_eff)) and np.all(np.isfinite(x_start))
    np.testing.assert_allclose(d_eff, d_eff[1], rtol=1e-6)
    np.testing.assert_allclose(x_start, x_start[1], rtol=1e-6)


def test_opaque_barrier_width():
    v0, mass, k = 0.3, 0.067, 0.3
    kappa = np.sqrt(v0 / UnitSystem.hbar2_2m(mass) - k * k)
    d = 15.0 / kappa
    d_eff, _ = rect_deff_xstart(v0, d, mass, k)
    assert d_eff[0] == pytest.approx(2.0 / kappa, rel=0.01)


def test_high_energy_width_tends_to_geometric_width():
    v0, d, mass = 0.3, 5.0, 0.067
    kappa0 = np.sqrt(v0 / UnitSystem.hbar2_2m(mass))
    k = np.linspace(10.0, 100.0, 500) * kappa0
    d_eff, _ = rect_deff_xstart(v0, d, mass, k)
    assert np.all(np.abs(d_eff - d) < 2.0 * d * kappa0 ** 2 / k ** 2)
    assert abs(d_eff[-1] - d) < 1e-3 * d


def test_delta_closed_forms(delta):
    k = np.linspace(0.2, 1.2, 30)
    table = params_table(delta, k)
    d_eff, x_start = closed_form_deff_xstart(delta, k)
    np.testing.assert_array_equal(d_eff, 0.0)
    np.testing.assert_array_equal(table.dJ - table.dLam, 0.0)
    np.testing.assert_allclose(x_start, -table.dLam, rtol=1e-12)
    g = UnitSystem.delta_coupling(0.1, delta.mass)
    np.testing.assert_allclose(x_start, -2 * g / (4 * k * k + g * g))


def test_narrow_barrier_approaches_delta():
    w, mass, k = 0.1, 0.067, np.array([0.4, 0.7])
    d = 1e-4
    _, x_rect = rect_deff_xstart(w / d, d, mass, k)
    _, x_delta = delta_deff_xstart(w, mass, k)
    np.testing.assert_allclose(x_rect, x_delta, rtol=1e-3)


def test_closed_forms_need_a_simple_potential(double_barrier):
    with pytest.raises(ValueError):
        closed_form_deff_xstart(double_barrier, np.array([0.5]))


def test_momentum_shift_identity(barrier, well, packet):
    for pot in (barrier, well):
        table = params_table(pot, packet.k)
        shifts = momentum_shifts(table, packet, pot)
        assert abs(shifts.identity_residual) < 1e-8
        assert shifts.predicted_dk_tr == pytest.approx(shifts.dk_tr, rel=1e-6)
        assert shifts.T_in + shifts.R_in == pytest.approx(1.0, abs=1e-10)


def test_momentum_shift_identity_fails_without_unitarity(barrier, packet):
    table = params_table(barrier, packet.k)
    shifts = momentum_shifts(replace(table, R=0.9 * table.R), packet, barrier)
    assert abs(shifts.identity_residual) > 1e-6


def test_well_width_is_negative_at_low_energy():
    v0, d, mass = -0.3, 5.0, 0.067
    kappa0 = np.sqrt(-v0 / UnitSystem.hbar2_2m(mass))
    assert np.sin(kappa0 * d) < 0.0
    d_eff, _ = rect_deff_xstart(v0, d, mass, np.array([1e-3]))
    assert d_eff[0] < 0.0


def test_width_excess_envelope_decays_at_high_energy():
    v0, d, mass = 0.3, 5.0, 0.067
    kappa0 = np.sqrt(v0 / UnitSystem.hbar2_2m(mass))
    peaks = []
    for lo in 10.0 * kappa0 * 2.0 ** np.arange(4):
        d_eff, _ = rect_deff_xstart(v0, d, mass, np.linspace(lo, 2.0 * lo, 4000))
        peaks.append(np.max(np.abs(d_eff - d)))
    assert np.all(np.diff(peaks) < 0.0)


def test_swpa_position_term_vanishes_for_long_packets(barrier, k0):
    terms = []
    for l0 in (7.5, 30.0, 120.0):
        packet = gaussian_spectrum(l0, k0, KGrid.around(k0, l0, n=1024), barrier.mass)
        table = params_table(barrier, packet.k)
        a = 500.0 * l0 / 7.5
        at_a = swpa_times(table, packet, barrier, 0.0, 0.0, a=a).tr
        terms.append(abs(at_a - swpa_times(table, packet, barrier, 0.0, 0.0, a=0.0).tr))
    assert terms[0] > terms[1] > terms[2]
    # shift of <k>_T goes as 1/l0^2 while a grows as l0
    assert 0.15 < terms[2] / terms[1] < 0.35


def test_swpa_times_grow_linearly_with_a(barrier, packet):
    table = params_table(barrier, packet.k)
    positions = np.linspace(100.0, 1000.0, 10)
    times = [swpa_times(table, packet, barrier, 0.0, 0.0, a=a) for a in positions]
    line = fit_line(positions, [t.tr for t in times])
    assert line.r2 > 0.9999
    expected = (1.0 / times[0].k_tr - 1.0 / times[0].k0) / UnitSystem.hbar_over_m(barrier.mass)
    assert line.slope == pytest.approx(expected, rel=1e-9)
    ref_line = fit_line(positions, [t.ref for t in times])
    assert ref_line.slope > 0.0


def test_asymptotic_times_of_a_transparent_region(free, packet, k0):
    table = params_table(free, packet.k)
    asym = asymptotic_times(table, packet, free)
    velocity = UnitSystem.hbar_over_m(free.mass) * k0
    assert asym.d_eff_tr == pytest.approx(free.d, rel=1e-9)
    assert asym.x_start_tr == 0.0
    assert asym.tau_tr == pytest.approx(free.d / velocity, rel=1e-9)
    assert asym.tau_ref is None and asym.d_eff_ref is None
    tr, ref = asym.predicted(10.0, 20.0, UnitSystem.hbar_over_m(free.mass))
    assert tr == pytest.approx((free.d + 30.0) / velocity, rel=1e-9)
    assert ref is None


def test_asymptotic_times_of_a_delta(delta, packet):
    asym = asymptotic_times(params_table(delta, packet.k), packet, delta)
    assert asym.d_eff_tr == pytest.approx(0.0, abs=1e-12)
    assert asym.tau_tr == pytest.approx(0.0, abs=1e-12)
    assert asym.x_start_tr < 0.0


def test_asymptotic_times_need_symmetry(stepped, packet):
    with pytest.raises(AsymmetricPotential):
        asymptotic_times(params_table(stepped, packet.k), packet, stepped)


def straight(times, x0, velocity):
    return x0 + velocity * times


def test_times_from_straight_trajectories(barrier):
    times = np.arange(0.0, 101.0)
    ref = 510.0 - 2.0 * np.abs(times - 50.0)
    trajectories = CMTrajectories(times=times, tr=straight(times, 400.0, 2.0), ref=ref)
    exact_tr, exact_ref = times_from_trajectories(trajectories, barrier, 0.0, 0.0)
    assert exact_tr.status == TimeStatus.OK
    assert exact_tr.value == pytest.approx(2.5, abs=0.02)
    assert exact_tr.roots == pytest.approx((50.0, 52.5), abs=0.01)
    assert exact_ref.value == pytest.approx(10.0, abs=0.05)

    exact_tr, exact_ref = times_from_trajectories(trajectories, barrier, 10.0, 20.0)
    assert exact_tr.value == pytest.approx(17.5, abs=0.02)
    assert exact_ref.value == pytest.approx(20.0, abs=0.05)


def test_missing_roots_and_empty_channels(barrier):
    times = np.arange(0.0, 101.0)
    trajectories = CMTrajectories(times=times, tr=straight(times, 300.0, 1.0), ref=None)
    exact_tr, exact_ref = times_from_trajectories(trajectories, barrier, 0.0, 0.0)
    assert exact_tr.status == TimeStatus.NO_ROOT
    assert exact_tr.value is None
    with pytest.raises(NoRoot):
        exact_tr.require()
    assert 'empty' in exact_ref.reason
    assert exact_tr.to_dict()['status'] == 'no_root'


def test_window_too_short(barrier):
    times = np.arange(0.0, 101.0)
    late_start = CMTrajectories(times=times, tr=straight(times, 600.0, 1.0), ref=None)
    with pytest.raises(WindowTooShort):
        times_from_trajectories(late_start, barrier, 0.0, 0.0)
    accelerating = CMTrajectories(times=times, tr=400.0 + 0.05 * times ** 2, ref=None)
    with pytest.raises(WindowTooShort):
        times_from_trajectories(accelerating, barrier, 0.0, 0.0)


def test_exact_times_need_symmetry(stepped, packet):
    with pytest.raises(AsymmetricPotential):
        scan_trajectories(Synthesizer(stepped, packet), (0.0, 100.0), np.linspace(-100.0, 700.0, 801))


@pytest.fixture(scope='module')
def barrier_trajectories(barrier_context):
    timing = barrier_context.scenario.timing
    return scan_trajectories(barrier_context.synthesizer, timing.window, timing.x_grid.points)


@pytest.mark.slow
def test_exact_times_are_non_negative(barrier_context, barrier_trajectories):
    for L in (0.0, 10.0, 20.0, 40.0):
        exact_tr, exact_ref = times_from_trajectories(barrier_trajectories, barrier_context.pot, L, L)
        assert exact_tr.require() >= 0.0
        if exact_ref.present:
            assert exact_ref.value >= 0.0
        if L <= 20.0:
            # the reflected CM turns around before reaching back to a - L
            assert exact_ref.status == TimeStatus.NO_ROOT
            assert 'ref CM crosses' in exact_ref.reason
    _, exact_ref = times_from_trajectories(barrier_trajectories, barrier_context.pot, 40.0, 40.0)
    assert exact_ref.require() >= 0.0


@pytest.mark.slow
def test_transmission_discrepancy_shrinks_with_distance(barrier_context, barrier_trajectories):
    pot, packet, table = barrier_context.pot, barrier_context.packet, barrier_context.table
    asym = asymptotic_times(table, packet, pot)
    hbar_over_m = UnitSystem.hbar_over_m(pot.mass)
    gaps = []
    for L in (40.0, 80.0, 150.0):
        exact_tr, _ = times_from_trajectories(barrier_trajectories, pot, L, L)
        predicted_tr, _ = asym.predicted(L, L, hbar_over_m)
        gaps.append(abs(exact_tr.require() - predicted_tr))
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 2.0


@pytest.mark.slow
def test_exact_times_approach_asymptotic_predictions(barrier_context, barrier_trajectories):
    timing = barrier_context.scenario.timing
    report = timing_report(barrier_context.synthesizer, 150.0, 150.0, timing.window,
                           timing.x_grid.points, trajectories=barrier_trajectories)
    assert report.exact_tr.value == pytest.approx(report.predicted_tr, abs=2.0)
    assert report.exact_ref.value == pytest.approx(report.predicted_ref, abs=2.0)

    payload = json.loads(json.dumps(report.to_dict()))
    assert payload['exact_tr']['status'] == 'ok'
    assert payload['L1_nm'] == 150.0
    assert abs(payload['momentum_shifts']['identity_residual']) < 1e-8


@pytest.mark.slow
def test_exact_times_scan_matches_cached_trajectories(barrier_context, barrier_trajectories):
    timing = barrier_context.scenario.timing
    synthesizer, x = barrier_context.synthesizer, timing.x_grid.points
    exact_tr, exact_ref = exact_times(synthesizer, 40.0, 40.0, timing.window, x)
    cached_tr, cached_ref = times_from_trajectories(barrier_trajectories, barrier_context.pot, 40.0, 40.0,
                                                    cm_evaluator(synthesizer, x))
    assert exact_tr.value == pytest.approx(cached_tr.value)
    assert exact_ref.value == pytest.approx(cached_ref.value)
    # bisection on the synthesized CM against bisection on the sample spline
    spline_tr, spline_ref = times_from_trajectories(barrier_trajectories, barrier_context.pot, 40.0, 40.0)
    assert exact_tr.value == pytest.approx(spline_tr.value, abs=0.05)
    assert exact_ref.value == pytest.approx(spline_ref.value, abs=0.05)
