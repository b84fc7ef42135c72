import numpy as np
import pytest

from qsplit.apps.observables.analyzers import norm_split
from qsplit.apps.oracle.analyzers import gaussian_field
from qsplit.apps.stationary.models import Channel
from qsplit.apps.transfer_matrix.analyzers import params_table
from qsplit.core.exceptions import AsymmetricPotential, GridTooCoarse, SpectrumLeaksNegativeK
from .analyzers import Synthesizer, asymptote, check_nyquist, gaussian_spectrum, synthesize
from .models import KGrid, PacketChannel

L0 = 7.5
X = np.linspace(-200.0, 800.0, 2001)


def test_grid_around_packet(k0):
    grid = KGrid.around(k0, L0, n=1024)
    assert grid.k[0] == pytest.approx(k0 - 9.0 / (2 * L0))
    assert grid.k[-1] == pytest.approx(k0 + 9.0 / (2 * L0))
    assert grid.dk == pytest.approx(np.diff(grid.k)[0])
    assert np.sum(grid.weights) == pytest.approx(grid.k_max - grid.k_min)


def test_grid_is_clipped_at_positive_k():
    grid = KGrid.around(0.1, L0, n=256)
    assert grid.k_min > 0.0


def test_gaussian_spectrum_is_normalised(packet, k0):
    assert packet.norm2 == pytest.approx(1.0, abs=1e-10)
    assert packet.mean_k == pytest.approx(k0, rel=1e-10)
    assert packet.channel == PacketChannel.IN_FULL


def test_spectrum_leaking_to_negative_k():
    grid = KGrid(1e-3, 1.0, 256)
    with pytest.raises(SpectrumLeaksNegativeK):
        gaussian_spectrum(1.0, 0.1, grid, 0.067)


def test_truncated_spectrum(k0):
    grid = KGrid(k0 - 0.1, k0 + 0.1, 512)
    with pytest.raises(GridTooCoarse):
        gaussian_spectrum(L0, k0, grid, 0.067)


def test_nyquist(coarse_grid):
    check_nyquist(coarse_grid, X)
    with pytest.raises(GridTooCoarse):
        check_nyquist(KGrid(coarse_grid.k_min, coarse_grid.k_max, 64), X)


@pytest.mark.parametrize('t', [0.0, 150.0, 400.0])
def test_free_evolution_matches_analytic_gaussian(packet, k0, t):
    expected = gaussian_field(X, L0, k0, 0.067, t=t).values
    np.testing.assert_allclose(packet.to_x(X, t), expected, atol=1e-7 * np.max(np.abs(expected)))
    np.testing.assert_allclose(packet.at(t).to_x(X), expected, atol=1e-7 * np.max(np.abs(expected)))


def test_transparent_potential_leaves_the_packet_free(free, packet, k0):
    fields = Synthesizer(free, packet).fields(X, [0.0, 300.0])
    for i, t in enumerate([0.0, 300.0]):
        expected = gaussian_field(X, L0, k0, 0.067, t=t).values
        np.testing.assert_allclose(fields[Channel.FULL][i], expected, atol=1e-7 * np.max(np.abs(expected)))
    np.testing.assert_array_equal(fields[Channel.REF], 0.0)


def test_decomposition_identity(barrier, packet):
    fields = Synthesizer(barrier, packet).fields(X, [0.0, 400.0, 420.0])
    full = fields[Channel.FULL]
    assert full.shape == (3, X.size)
    defect = np.max(np.abs(full - fields[Channel.TR] - fields[Channel.REF]))
    assert defect < 1e-6 * np.max(np.abs(full))


def test_synthesize_single_channel(barrier, packet):
    table = params_table(barrier, packet.k)
    tr = synthesize(packet, Channel.TR, barrier, 400.0, X, table)
    fields = Synthesizer(barrier, packet, table).fields(X, [400.0], [Channel.TR])
    np.testing.assert_allclose(tr, fields[Channel.TR][0])


def test_channels_need_symmetry(stepped, packet):
    synthesizer = Synthesizer(stepped, packet)
    assert synthesizer.fields(X, [0.0], [Channel.FULL])[Channel.FULL].shape == (1, X.size)
    with pytest.raises(AsymmetricPotential):
        synthesizer.fields(X, [0.0], [Channel.TR])


def test_mismatched_grids(barrier, packet, k0):
    other = params_table(barrier, KGrid.around(k0, L0, n=512).k)
    with pytest.raises(ValueError):
        Synthesizer(barrier, packet, other)


def test_asymptote_norms(barrier, packet):
    table = params_table(barrier, packet.k)
    T_in, R_in = norm_split(table, packet)
    norms = {which: asymptote(packet, which, table, barrier).norm2 for which in PacketChannel}
    assert norms[PacketChannel.IN_FULL] == pytest.approx(1.0, abs=1e-10)
    assert norms[PacketChannel.OUT_TR] == pytest.approx(T_in, rel=1e-9)
    assert norms[PacketChannel.IN_TR] == pytest.approx(T_in, rel=1e-9)
    assert norms[PacketChannel.OUT_REF] == pytest.approx(R_in, rel=1e-9)
    assert norms[PacketChannel.IN_REF] == pytest.approx(R_in, rel=1e-9)


def test_out_ref_moves_left(barrier, packet):
    table = params_table(barrier, packet.k)
    out_ref = asymptote(packet, PacketChannel.OUT_REF, table, barrier, t=800.0)
    assert out_ref.channel.direction == -1
    assert out_ref.t0 == 800.0
    x = np.linspace(-400.0, 1400.0, 3601)
    density = np.abs(out_ref.to_x(x)) ** 2
    # launched towards the barrier at 500 nm and reflected, it is back on the left
    assert x[np.argmax(density)] < 500.0


def test_in_asymptotes_need_symmetry(stepped, packet):
    table = params_table(stepped, packet.k)
    asymptote(packet, PacketChannel.OUT_TR, table, stepped)
    with pytest.raises(AsymmetricPotential):
        asymptote(packet, PacketChannel.IN_TR, table, stepped)


def test_asymptotes_start_from_the_incident_packet(barrier, packet):
    table = params_table(barrier, packet.k)
    out_tr = asymptote(packet, PacketChannel.OUT_TR, table, barrier)
    with pytest.raises(ValueError):
        asymptote(out_tr, PacketChannel.OUT_TR, table, barrier)
