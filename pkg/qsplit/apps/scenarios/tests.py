import copy
import json

import numpy as np
import pandas as pd
import pytest
from marshmallow import ValidationError

from qsplit.core import settings
from qsplit.core.exceptions import GapError, ScenarioError
from qsplit.core.urls import urlpatterns
from qsplit.manage import main, parse_times, resolve_scenario
from .models import ScenarioContext
from .serializers import load_scenario, parse_scenario
from .validation import CheckResult, interaction_window, norm_times, run_suite
from .views import format_table

MINIMAL = {
    'name': 'minimal',
    'potential': {'a_nm': 100.0, 'b_nm': 104.0, 'mass_me': 0.067, 'segments': [{'width_nm': 4.0, 'v0_eV': 0.2}]},
    'packet': {'l0_nm': 7.5, 'e0_eV': 0.25},
}


def variant(**changes):
    raw = copy.deepcopy(MINIMAL)
    for key, value in changes.items():
        section, _, field = key.partition('__')
        if field:
            raw[section][field] = value
        else:
            raw[section] = value
    return raw


def test_bundled_barrier_loads():
    scenario = load_scenario(settings.FIXTURES_DIR / 'barrier_fig1.json')
    assert scenario.name == 'barrier'
    assert scenario.times == pytest.approx([0.0, 400.0, 420.0])
    assert scenario.timing.window == pytest.approx((0.0, 900.0))
    assert scenario.k_points == 4096
    assert scenario.oracle.domain == (-400.0, 1200.0)
    context = ScenarioContext(scenario)
    assert context.pot.symmetric
    assert context.k0 == pytest.approx(0.663, abs=1e-3)


def test_bundled_well_loads():
    scenario = load_scenario(settings.FIXTURES_DIR / 'well_fig4.json')
    assert scenario.potential.segments[0][1] < 0.0


def test_defaults_fill_missing_sections():
    scenario = parse_scenario(MINIMAL)
    assert scenario.times == [0.0]
    assert scenario.k_points == settings.K_GRID_POINTS
    assert scenario.oracle.dx == settings.ORACLE_DX
    assert scenario.timing.L1 == 0.0
    assert scenario.description == ''


def test_packet_given_by_wavenumber():
    scenario = parse_scenario(variant(packet={'l0_nm': 7.5, 'k0_inm': 0.5}))
    assert ScenarioContext(scenario).k0 == 0.5


@pytest.mark.parametrize('raw', [
    variant(colour='blue'),
    variant(packet={'l0_nm': 7.5, 'e0_eV': 0.25, 'k0_inm': 0.66}),
    variant(packet={'l0_nm': 7.5}),
    variant(packet__l0_nm=-1.0),
    variant(potential__mass_me='heavy'),
    variant(timing={'window_ps': [0.9, 0.1]}),
    variant(times=[-0.1]),
], ids=['unknown-key', 'e0-and-k0', 'no-energy', 'negative-l0', 'bad-mass', 'reversed-window', 'negative-time'])
def test_invalid_scenarios(raw):
    with pytest.raises(ScenarioError) as excinfo:
        parse_scenario(raw)
    assert excinfo.value.exit_code == 2


def test_potential_geometry_is_checked():
    raw = variant(potential__b_nm=110.0)
    with pytest.raises(GapError):
        parse_scenario(raw)


def test_unreadable_scenario(tmp_path):
    broken = tmp_path / 'broken.json'
    broken.write_text('{"name": ')
    with pytest.raises(ScenarioError):
        load_scenario(broken)


def test_resolve_scenario(tmp_path):
    assert resolve_scenario('well') == settings.FIXTURES_DIR / 'well_fig4.json'
    assert resolve_scenario('barrier') == settings.FIXTURES_DIR / 'barrier_fig1.json'
    assert resolve_scenario('barrier_fig1') == settings.FIXTURES_DIR / 'barrier_fig1.json'
    assert resolve_scenario('well_fig4.json') == settings.FIXTURES_DIR / 'well_fig4.json'
    own = tmp_path / 'own.json'
    own.write_text(json.dumps(MINIMAL))
    assert resolve_scenario(str(own)) == own
    with pytest.raises(ScenarioError):
        resolve_scenario('no-such-scenario')


def test_parse_times():
    assert parse_times('0, 0.4,0.42') == pytest.approx([0.0, 400.0, 420.0])
    with pytest.raises(ScenarioError):
        parse_times('0,later')


def test_params_command(tmp_path, capsys):
    assert main(['params', '--scenario', 'barrier', '--out', str(tmp_path)]) == 0
    frame = pd.read_csv(tmp_path / 'params.csv')
    assert len(frame) == 4096
    assert list(frame.columns[:3]) == ['k', 'T', 'R']
    np.testing.assert_allclose(frame['T'] + frame['R'], 1.0, atol=1e-10)
    assert str(tmp_path / 'params.csv') in capsys.readouterr().out


def test_missing_scenario_exit_code(tmp_path, capsys):
    assert main(['params', '--scenario', str(tmp_path / 'absent.json'), '--out', str(tmp_path)]) == 2
    assert '❌' in capsys.readouterr().err


def test_invalid_geometry_exit_code(tmp_path):
    path = tmp_path / 'gap.json'
    path.write_text(json.dumps(variant(potential__b_nm=110.0)))
    assert main(['params', '--scenario', str(path), '--out', str(tmp_path)]) == 2


def test_evolve_command_with_times(tmp_path):
    path = tmp_path / 'small.json'
    path.write_text(json.dumps(variant(grids={'k': {'n': 512}})))
    assert main(['evolve', '--scenario', str(path), '--out', str(tmp_path), '--times', '0,0.05']) == 0
    frame = pd.read_csv(tmp_path / 'evolve_t0.05ps.csv')
    assert list(frame.columns) == ['x', 'full', 'tr', 'ref']
    np.testing.assert_array_equal(frame['ref'][frame['x'] >= 102.0], 0.0)
    assert (tmp_path / 'evolve_t0ps.csv').exists()


def test_stationary_command_at_given_k(tmp_path):
    path = tmp_path / 'small.json'
    path.write_text(json.dumps(variant(grids={'k': {'n': 512}})))
    assert main(['stationary', '--scenario', str(path), '--out', str(tmp_path), '--k', '0.5']) == 0
    for channel in ('full', 'tr', 'ref'):
        frame = pd.read_csv(tmp_path / f'stationary_{channel}.csv')
        assert list(frame.columns) == ['x', 're', 'im', 'density', 'current']
        np.testing.assert_allclose(frame['density'], frame['re'] ** 2 + frame['im'] ** 2, rtol=1e-12, atol=1e-15)
    ref = pd.read_csv(tmp_path / 'stationary_ref.csv')
    np.testing.assert_array_equal(ref['density'][ref['x'] >= 102.0], 0.0)
    summary = json.loads((tmp_path / 'stationary.json').read_text())
    assert summary['k_inm'] == 0.5
    assert summary['T'] + summary['R'] == pytest.approx(1.0, abs=1e-10)


def test_stationary_command_defaults_to_k0(tmp_path):
    path = tmp_path / 'small.json'
    path.write_text(json.dumps(variant(grids={'k': {'n': 512}})))
    assert main(['stationary', '--scenario', str(path), '--out', str(tmp_path)]) == 0
    summary = json.loads((tmp_path / 'stationary.json').read_text())
    assert summary['k_inm'] == summary['k0_inm']
    assert main(['stationary', '--scenario', str(path), '--out', str(tmp_path), '--k', '-0.5']) == 3


def test_numerical_value_errors_are_not_config_errors(tmp_path, monkeypatch):
    def broken(context, out, options):
        raise ValueError("array shapes do not match")

    monkeypatch.setitem(urlpatterns, 'params', broken)
    with pytest.raises(ValueError):
        main(['params', '--scenario', 'barrier', '--out', str(tmp_path)])


def test_schema_errors_map_to_config_exit_code(tmp_path, monkeypatch):
    def rejecting(context, out, options):
        raise ValidationError({'k0_inm': ['must be positive']})

    monkeypatch.setitem(urlpatterns, 'params', rejecting)
    assert main(['params', '--scenario', 'barrier', '--out', str(tmp_path)]) == 2


def test_threads_must_be_positive(tmp_path):
    with pytest.raises(SystemExit) as excinfo:
        main(['params', '--scenario', 'barrier', '--out', str(tmp_path), '--threads', '0'])
    assert excinfo.value.code == 2


def test_norm_times_bracket_the_interaction(barrier_context):
    t_first, t_last = interaction_window(barrier_context)
    assert t_first == pytest.approx(252.0, abs=5.0)
    assert t_last == pytest.approx(1194.0, abs=10.0)
    times, outside = norm_times(barrier_context)
    assert times.size == 7 and outside.sum() == 6
    arrival = times[~outside][0]
    assert t_first < arrival < t_last
    assert np.all((times[outside] <= t_first) | (times[outside] >= t_last))


def test_format_table():
    results = [CheckResult('T + R = 1', True, 1e-15, 1e-10),
               CheckResult('oracle L2 at 200 fs', False, 2e-3, 1e-3, 'detail')]
    table = format_table(results)
    lines = table.splitlines()
    assert len(lines) == 3
    assert '✅' in lines[1] and '❌' in lines[2]
    assert results[1].as_row()['passed'] is False


@pytest.mark.slow
def test_validation_suite_passes_without_oracle(barrier_context):
    results = run_suite(barrier_context, include_oracle=False)
    names = [r.name for r in results]
    assert len(names) == len(set(names))
    assert 'full = tr + ref' in names
    assert 'full norm = tr + ref + 2 Re<tr|ref>' in names
    assert 'tr/ref orthogonal outside the barrier' in names
    assert [r.name for r in results if not r.passed] == []
