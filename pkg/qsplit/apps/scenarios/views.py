"""
Command handlers
Each handler takes a ScenarioContext, the output directory and the parsed
options, writes its files and returns a result dict.
"""
import json
import logging
import time
from pathlib import Path
from typing import Dict, List

import numpy as np
import pandas as pd

from qsplit.apps.observables.analyzers import l2_distance, moments_x, weighted_mean
from qsplit.apps.oracle.analyzers import evolve as oracle_evolve
from qsplit.apps.oracle.analyzers import oracle_grid, split_by_region
from qsplit.apps.oracle.models import GridField
from qsplit.apps.potential.models import UnitSystem
from qsplit.apps.spectral.models import PacketChannel
from qsplit.apps.stationary.analyzers import (
    amplitude_sets, full_state, matching_mu, smatrix_eigensolutions, split_states,
)
from qsplit.apps.stationary.models import Channel
from qsplit.apps.timing.analyzers import closed_form_deff_xstart, scan_trajectories, timing_report
from qsplit.apps.transfer_matrix.analyzers import tunneling_params
from qsplit.core import settings
from qsplit.core.exceptions import NonPositiveK, ZeroNorm, ZeroWeight
from .models import ScenarioContext
from .validation import run_suite

logger = logging.getLogger(__name__)

CHANNELS = (Channel.FULL, Channel.TR, Channel.REF)
MOMENT_STEP = 10.0   # fs between CM samples in the moments trajectory export


def write_csv(frame: pd.DataFrame, path: Path) -> Path:
    frame.to_csv(path, index=False, float_format=settings.CSV_FLOAT_FORMAT)
    logger.info(f"Wrote {path}")
    return path


def write_json(payload: dict, path: Path) -> Path:
    payload = {'schema_version': settings.SCHEMA_VERSION, **payload}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + '\n')
    logger.info(f"Wrote {path}")
    return path


def _json_default(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"cannot serialise {type(value).__name__}")


def _ps_label(t_fs: float) -> str:
    return f"{t_fs / 1000.0:g}ps"


def _channels(context: ScenarioContext):
    return CHANNELS if context.pot.symmetric else (Channel.FULL,)


def params_view(context: ScenarioContext, out: Path, options) -> Dict:
    """Tunneling parameters over the scenario k-grid"""
    frame = context.table.to_frame()
    path = write_csv(frame, out / 'params.csv')
    return {'success': True, 'outputs': [str(path)], 'points': len(frame)}


def stationary_view(context: ScenarioContext, out: Path, options) -> Dict:
    """Stationary channel states at --k, the packet's central wavenumber by default"""
    pot = context.pot
    k = getattr(options, 'k', None)
    k = context.k0 if k is None else float(k)
    if k <= 0:
        raise NonPositiveK(f"--k must be positive, got {k}")
    params = tunneling_params(pot, np.array([k]))
    x = context.x
    if pot.symmetric:
        states = dict(zip(CHANNELS, split_states(params, pot)))
    else:
        states = {Channel.FULL: full_state(params, pot)}
    outputs = []
    for channel, state in states.items():
        psi = state.values(x)[:, 0]
        frame = pd.DataFrame({
            'x': x, 're': psi.real, 'im': psi.imag,
            'density': np.abs(psi) ** 2, 'current': state.current(x)[:, 0],
        })
        outputs.append(write_csv(frame, out / f'stationary_{channel.value}.csv'))

    summary = {
        'k_inm': k,
        'k0_inm': context.k0,
        'T': float(params.T[0]), 'R': float(params.R[0]),
        'J': float(params.J[0]), 'F': float(params.F[0]),
        'amplitude_residuals': {
            name: float(amps.transfer_residual(params.q, params.p)[0])
            for name, amps in amplitude_sets(params).items()
        },
    }
    if pot.symmetric:
        summary['lambda'] = float(states[Channel.REF].lam[0])
        if params.R[0] >= settings.R_DEGENERATE:
            eigen = smatrix_eigensolutions(params, int(matching_mu(params)[0]))
            summary['eigen_residual'] = float(eigen.residual[0])
    outputs.append(write_json(summary, out / 'stationary.json'))
    return {'success': True, 'outputs': [str(p) for p in outputs]}


def evolve_view(context: ScenarioContext, out: Path, options) -> Dict:
    """Channel densities per requested time"""
    x = context.region_x() if getattr(options, 'region', False) else context.x
    times = context.scenario.times
    channels = _channels(context)
    fields = context.synthesizer.fields(x, times, channels)
    prefix = 'region' if getattr(options, 'region', False) else 'evolve'
    outputs = []
    for i, t in enumerate(times):
        frame = pd.DataFrame({'x': x})
        for channel in channels:
            frame[channel.value] = np.abs(fields[channel][i]) ** 2
        outputs.append(str(write_csv(frame, out / f'{prefix}_t{_ps_label(t)}.csv')))
    return {'success': True, 'outputs': outputs}


def _asymptote_lines(context: ScenarioContext, times: np.ndarray) -> pd.DataFrame:
    """CM lines x = x0 + v t (out_ref: x0 - v t) of the in/out asymptote packets"""
    pot, table, packet = context.pot, context.table, context.packet
    hbar_over_m = UnitSystem.hbar_over_m(pot.mass)
    lines = {'t_fs': times}
    offsets = {
        ('T', PacketChannel.OUT_TR): lambda: pot.d - weighted_mean(table, 'T', 'dJ', packet),
        ('R', PacketChannel.OUT_REF): lambda: 2.0 * pot.a + weighted_mean(table, 'R', 'dJ-dF', packet),
    }
    if pot.symmetric:
        offsets[('T', PacketChannel.IN_TR)] = lambda: -weighted_mean(table, 'T', 'dLam', packet)
        offsets[('R', PacketChannel.IN_REF)] = lambda: -weighted_mean(table, 'R', 'dLam', packet)
    for (weight, which), offset in offsets.items():
        try:
            velocity = hbar_over_m * weighted_mean(table, weight, 'k', packet)
            lines[which.value] = offset() + which.direction * velocity * times
        except ZeroWeight:
            continue
    return pd.DataFrame(lines)


def moments_view(context: ScenarioContext, out: Path, options) -> Dict:
    """Channel moments at the requested times plus CM trajectories"""
    x = context.x
    times = context.scenario.times
    channels = _channels(context)
    fields = context.synthesizer.fields(x, times, channels)
    report = []
    for i, t in enumerate(times):
        entry = {'t_fs': t}
        for channel in channels:
            try:
                entry[channel.value] = moments_x(fields[channel][i], x, context.pot.mass).to_dict()
            except ZeroNorm as e:
                logger.warning(f"No moments for {channel.value} at t={t} fs: {e}")
                entry[channel.value] = None
        report.append(entry)
    outputs = [write_json({'scenario': context.scenario.name, 'moments': report}, out / 'moments.json')]

    window = context.scenario.timing.window
    timing_x = context.scenario.timing.x_grid.points
    if context.pot.symmetric:
        trajectories = scan_trajectories(context.synthesizer, window, timing_x, dt=MOMENT_STEP)
        frame = trajectories.to_frame()
        full = context.synthesizer.fields(timing_x, trajectories.times, [Channel.FULL])[Channel.FULL]
        frame['cm_full'] = [moments_x(psi, timing_x).mean_x for psi in full]
        asymptotes = _asymptote_lines(context, trajectories.times)
        frame = frame.merge(asymptotes, on='t_fs')
        outputs.append(write_csv(frame, out / 'cm_trajectories.csv'))
    return {'success': True, 'outputs': [str(p) for p in outputs]}


def times_view(context: ScenarioContext, out: Path, options) -> Dict:
    """Timing report for the scenario distances"""
    timing = context.scenario.timing
    start_time = time.time()
    report = timing_report(context.synthesizer, timing.L1, timing.L2, timing.window, timing.x_grid.points)
    payload = report.to_dict()
    payload['scenario'] = context.scenario.name
    path = write_json(payload, out / 'times.json')
    logger.info(f"Timing report in {time.time() - start_time:.2f} seconds")
    return {'success': True, 'outputs': [str(path)], 'exact_tr': report.exact_tr.value,
            'exact_ref': report.exact_ref.value}


def sweep_view(context: ScenarioContext, out: Path, options) -> Dict:
    """Effective width and starting point over the k-grid"""
    table = context.table
    frame = pd.DataFrame({'k': table.k})
    if table.dLam is not None:
        frame['d_eff_tr'] = table.dJ - table.dLam
        frame['d_eff_ref'] = table.dJ - table.dF - table.dLam
        frame['x_start'] = -table.dLam
    try:
        d_eff, x_start = closed_form_deff_xstart(context.pot, table.k)
        frame['d_eff_closed'] = d_eff
        frame['x_start_closed'] = x_start
    except ValueError:
        logger.info("No closed form for this potential; sweep lists transfer-matrix values only")
    path = write_csv(frame, out / 'sweep.csv')
    return {'success': True, 'outputs': [str(path)]}


def oracle_view(context: ScenarioContext, out: Path, options) -> Dict:
    """Crank-Nicolson densities at the requested times and their distance to the synthesis"""
    cfg = context.scenario.oracle
    packet = context.packet
    grid_x = oracle_grid(cfg.domain, cfg.dx)
    initial = GridField(x=grid_x, values=packet.to_x(grid_x), t=0.0)
    snapshots = oracle_evolve(initial, context.pot, context.scenario.times, cfg.dt)

    x = context.x
    fields = context.synthesizer.fields(x, context.scenario.times, [Channel.FULL])[Channel.FULL]
    outputs = []
    summary = []
    for i, snapshot in enumerate(snapshots):
        values = np.interp(x, grid_x, snapshot.values.real) + 1j * np.interp(x, grid_x, snapshot.values.imag)
        frame = pd.DataFrame({'x': x, Channel.FULL.value: np.abs(values) ** 2})
        outputs.append(str(write_csv(frame, out / f'oracle_t{_ps_label(snapshot.t)}.csv')))
        left, right = split_by_region(snapshot, context.pot.b)
        summary.append({
            't_fs': snapshot.t,
            'norm2': snapshot.norm2,
            'left_of_b': left,
            'right_of_b': right,
            'l2_distance': l2_distance(fields[i], values, x),
        })
    outputs.append(str(write_json({'scenario': context.scenario.name, 'checkpoints': summary},
                                  out / 'oracle.json')))
    return {'success': True, 'outputs': outputs, 'checkpoints': summary}


def validate_view(context: ScenarioContext, out: Path, options) -> Dict:
    """Full invariant suite with a pass/fail table"""
    results = run_suite(context, include_oracle=not getattr(options, 'skip_oracle', False))
    frame = pd.DataFrame([r.as_row() for r in results])
    write_csv(frame, out / 'validate.csv')
    table = format_table(results)
    print(table)
    failed = [r.name for r in results if not r.passed]
    return {'success': not failed, 'outputs': [str(out / 'validate.csv')], 'failed': failed}


def format_table(results: List) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{'check':<{width}}  status  value        limit"]
    for r in results:
        mark = '✅' if r.passed else '❌'
        lines.append(f"{r.name:<{width}}  {mark}      {r.value:<11.3g}  {r.limit:.3g}")
    return '\n'.join(lines)
