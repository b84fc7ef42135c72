"""
Serializers for scenario files
Scenario JSON uses ps for times and nm / eV / electron masses otherwise;
unknown keys are rejected at every level.
"""
import json
import logging
from pathlib import Path

from marshmallow import RAISE, Schema, ValidationError, fields, post_load, validate, validates_schema

from qsplit.apps.potential.analyzers import validate as validate_potential
from qsplit.apps.potential.models import PotentialSpec
from qsplit.core.exceptions import ScenarioError
from .models import OracleConfig, PacketConfig, Scenario, TimingConfig, XGridConfig

logger = logging.getLogger(__name__)

PS = 1000.0  # fs per ps


class StrictSchema(Schema):
    class Meta:
        unknown = RAISE


class SegmentSchema(StrictSchema):
    width_nm = fields.Float(required=True, validate=validate.Range(min=0, min_inclusive=False))
    v0_eV = fields.Float(required=True)


class DeltaSchema(StrictSchema):
    x_nm = fields.Float(required=True)
    w_eV_nm = fields.Float(required=True)


class PotentialSchema(StrictSchema):
    a_nm = fields.Float(load_default=None)
    b_nm = fields.Float(load_default=None)
    mass_me = fields.Float(required=True)
    segments = fields.List(fields.Nested(SegmentSchema), load_default=list)
    delta = fields.Nested(DeltaSchema, load_default=None, allow_none=True)

    @post_load
    def make_spec(self, data, **kwargs):
        delta = data['delta']
        return PotentialSpec(
            a=data['a_nm'], b=data['b_nm'], mass=data['mass_me'],
            segments=[(s['width_nm'], s['v0_eV']) for s in data['segments']],
            delta=(delta['x_nm'], delta['w_eV_nm']) if delta else None,
        )


class PacketSchema(StrictSchema):
    l0_nm = fields.Float(required=True, validate=validate.Range(min=0, min_inclusive=False))
    e0_eV = fields.Float(load_default=None, validate=validate.Range(min=0, min_inclusive=False))
    k0_inm = fields.Float(load_default=None, validate=validate.Range(min=0, min_inclusive=False))

    @validates_schema
    def validate_energy(self, data, **kwargs):
        if (data.get('e0_eV') is None) == (data.get('k0_inm') is None):
            raise ValidationError("give exactly one of e0_eV and k0_inm")

    @post_load
    def make_packet(self, data, **kwargs):
        return PacketConfig(l0=data['l0_nm'], e0=data['e0_eV'], k0=data['k0_inm'])


class XGridSchema(StrictSchema):
    min = fields.Float(required=True)
    max = fields.Float(required=True)
    step = fields.Float(required=True, validate=validate.Range(min=0, min_inclusive=False))

    @validates_schema
    def validate_order(self, data, **kwargs):
        if data['max'] <= data['min']:
            raise ValidationError("x-grid max must exceed min")

    @post_load
    def make_grid(self, data, **kwargs):
        return XGridConfig(**data)


class KGridSchema(StrictSchema):
    n = fields.Integer(load_default=None, validate=validate.Range(min=16))
    span_sigmas = fields.Float(load_default=None, validate=validate.Range(min=0, min_inclusive=False))


class GridsSchema(StrictSchema):
    k = fields.Nested(KGridSchema, load_default=dict)
    x = fields.Nested(XGridSchema, load_default=None)


def _window(value):
    return len(value) == 2 and value[1] > value[0]


class TimingSchema(StrictSchema):
    L1_nm = fields.Float(load_default=0.0, validate=validate.Range(min=0))
    L2_nm = fields.Float(load_default=0.0, validate=validate.Range(min=0))
    window_ps = fields.List(fields.Float(), load_default=None, validate=_window)
    x = fields.Nested(XGridSchema, load_default=None)

    @post_load
    def make_timing(self, data, **kwargs):
        defaults = TimingConfig()
        window = defaults.window
        if data['window_ps'] is not None:
            window = (data['window_ps'][0] * PS, data['window_ps'][1] * PS)
        return TimingConfig(L1=data['L1_nm'], L2=data['L2_nm'], window=window,
                            x_grid=data['x'] or defaults.x_grid)


class OracleSchema(StrictSchema):
    dx_nm = fields.Float(load_default=None, validate=validate.Range(min=0, min_inclusive=False))
    dt_fs = fields.Float(load_default=None, validate=validate.Range(min=0, min_inclusive=False))
    domain_nm = fields.List(fields.Float(), load_default=None, validate=_window)

    @post_load
    def make_oracle(self, data, **kwargs):
        defaults = OracleConfig()
        return OracleConfig(
            dx=data['dx_nm'] or defaults.dx,
            dt=data['dt_fs'] or defaults.dt,
            domain=tuple(data['domain_nm']) if data['domain_nm'] else defaults.domain,
        )


class ScenarioSchema(StrictSchema):
    name = fields.String(required=True)
    description = fields.String(load_default='')
    potential = fields.Nested(PotentialSchema, required=True)
    packet = fields.Nested(PacketSchema, required=True)
    grids = fields.Nested(GridsSchema, load_default=dict)
    times = fields.List(fields.Float(validate=validate.Range(min=0)), load_default=lambda: [0.0])
    timing = fields.Nested(TimingSchema, load_default=None)
    oracle = fields.Nested(OracleSchema, load_default=None)

    @post_load
    def make_scenario(self, data, **kwargs):
        grids = data['grids'] or {}
        k_grid = grids.get('k') or {}
        extra = {}
        if k_grid.get('n') is not None:
            extra['k_points'] = k_grid['n']
        if k_grid.get('span_sigmas') is not None:
            extra['span_sigmas'] = k_grid['span_sigmas']
        if grids.get('x') is not None:
            extra['x_grid'] = grids['x']
        if data['timing'] is not None:
            extra['timing'] = data['timing']
        if data['oracle'] is not None:
            extra['oracle'] = data['oracle']
        return Scenario(
            name=data['name'], description=data['description'],
            potential=data['potential'], packet=data['packet'],
            times=[t * PS for t in data['times']], **extra,
        )


def load_scenario(path) -> Scenario:
    """Read and validate a scenario file; any problem is a ScenarioError"""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as e:
        logger.error(f"Cannot read scenario {path}: {e}")
        raise ScenarioError(f"cannot read scenario {path}: {e}") from e
    return parse_scenario(raw)


def parse_scenario(raw: dict) -> Scenario:
    """Schema validation plus the potential geometry checks"""
    try:
        scenario = ScenarioSchema().load(raw)
    except ValidationError as e:
        logger.error(f"Invalid scenario: {e.messages}")
        raise ScenarioError(f"invalid scenario: {e.messages}") from e
    validate_potential(scenario.potential)
    return scenario
