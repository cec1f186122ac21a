# Copyright 2026 UW-IT, University of Washington
# SPDX-License-Identifier: Apache-2.0

"""
Scenario file loading: schema validation, cross-reference checks and
resolution of randomized draws into an explicit, echoable scenario.
"""

from dp_consensus.exceptions import (
    ScenarioPolicyException, DimensionMismatchException)
from dp_consensus.graphs import make_topology, TOPOLOGY_KINDS
from dp_consensus.matops import as_matrix
from dp_consensus.noise import (
    NoiseSchedule, SCHEDULE_KINDS, STATE_STREAM, PARAMETER_STREAM,
    stream_generator)
from dp_consensus.plant import (
    LtiPlant, FullObserver, GainSet, canonicalize_output,
    reduced_form_from_blocks, block_deviation)
from dp_consensus.privacy import AdjacencySpec
from dp_consensus.sim import ScenarioConfig
from django.conf import settings
from rest_framework import serializers
from logging import getLogger
import numpy as np
import json
import math
import os

logger = getLogger(__name__)

BLOCK_TOLERANCE = 1e-10


class FiniteFloatField(serializers.FloatField):
    default_error_messages = {
        'non_finite': 'A finite number is required.',
    }

    def to_internal_value(self, data):
        value = super(FiniteFloatField, self).to_internal_value(data)
        if not math.isfinite(value):
            self.fail('non_finite')
        return value


class MatrixField(serializers.ListField):
    child = serializers.ListField(child=FiniteFloatField(), allow_empty=False)

    def to_internal_value(self, data):
        rows = super(MatrixField, self).to_internal_value(data)
        if len({len(row) for row in rows}) > 1:
            raise serializers.ValidationError('Matrix rows differ in length.')
        return rows


class InitialStateField(serializers.Field):
    default_error_messages = {
        'invalid': 'Expected {"box": half-width} or a matrix of states.',
    }

    def to_internal_value(self, data):
        if isinstance(data, dict):
            box = FiniteFloatField(min_value=0).run_validation(
                data.get('box'))
            return {'box': box}
        if isinstance(data, list):
            return MatrixField().run_validation(data)
        self.fail('invalid')

    def to_representation(self, value):
        return value


class GraphSerializer(serializers.Serializer):
    kind = serializers.ChoiceField(choices=TOPOLOGY_KINDS)
    N = serializers.IntegerField(min_value=2)
    offsets = serializers.ListField(
        child=serializers.IntegerField(min_value=1), required=False)
    edges = serializers.ListField(
        child=serializers.ListField(
            child=serializers.IntegerField(min_value=0),
            min_length=2, max_length=2), required=False)
    adjacency = MatrixField(required=False)

    def validate(self, data):
        if data['kind'] == 'circulant' and not data.get('offsets'):
            raise serializers.ValidationError(
                {'offsets': 'Circulant topology needs offsets.'})
        if data['kind'] == 'explicit' and not (
                'edges' in data or 'adjacency' in data):
            raise serializers.ValidationError(
                {'edges': 'Explicit topology needs edges or adjacency.'})
        return data


class PlantSerializer(serializers.Serializer):
    A = MatrixField()
    B = MatrixField()
    C = MatrixField()


class BlocksSerializer(serializers.Serializer):
    Abar = MatrixField()
    Bbar = MatrixField()


class ObserverSerializer(serializers.Serializer):
    kind = serializers.ChoiceField(choices=('full', 'reduced'))
    L = MatrixField(required=False)
    Lbar = MatrixField(required=False)
    P = MatrixField(required=False)
    blocks = BlocksSerializer(required=False)

    def validate(self, data):
        if data['kind'] == 'full' and 'L' not in data:
            raise serializers.ValidationError(
                {'L': 'Full-order observer needs L.'})
        if data['kind'] == 'reduced' and 'Lbar' not in data:
            raise serializers.ValidationError(
                {'Lbar': 'Reduced-order observer needs Lbar.'})
        return data


class GainsSerializer(serializers.Serializer):
    K = MatrixField()


class ScheduleSerializer(serializers.Serializer):
    kind = serializers.ChoiceField(choices=SCHEDULE_KINDS,
                                   default='exponential')
    c = FiniteFloatField(min_value=0)
    g = FiniteFloatField(required=False)
    power = serializers.IntegerField(min_value=1, required=False)
    p = serializers.ListField(child=FiniteFloatField(min_value=0),
                              required=False)


class RangeField(serializers.ListField):
    child = FiniteFloatField()

    def __init__(self, **kwargs):
        kwargs.update(min_length=2, max_length=2)
        super(RangeField, self).__init__(**kwargs)

    def to_internal_value(self, data):
        lo, hi = super(RangeField, self).to_internal_value(data)
        if lo > hi:
            raise serializers.ValidationError('Range lower end exceeds upper.')
        return [lo, hi]


class IntervalSerializer(serializers.Serializer):
    c = RangeField()
    g = RangeField()


class NoiseSerializer(serializers.Serializer):
    agents = ScheduleSerializer(many=True, required=False)
    interval = IntervalSerializer(required=False)
    kind = serializers.ChoiceField(choices=SCHEDULE_KINDS, required=False)
    c = FiniteFloatField(min_value=0, required=False)
    g = FiniteFloatField(required=False)
    power = serializers.IntegerField(min_value=1, required=False)
    p = serializers.ListField(child=FiniteFloatField(min_value=0),
                              required=False)

    def validate(self, data):
        forms = sum(1 for form in ('agents', 'interval', 'c') if form in data)
        if forms != 1:
            raise serializers.ValidationError(
                'Noise needs exactly one of agents, interval or a uniform '
                'schedule.')
        return data


class AdjacencySerializer(serializers.Serializer):
    i0 = serializers.IntegerField(min_value=0)
    k0 = serializers.IntegerField(min_value=0, default=0)
    m = FiniteFloatField(min_value=0)
    alpha = FiniteFloatField(min_value=0, required=False)
    h = serializers.ListField(child=FiniteFloatField(min_value=0),
                              required=False)
    direction = serializers.ListField(child=FiniteFloatField(),
                                      required=False)

    def validate(self, data):
        if ('alpha' in data) == ('h' in data):
            raise serializers.ValidationError(
                'Adjacency needs exactly one of alpha or h.')
        return data


class SimSerializer(serializers.Serializer):
    H = serializers.IntegerField(min_value=1, required=False)
    R = serializers.IntegerField(min_value=2, required=False)
    seed = serializers.IntegerField(min_value=0, required=False)
    x0 = InitialStateField(required=False)
    xhat0 = MatrixField(required=False)


class PrivacySerializer(serializers.Serializer):
    eps_star = FiniteFloatField(min_value=0, required=False)
    tol = FiniteFloatField(min_value=0, required=False)
    strict_paper = serializers.BooleanField(required=False)


class ScenarioSerializer(serializers.Serializer):
    name = serializers.CharField(required=False)
    graph = GraphSerializer()
    plant = PlantSerializer()
    observer = ObserverSerializer()
    gains = GainsSerializer()
    noise = NoiseSerializer()
    adjacency = AdjacencySerializer(required=False)
    sim = SimSerializer(required=False)
    privacy = PrivacySerializer(required=False)


def json_pointer(errors, path=''):
    """
    Returns (pointer, message) for the first error in a DRF error tree.
    """
    if isinstance(errors, dict):
        for key, value in errors.items():
            if value:
                child = path if key == 'non_field_errors' else '{}/{}'.format(
                    path, key)
                return json_pointer(value, child)
    if isinstance(errors, list):
        for index, value in enumerate(errors):
            if isinstance(value, (dict, list)):
                if value:
                    return json_pointer(value, '{}/{}'.format(path, index))
            else:
                return path or '/', str(value)
    return path or '/', str(errors)


def validate_scenario(data):
    serializer = ScenarioSerializer(data=data)
    if not serializer.is_valid():
        pointer, message = json_pointer(serializer.errors)
        raise ScenarioPolicyException('{}: {}'.format(pointer, message))
    return serializer.validated_data


def resolve_seed(seed, sim):
    if seed is not None:
        return int(seed)
    if sim.get('seed') is not None:
        return int(sim['seed'])
    return int(os.getenv('DPC_SEED', '0'))


def _schedule(data):
    return NoiseSchedule(
        c=data['c'], kind=data.get('kind') or 'exponential',
        g=data.get('g'), power=data.get('power'), p=data.get('p'))


def _schedules(noise, N, seed):
    if 'agents' in noise:
        if len(noise['agents']) != N:
            raise DimensionMismatchException(
                'Noise lists {} agents but the graph has {}'.format(
                    len(noise['agents']), N))
        return [_schedule(s) for s in noise['agents']]

    if 'interval' in noise:
        generator = stream_generator(seed, PARAMETER_STREAM)
        c_range, g_range = noise['interval']['c'], noise['interval']['g']
        schedules = []
        for i in range(N):
            c = float(generator.uniform(*c_range))
            g = float(generator.uniform(*g_range))
            schedules.append(NoiseSchedule(c=c, kind='exponential', g=g))
        return schedules

    return [_schedule(noise)] * N


def _initial_states(sim, N, n, seed):
    x0 = sim.get('x0')
    if x0 is None or isinstance(x0, dict):
        box = x0['box'] if x0 else getattr(settings, 'DPC_INITIAL_BOX', 5.0)
        generator = stream_generator(seed, STATE_STREAM)
        return generator.uniform(-box, box, size=(N, n))
    return as_matrix(x0, 'sim.x0', rows=N, cols=n)


def _observer(observer, plant):
    if observer['kind'] == 'full':
        return FullObserver(observer['L']).check(plant), None

    rf = canonicalize_output(plant, observer.get('P'))
    blocks = observer.get('blocks')
    if blocks:
        rf = reduced_form_from_blocks(
            rf.P, blocks['Abar'], blocks['Bbar'], plant.q)
        deviation = block_deviation(plant, rf)
        if deviation > BLOCK_TOLERANCE:
            logger.warning(
                'Supplied canonical blocks differ from P A P^-1, P B by '
                '{:.3g}; the blocks are used as given'.format(deviation))
    return None, rf.with_gain(observer['Lbar'])


def parse_scenario(data, seed=None):
    validated = validate_scenario(data)
    graph_data = validated['graph']
    graph = make_topology(
        graph_data['kind'], graph_data['N'], offsets=graph_data.get('offsets'),
        edges=graph_data.get('edges'), adjacency=graph_data.get('adjacency'))

    plant_data = validated['plant']
    plant = LtiPlant(plant_data['A'], plant_data['B'], plant_data['C'])
    K = GainSet(validated['gains']['K']).check(plant)
    L, rf = _observer(validated['observer'], plant)

    sim = validated.get('sim', {})
    privacy = validated.get('privacy', {})
    N, n = graph.node_count, plant.n
    seed = resolve_seed(seed, sim)
    schedules = _schedules(validated['noise'], N, seed)
    x0 = _initial_states(sim, N, n, seed)

    est_dim = n if rf is None else n - plant.q
    if sim.get('xhat0') is not None:
        xhat0 = as_matrix(sim['xhat0'], 'sim.xhat0', rows=N, cols=est_dim)
    else:
        xhat0 = np.zeros((N, est_dim))

    adjacency = None
    if 'adjacency' in validated:
        adj = dict(validated['adjacency'])
        if adj['i0'] >= N:
            raise DimensionMismatchException(
                'Adjacency agent {} outside {} agents'.format(adj['i0'], N))
        if 'direction' in adj and len(adj['direction']) != plant.q:
            raise DimensionMismatchException(
                'Adjacency direction has {} entries for {} outputs'.format(
                    len(adj['direction']), plant.q))
        adjacency = AdjacencySpec(
            i0=adj['i0'], m=adj['m'], k0=adj.get('k0', 0),
            alpha=adj.get('alpha'),
            h=tuple(adj['h']) if 'h' in adj else None,
            direction=tuple(adj['direction']) if 'direction' in adj else None)

    horizon = sim.get('H', getattr(settings, 'DPC_DEFAULT_HORIZON', 200))
    runs = sim.get('R', getattr(settings, 'DPC_DEFAULT_RUNS', 500))
    cfg = ScenarioConfig(
        graph=graph, plant=plant, K=K, schedules=schedules, x0=x0,
        xhat0=xhat0, horizon=horizon, runs=runs, seed=seed,
        observer=validated['observer']['kind'], L=L, rf=rf,
        adjacency=adjacency, eps_star=privacy.get('eps_star'),
        tol=privacy.get('tol'),
        strict_paper=privacy.get('strict_paper', False))
    cfg.echo = echo_scenario(validated, cfg)
    logger.info('Resolved scenario: {} agents, {} observer, seed {}'.format(
        N, cfg.observer, seed))
    return cfg


def echo_scenario(validated, cfg):
    """
    The fully-resolved scenario: loading it reproduces cfg exactly.
    """
    graph = {key: value for key, value in validated['graph'].items()}
    observer = {'kind': cfg.observer}
    if cfg.reduced:
        observer['Lbar'] = cfg.rf.Lbar.tolist()
        observer['P'] = cfg.rf.P.tolist()
        if validated['observer'].get('blocks'):
            observer['blocks'] = {'Abar': cfg.rf.Abar.tolist(),
                                  'Bbar': cfg.rf.Bbar.tolist()}
    else:
        observer['L'] = cfg.L.tolist()

    echo = {
        'graph': graph,
        'plant': {'A': cfg.plant.A.tolist(), 'B': cfg.plant.B.tolist(),
                  'C': cfg.plant.C.tolist()},
        'observer': observer,
        'gains': {'K': cfg.K.tolist()},
        'noise': {'agents': [s.to_dict() for s in cfg.schedules]},
        'sim': {'H': cfg.horizon, 'R': cfg.runs, 'seed': cfg.seed,
                'x0': cfg.x0.tolist(), 'xhat0': cfg.xhat0.tolist()},
        'privacy': {'strict_paper': cfg.strict_paper},
    }
    if 'name' in validated:
        echo['name'] = validated['name']
    if cfg.adjacency is not None:
        echo['adjacency'] = cfg.adjacency.to_dict()
    if cfg.eps_star is not None:
        echo['privacy']['eps_star'] = cfg.eps_star
    if cfg.tol is not None:
        echo['privacy']['tol'] = cfg.tol
    return echo


def load_scenario(path, seed=None):
    with open(path) as f:
        try:
            data = json.load(f)
        except ValueError as ex:
            raise ScenarioPolicyException('/: invalid JSON: {}'.format(ex))
    logger.debug('Loading scenario {}'.format(path))
    return parse_scenario(data, seed=seed)


def bundled_scenario_path(name):
    return os.path.join(os.path.dirname(os.path.dirname(__file__)),
                        'resources', 'scenarios', name)
