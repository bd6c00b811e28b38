import json
import math

import numpy as np
import pytest

from django.core.exceptions import ImproperlyConfigured
from rest_framework import serializers

from klein_systolic.constants import SIGMA_V
from klein_systolic.constants import constant
from klein_systolic.exceptions import InvalidMetric
from klein_systolic.extremal import extremal_for_beta
from klein_systolic.geometry import ConstantProfile
from klein_systolic.geometry import FlatSphericalProfile
from klein_systolic.geometry import GridMetric
from klein_systolic.geometry import MobiusHalfProfile
from klein_systolic.geometry import SphericalCapProfile
from klein_systolic.geometry import TabulatedProfile
from klein_systolic.geometry import ThirdPiProfile
from klein_systolic.measures import certify_theorem
from klein_systolic.serializers import BoundCertificateSerializer
from klein_systolic.serializers import ConstantResultSerializer
from klein_systolic.serializers import ExactFloatField
from klein_systolic.serializers import ExtremalSerializer
from klein_systolic.serializers import PolymorphicSerializer
from klein_systolic.serializers import RootResultSerializer
from klein_systolic.serializers import dump_metric
from klein_systolic.serializers import dumps
from klein_systolic.serializers import load_metric
from klein_systolic.serializers import read_metric
from klein_systolic.serializers import sidecar_path
from klein_systolic.serializers import write_metric
from klein_systolic.solvers import solve
from klein_systolic.verification import PerturbationSpec
from klein_systolic.verification import random_conformal_factor


PROFILES = [
    ConstantProfile(0.1 + 0.2, 1.3),
    SphericalCapProfile(1.0 / 3.0),
    FlatSphericalProfile(1.3, math.tan(1.3) - 1.3),
    ThirdPiProfile(math.pi / 3.0 + 0.7),
    TabulatedProfile([0.0, 0.1, 0.7], [1.0, 2.0 / 3.0, 1.5]),
    MobiusHalfProfile(FlatSphericalProfile(1.2, 1.7)),
]


def through_json(data):
    return json.loads(dumps(data))


@pytest.mark.parametrize('metric', PROFILES, ids=lambda m: m.kind)
def test_profile_round_trip_is_exact(metric):
    data = through_json(dump_metric(metric))
    assert data['format_version'] == '1.0.0'
    assert data['type'] == 'profile'
    assert data['kind'] == metric.kind
    assert load_metric(data) == metric


def test_reals_are_written_as_repr():
    data = dump_metric(FlatSphericalProfile(1.3, math.tan(1.3) - 1.3))
    assert data['omega'] == '1.3'
    assert float(data['b']) == math.tan(1.3) - 1.3


def test_mobius_profile_nests_its_parent():
    parent = FlatSphericalProfile(1.2, 1.7)
    data = dump_metric(MobiusHalfProfile(parent))
    assert data['parent']['kind'] == 'flat-spherical'
    assert load_metric(data).parent == parent


def test_grid_round_trip_is_exact():
    grid = random_conformal_factor(
        PerturbationSpec(seed=4, resolution=(17, 9)),
        GridMetric(0.7, np.ones((17, 9))))
    data = through_json(dump_metric(grid))
    assert data['type'] == 'grid'
    assert (data['n_u'], data['n_v']) == (17, 9)
    assert len(data['factors']) == 17 * 9
    assert float(data['factors'][3 * 9 + 5]) == grid.factors[3, 5]
    loaded = load_metric(data)
    assert loaded.beta == grid.beta
    assert np.array_equal(loaded.factors, grid.factors)


def test_numbers_are_accepted():
    metric = load_metric({'type': 'profile', 'kind': 'spherical-cap', 'b': 1})
    assert metric == SphericalCapProfile(1.0)


@pytest.mark.parametrize('data', [
    [],
    {'type': 'mesh'},
    {'type': 'profile', 'kind': 'hyperbolic', 'b': '1.0'},
    {'type': 'profile', 'kind': 'spherical-cap'},
    {'type': 'profile', 'kind': 'spherical-cap', 'b': 'nan'},
    {'type': 'profile', 'kind': 'spherical-cap', 'b': True},
    {'type': 'profile', 'kind': 'flat-spherical', 'omega': 1.0, 'b': 0.5},
    {'type': 'profile', 'kind': 'tabulated', 'v': [0.0], 'f': [1.0]},
    {'type': 'grid', 'beta': 1.0, 'factors': [1.0] * 9},
    {'type': 'grid', 'beta': 1.0, 'n_u': 3, 'n_v': 3,
     'factors': [[1.0, 1.0, 1.0], [1.0, 1.0], [1.0, 1.0, 1.0]]},
    {'type': 'grid', 'beta': 1.0, 'n_u': 3, 'n_v': 3,
     'factors': [1.0] * 10},
    {'type': 'grid', 'beta': 1.0, 'n_u': 3, 'n_v': 3,
     'factors': [1.0, 2.0, 3.0] * 3},
    {'format_version': '2.0.0', 'type': 'profile', 'kind': 'spherical-cap',
     'b': 1.0},
    {'format_version': 'one', 'type': 'profile', 'kind': 'spherical-cap',
     'b': 1.0},
])
def test_invalid_metric_data(data):
    with pytest.raises(InvalidMetric):
        load_metric(data)


def test_current_format_version_is_read():
    metric = load_metric({
        'format_version': '1.0.0', 'type': 'profile',
        'kind': 'spherical-cap', 'b': '1.0'})
    assert metric.b == 1.0


def test_metric_files(tmp_path):
    extremal = extremal_for_beta(SIGMA_V, 6.0)
    path = str(tmp_path / 'metric.json')
    write_metric(extremal.metric, path, extremal=extremal.spec)
    with open(path) as f:
        assert 'extremal' not in json.load(f)
    assert sidecar_path(path) == str(tmp_path / 'metric.extremal.json')
    with open(sidecar_path(path)) as f:
        spec = json.load(f)
    assert spec['theorem'] == SIGMA_V
    assert spec['regime'] == 'flat-spherical'
    assert spec['beta'] == 6.0
    assert read_metric(path) == extremal.metric


def test_read_metric_rejects_non_json(tmp_path):
    path = tmp_path / 'metric.json'
    path.write_text('omega = 1.2\n')
    with pytest.raises(InvalidMetric):
        read_metric(str(path))


def test_exact_float_field():
    field = ExactFloatField()
    assert field.to_internal_value('0.30000000000000004') == 0.1 + 0.2
    assert field.to_internal_value(3) == 3.0
    assert field.to_representation(np.float64(0.1)) == '0.1'
    with pytest.raises(serializers.ValidationError):
        field.to_internal_value('inf')
    with pytest.raises(serializers.ValidationError):
        field.to_internal_value([1.0])


def test_polymorphic_serializer_needs_meta():
    class NoMeta(PolymorphicSerializer):
        pass

    class NoMap(PolymorphicSerializer):
        class Meta:
            differentiator_field = 'kind'

    with pytest.raises(ImproperlyConfigured):
        NoMeta()
    with pytest.raises(ImproperlyConfigured):
        NoMap()


def test_extremal_serializer():
    data = ExtremalSerializer(extremal_for_beta(SIGMA_V, 1.0)).data
    assert data['spec']['regime'] == 'spherical'
    assert data['metric']['kind'] == 'spherical-cap'
    assert 'format_version' not in data['metric']


def test_constant_result_serializer():
    data = ConstantResultSerializer(constant(SIGMA_V, 6.0)).data
    assert data['regime'] == 'flat-spherical'
    assert data['exponent'] == 2
    assert data['x'] is None
    assert data['C'] == pytest.approx(0.5 / math.cos(data['omega']))


def test_root_result_serializer_writes_unbounded_bracket_as_null():
    data = through_json(RootResultSerializer(solve('b-thm2', 5.0)).data)
    assert data['bracket'][0] == pytest.approx(
        2.0 * math.log(2.0 + math.sqrt(3.0)))
    assert data['bracket'][1] is None


def test_bound_certificate_serializer():
    data = through_json(
        BoundCertificateSerializer(certify_theorem(SIGMA_V, 6.0)).data)
    assert data['valid'] is True
    assert data['exponent'] == 2
    assert [f['family'] for f in data['families']] == [
        'great-circles', 'verticals']
    assert data['families'][0]['curve_length'] == pytest.approx(math.pi)
    assert set(data['residuals']['one']) == {'pushforward', 'reference'}
    assert data['metric']['kind'] == 'flat-spherical'
    assert data['alternatives'] == {}


def test_dumps_encodes_numpy_values():
    assert json.loads(dumps({'n': np.int64(3), 'a': np.arange(2)})) == {
        'n': 3, 'a': [0, 1]}
