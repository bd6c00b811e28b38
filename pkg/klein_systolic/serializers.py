"""
Serializers for metric interchange files and command output.

Metric files are JSON objects dispatched on `type` (`profile` or `grid`)
and, for profiles, on `kind`:

```
{"format_version": "1.0.0", "type": "profile", "kind": "flat-spherical",
 "omega": "1.2", "b": "1.3721..."}
```

Grid metrics carry the lattice size and the factor table flattened row-major:

```
{"format_version": "1.0.0", "type": "grid", "kind": "grid", "beta": "1.0",
 "n_u": 65, "n_v": 65, "factors": ["1.0", "1.0", ...]}
```

Reals are written as `repr` strings so that a round trip is bit-exact, and
read from strings or JSON numbers.

"""

import json
import math
import os

import numpy as np

from django.core.exceptions import ImproperlyConfigured

from rest_framework import fields
from rest_framework import serializers
from rest_framework.utils.encoders import JSONEncoder

from klein_systolic import geometry
from klein_systolic.exceptions import InvalidMetric
from klein_systolic.settings import systolic_settings
from klein_systolic.validators import FormatVersionValidator


class ExactFloatField(serializers.Field):
    """A finite real written as its `repr`, read from a string or a number."""

    default_error_messages = {
        'invalid': 'A real number is required.',
        'non_finite': 'Value {value!r} is not finite.',
    }

    def to_internal_value(self, data):
        """Return the float of `data`."""
        if isinstance(data, bool) or not isinstance(data, (str, int, float)):
            self.fail('invalid')
        try:
            value = float(data)
        except ValueError:
            self.fail('invalid')
        if not math.isfinite(value):
            self.fail('non_finite', value=value)
        return value

    def to_representation(self, value):
        """Return the shortest decimal string reading back as `value`."""
        return repr(float(value))


class FormatVersionField(serializers.CharField):
    """The semantic version of an interchange file."""

    def __init__(self, **kwargs):
        """Initialize the field with the format version validator."""
        kwargs.setdefault('required', False)
        kwargs.setdefault('write_only', True)
        super(FormatVersionField, self).__init__(**kwargs)
        self.validators.append(FormatVersionValidator())


class PolymorphicSerializer(serializers.Serializer):
    """Serializer class that switches to a child serializer based on data."""

    def __new__(cls, instance=None, data=fields.empty, *args, **kwargs):
        """Return serializer instance."""
        try:
            meta = cls.Meta
        except AttributeError:
            raise ImproperlyConfigured(
                '`{}` class needs to have a `Meta` class with '
                '`differentiator_field` and `child_serializer_map` '
                'attributes defined.'.format(cls.__name__))

        if not getattr(meta, 'differentiator_field', None):
            raise ImproperlyConfigured(
                '`differentiator_field` attribute should be defined in '
                '`{}.Meta` class.'.format(cls.__name__))

        if not getattr(meta, 'child_serializer_map', None):
            raise ImproperlyConfigured(
                '`child_serializer_map` attribute should be defined in '
                '`{}.Meta` class.'.format(cls.__name__))

        if kwargs.pop('many', False):
            return cls.many_init(instance, data, *args, **kwargs)

        serializer_class = cls.get_child_serializer_class(instance, data)
        if serializer_class is not None:
            return serializer_class(instance, data, *args, **kwargs)

        return super(PolymorphicSerializer, cls).__new__(
            cls, instance, data, *args, **kwargs)

    @classmethod
    def _get_differentiator_value(cls, instance=None, data=fields.empty):
        """Return the value of the differentiator from `data` or `instance`."""
        differentiator_value = None
        differentiator_field = cls.Meta.differentiator_field

        if data is not fields.empty and isinstance(data, dict):
            differentiator_value = data.get(differentiator_field)

        if not differentiator_value and instance is not None:
            differentiator_value = getattr(
                instance, differentiator_field, None)

        return differentiator_value

    @classmethod
    def get_child_serializer_class(cls, instance=None, data=fields.empty):
        """Return the child serializer class, or `None` if there is none."""
        value = cls._get_differentiator_value(instance, data)
        return cls.Meta.child_serializer_map.get(value)

    def to_internal_value(self, data):
        """Return the object built by the child serializer of `data`."""
        serializer_class = self.get_child_serializer_class(data=data)
        if serializer_class is None:
            field = self.Meta.differentiator_field
            value = data.get(field) if isinstance(data, dict) else None
            raise serializers.ValidationError({
                field: 'Unknown {} "{}"; expected one of {}.'.format(
                    field, value,
                    ', '.join(sorted(self.Meta.child_serializer_map)))})
        serializer = serializer_class(data=data, context=self.context)
        serializer.is_valid(raise_exception=True)
        return serializer.save()

    def to_representation(self, instance):
        """Return the representation of `instance` from its serializer."""
        serializer_class = self.get_child_serializer_class(instance=instance)
        return serializer_class(instance, context=self.context).data


class MetricFieldsSerializer(serializers.Serializer):
    """Fields common to every metric kind."""

    format_version = FormatVersionField()
    type = serializers.CharField(source='metric_type', read_only=True)
    kind = serializers.CharField(read_only=True)

    metric_class = None

    def create(self, validated_data):
        """Return the metric built from the validated fields."""
        validated_data.pop('format_version', None)
        return self.metric_class(**validated_data)


class ConstantProfileSerializer(MetricFieldsSerializer):
    c = ExactFloatField()
    half_height = ExactFloatField()

    metric_class = geometry.ConstantProfile


class SphericalCapProfileSerializer(MetricFieldsSerializer):
    b = ExactFloatField()

    metric_class = geometry.SphericalCapProfile


class FlatSphericalProfileSerializer(MetricFieldsSerializer):
    omega = ExactFloatField()
    b = ExactFloatField()

    metric_class = geometry.FlatSphericalProfile


class ThirdPiProfileSerializer(MetricFieldsSerializer):
    b = ExactFloatField()

    metric_class = geometry.ThirdPiProfile


class TabulatedProfileSerializer(MetricFieldsSerializer):
    """Samples of f on [0, V], starting at v = 0."""

    v = serializers.ListField(child=ExactFloatField(), min_length=2)
    f = serializers.ListField(child=ExactFloatField(), min_length=2)

    metric_class = geometry.TabulatedProfile


class ProfileSerializer(PolymorphicSerializer):
    """Profile metric serializer dispatching on `kind`."""

    class Meta:
        differentiator_field = 'kind'
        child_serializer_map = {
            geometry.ConstantProfile.kind: ConstantProfileSerializer,
            geometry.SphericalCapProfile.kind: SphericalCapProfileSerializer,
            geometry.FlatSphericalProfile.kind: FlatSphericalProfileSerializer,
            geometry.ThirdPiProfile.kind: ThirdPiProfileSerializer,
            geometry.TabulatedProfile.kind: TabulatedProfileSerializer,
        }


class MobiusHalfProfileSerializer(MetricFieldsSerializer):
    """The Möbius band restriction of a Klein profile, given as `parent`."""

    parent = ProfileSerializer()

    metric_class = geometry.MobiusHalfProfile


ProfileSerializer.Meta.child_serializer_map[
    geometry.MobiusHalfProfile.kind] = MobiusHalfProfileSerializer


class GridMetricSerializer(MetricFieldsSerializer):
    """
    Conformal factor table on the node lattice of [-π/2, π/2] × [-β, β].

    `factors` holds the n_u × n_v table flattened row-major: the factor at
    node (i, j) is `factors[i * n_v + j]`.

    """

    beta = ExactFloatField()
    n_u = serializers.IntegerField(min_value=3)
    n_v = serializers.IntegerField(min_value=3)
    factors = serializers.ListField(
        child=ExactFloatField(), min_length=9, source='flat_factors')

    metric_class = geometry.GridMetric

    def validate(self, attrs):
        expected = attrs['n_u'] * attrs['n_v']
        if len(attrs['flat_factors']) != expected:
            raise serializers.ValidationError({
                'factors': 'Expected n_u * n_v = {} factors, got {}.'.format(
                    expected, len(attrs['flat_factors']))})
        return attrs

    def create(self, validated_data):
        table = np.reshape(
            validated_data['flat_factors'],
            (validated_data['n_u'], validated_data['n_v']))
        return self.metric_class(validated_data['beta'], table)


class MetricSerializer(PolymorphicSerializer):
    """Metric serializer dispatching on `type`, then on `kind`."""

    class Meta:
        differentiator_field = 'type'
        child_serializer_map = {
            geometry.ProfileMetric.metric_type: ProfileSerializer,
            geometry.GridMetric.metric_type: GridMetricSerializer,
        }

    @classmethod
    def _get_differentiator_value(cls, instance=None, data=fields.empty):
        if instance is not None:
            return getattr(instance, 'metric_type', None)
        return super(MetricSerializer, cls)._get_differentiator_value(
            instance, data)


def dump_metric(metric):
    """Return the interchange representation of `metric`."""
    data = {'format_version': systolic_settings.FORMAT_VERSION}
    data.update(MetricSerializer(metric).data)
    return data


def load_metric(data):
    """Return the metric described by the interchange mapping `data`."""
    if not isinstance(data, dict):
        raise InvalidMetric('A metric file must hold a JSON object.')
    serializer = MetricSerializer(data=data)
    try:
        serializer.is_valid(raise_exception=True)
    except InvalidMetric:
        raise
    except serializers.ValidationError as exc:
        raise InvalidMetric(exc.detail)
    return serializer.save()


def dumps(data, **kwargs):
    """Return `data` as JSON text, numpy values included."""
    kwargs.setdefault('indent', 2)
    return json.dumps(data, cls=JSONEncoder, **kwargs)


def read_metric(path):
    """Return the metric stored in the JSON file at `path`."""
    with open(path) as f:
        try:
            data = json.load(f)
        except ValueError as exc:
            raise InvalidMetric(
                '{} is not a JSON file: {}'.format(path, exc))
    return load_metric(data)


def sidecar_path(path):
    """Return the path of the extremal-spec file written next to `path`."""
    return os.path.splitext(path)[0] + '.extremal.json'


def write_metric(metric, path, extremal=None):
    """
    Write `metric` to `path`.

    When `extremal` is given its `ExtremalSpec` goes to `sidecar_path(path)`
    and the metric file keeps the plain interchange format.

    """
    with open(path, 'w') as f:
        f.write(dumps(dump_metric(metric)))
        f.write('\n')
    if extremal is not None:
        with open(sidecar_path(path), 'w') as f:
            f.write(dumps(ExtremalSpecSerializer(extremal).data))
            f.write('\n')


def _finite_or_none(value):
    if value is None or not math.isfinite(value):
        return None
    return float(value)


class ExtremalSpecSerializer(serializers.Serializer):
    theorem = serializers.CharField()
    regime = serializers.CharField()
    beta = serializers.FloatField()
    omega = serializers.FloatField()
    b = serializers.FloatField()


class ExtremalSerializer(serializers.Serializer):
    spec = ExtremalSpecSerializer()
    metric = MetricSerializer()


class ConstantResultSerializer(serializers.Serializer):
    theorem = serializers.CharField()
    beta = serializers.FloatField()
    regime = serializers.CharField()
    C = serializers.FloatField()
    omega = serializers.FloatField()
    b = serializers.FloatField()
    x = serializers.FloatField()
    exponent = serializers.IntegerField()


class RootResultSerializer(serializers.Serializer):
    equation = serializers.CharField()
    root = serializers.FloatField()
    residual = serializers.FloatField()
    bracket = serializers.SerializerMethodField()
    beta = serializers.FloatField()
    extra = serializers.DictField(child=serializers.FloatField())

    def get_bracket(self, obj):
        """Return the bracket, an unbounded end as `None`."""
        return [_finite_or_none(x) for x in obj.bracket]


class SystoleReportSerializer(serializers.Serializer):
    l_sigma = serializers.FloatField()
    l_v = serializers.FloatField()
    l_h = serializers.FloatField()
    L_sigma = serializers.FloatField()
    volume = serializers.FloatField()
    resolution = serializers.ListField(child=serializers.IntegerField())
    error_estimate = serializers.DictField(child=serializers.FloatField())
    sources = serializers.DictField(child=serializers.CharField())


class CurveFamilyMeasureSerializer(serializers.Serializer):
    family = serializers.CharField()
    omega = serializers.FloatField()
    b = serializers.FloatField()
    m_prime = serializers.FloatField()
    length_class = serializers.CharField()
    mass = serializers.FloatField()
    curve_length = serializers.SerializerMethodField()

    def get_curve_length(self, obj):
        return obj.curve_length()


class BoundCertificateSerializer(serializers.Serializer):
    theorem = serializers.CharField()
    valid = serializers.BooleanField()
    C = serializers.FloatField()
    eps_push = serializers.FloatField()
    eps_mass = serializers.FloatField()
    volume = serializers.FloatField()
    bookkeeping = serializers.CharField()
    tol_push = serializers.FloatField()
    tol_mass = serializers.FloatField()
    exponent = serializers.IntegerField()
    class_products = serializers.DictField(child=serializers.FloatField())
    residuals = serializers.SerializerMethodField()
    alternatives = serializers.DictField(child=serializers.FloatField())
    families = CurveFamilyMeasureSerializer(many=True)
    metric = MetricSerializer()

    def get_residuals(self, obj):
        """Return {probe: {pushforward, reference}} of the certificate."""
        return {
            name: {'pushforward': pushed, 'reference': reference}
            for name, (pushed, reference) in obj.residuals.items()}


class SweepResultSerializer(serializers.Serializer):
    theorem = serializers.CharField()
    beta = serializers.FloatField()
    C = serializers.FloatField()
    samples = serializers.IntegerField()
    worst_ratio = serializers.FloatField()
    worst_seed = serializers.IntegerField()
    equality_ratio = serializers.FloatField()
    equality_gap = serializers.FloatField()
    passed = serializers.BooleanField()
    failing_seed = serializers.IntegerField()
    violations = serializers.ListField(child=serializers.IntegerField())
    reruns = serializers.IntegerField()
    seed = serializers.IntegerField()
    amplitude = serializers.FloatField()
    modes = serializers.IntegerField()
    resolution = serializers.ListField(child=serializers.IntegerField())
    tol_grid = serializers.FloatField()
    tol_equality = serializers.FloatField()


class AsymptoticsReportSerializer(serializers.Serializer):
    sigma_v_beta = serializers.FloatField()
    sigma_v_constant = serializers.FloatField()
    sigma_n_v_increasing = serializers.BooleanField()
    sigma_n_v_limit = serializers.FloatField()
    sigma_v_h_beta = serializers.FloatField()
    sigma_v_h_constant = serializers.FloatField()
    thm3_slope_sign = serializers.IntegerField()
    thm3_slope_stable = serializers.BooleanField()
    threshold_gaps = serializers.DictField(child=serializers.FloatField())
    mobius_gap = serializers.FloatField()


class CommandResultSerializer(serializers.Serializer):
    command = serializers.CharField()
    inputs = serializers.DictField()
    outputs = serializers.JSONField()
    versions = serializers.DictField(child=serializers.CharField())
    wall_time = serializers.FloatField()
