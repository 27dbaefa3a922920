"""
Serializers for run configurations and stored runs.
"""

from rest_framework import serializers

from core.conf import numerics

from .models import RunRecord

TASK_CHOICES = ('curve', 'correlator', 'free-energy', 'oracle-compare', 'critical-report')

DEFAULT_TOLERANCES = {
    'endpoint': 1e-10,
    'symmetry': 1e-8,
    'route': 1e-6,
    'oracle': 1e-6,
    'exponent': 0.05,
}

SEED_MAX = 2 ** 63 - 1


class ComplexField(serializers.Field):
    """A complex number given as a real number or as a [re, im] pair."""

    default_error_messages = {'invalid': 'Expected a number or a [re, im] pair.'}

    def to_internal_value(self, data):
        if isinstance(data, bool):
            self.fail('invalid')
        if isinstance(data, (int, float)):
            return complex(data)
        if isinstance(data, (list, tuple)) and len(data) == 2:
            try:
                return complex(float(data[0]), float(data[1]))
            except (TypeError, ValueError):
                self.fail('invalid')
        self.fail('invalid')

    def to_representation(self, value):
        value = complex(value)
        return [value.real, value.imag]


class ModelParamsSerializer(serializers.Serializer):
    n = serializers.FloatField(min_value=-2.0, max_value=2.0)
    t = ComplexField()
    c = serializers.FloatField()
    hat_pot = serializers.ListField(child=ComplexField(), required=False)
    pot = serializers.ListField(child=ComplexField(), required=False)

    def validate_n(self, value):
        if abs(value) >= 2:
            raise serializers.ValidationError('The loop fugacity must satisfy |n| < 2.')
        return value

    def validate_c(self, value):
        if value <= 0:
            raise serializers.ValidationError('The loop-triangle coupling must be positive.')
        return value

    def validate(self, data):
        if ('hat_pot' in data) == ('pot' in data):
            raise serializers.ValidationError('Give exactly one of hat_pot and pot.')
        return data


class PointListField(serializers.ListField):
    child = ComplexField()


class TaskSerializer(serializers.Serializer):
    task = serializers.ChoiceField(choices=TASK_CHOICES)
    k = serializers.IntegerField(min_value=1, required=False, default=1)
    g = serializers.IntegerField(min_value=0, required=False, default=0)
    points = serializers.ListField(child=PointListField(), required=False)
    probes = serializers.IntegerField(min_value=1, max_value=50, required=False, default=3)
    v_max = serializers.IntegerField(min_value=1, required=False, default=3)
    x_points = PointListField(required=False)
    t_scale = serializers.FloatField(required=False, default=0.02)
    t_grid = serializers.ListField(child=serializers.FloatField(), required=False)
    kg = serializers.ListField(
        child=serializers.ListField(child=serializers.IntegerField(min_value=0), min_length=2, max_length=2),
        required=False,
    )

    def validate(self, data):
        cap = int(numerics()['GENUS_CAP'])
        if data['g'] > cap:
            raise serializers.ValidationError(f'g={data["g"]} is above the configured genus cap {cap}.')
        if data['task'] == 'correlator' and 'points' in data:
            for point_set in data['points']:
                if len(point_set) != data['k']:
                    raise serializers.ValidationError(f'each point set needs k={data["k"]} points.')
        if data['task'] == 'oracle-compare':
            limit = int(numerics()['ORACLE_MAX_VERTICES'])
            if data['v_max'] > limit:
                raise serializers.ValidationError(f'v_max={data["v_max"]} is above the enumeration limit {limit}.')
            if not data.get('x_points'):
                raise serializers.ValidationError('oracle-compare needs x_points.')
        if data.get('t_grid') is not None and len(data['t_grid']) < 4:
            raise serializers.ValidationError('t_grid needs at least 4 values for the exponent fits.')
        return data


class TolerancesSerializer(serializers.Serializer):
    endpoint = serializers.FloatField(required=False, default=DEFAULT_TOLERANCES['endpoint'])
    symmetry = serializers.FloatField(required=False, default=DEFAULT_TOLERANCES['symmetry'])
    route = serializers.FloatField(required=False, default=DEFAULT_TOLERANCES['route'])
    oracle = serializers.FloatField(required=False, default=DEFAULT_TOLERANCES['oracle'])
    exponent = serializers.FloatField(required=False, default=DEFAULT_TOLERANCES['exponent'])

    def validate(self, data):
        for name, value in data.items():
            if value <= 0:
                raise serializers.ValidationError(f'tolerance {name!r} must be positive.')
        return data


class RunConfigSerializer(serializers.Serializer):
    """Schema check of a run configuration document."""

    params = ModelParamsSerializer()
    tasks = TaskSerializer(many=True)
    tolerances = TolerancesSerializer(required=False, default=dict)
    seed = serializers.IntegerField(min_value=0, max_value=SEED_MAX, required=False, default=0)
    output = serializers.CharField(required=False, allow_blank=True, default='')

    def validate_tolerances(self, value):
        return {**DEFAULT_TOLERANCES, **value}


class RunRecordSerializer(serializers.ModelSerializer):
    class Meta:
        model = RunRecord
        fields = [
            'id', 'status', 'seed', 'output_path', 'error_message',
            'config', 'report', 'created_at', 'updated_at',
        ]
        read_only_fields = fields
