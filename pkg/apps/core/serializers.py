"""
Declarative run configurations.

YAML documents are validated by DRF serializers before any compute. Unknown
keys are rejected at every level and every default is filled in, so the
validated dict is the complete resolved configuration.
"""
from collections.abc import Mapping
from pathlib import Path
from typing import Any, Dict, Optional, Type, Union

import yaml
from django.conf import settings
from rest_framework import serializers

from utils.conf import domain_setting
from utils.exceptions import InvalidArgumentError
from utils.serialization import to_jsonable

REWARD_MODES = ('free_energy', 'free_energy_fidelity')
ARCHITECTURES = ('cnn', 'fnn')


def _setting(key, fallback):
    return lambda: domain_setting(key, fallback)


def _agent_setting(key, fallback):
    return lambda: domain_setting('AGENT', {}).get(key, fallback)


class StrictSerializer(serializers.Serializer):
    """Serializer that rejects unknown keys and expands omitted optional sections"""

    def to_internal_value(self, data):
        if isinstance(data, Mapping):
            unknown = sorted(set(data) - set(self.fields))
            if unknown:
                raise serializers.ValidationError({key: ['Unknown key.'] for key in unknown})
            data = dict(data)
            for name, field in self.fields.items():
                if isinstance(field, serializers.Serializer) and not field.required and data.get(name) is None:
                    data[name] = {}
        return super().to_internal_value(data)


class InstanceSerializer(StrictSerializer):
    path = serializers.CharField(required=False)
    majoranas = serializers.IntegerField(required=False, min_value=4)
    seed = serializers.IntegerField(required=False, min_value=0, max_value=2 ** 64 - 1)
    prefactor = serializers.FloatField(default=_setting('HAMILTONIAN_PREFACTOR', 1.0))

    def validate(self, attrs):
        if 'path' not in attrs and ('majoranas' not in attrs or 'seed' not in attrs):
            raise serializers.ValidationError('Give either an instance path or both majoranas and seed')
        if attrs.get('majoranas', 0) % 2:
            raise serializers.ValidationError({'majoranas': ['Majorana count must be even.']})
        return attrs


class NoiseSerializer(StrictSerializer):
    enabled = serializers.BooleanField(default=False)
    bitflip_1q = serializers.FloatField(min_value=0.0, max_value=1.0, default=_setting('NOISE_BITFLIP_1Q', 2.342e-4))
    depolarizing_2q = serializers.FloatField(
        min_value=0.0, max_value=1.0, default=_setting('NOISE_DEPOLARIZING_2Q', 8.043e-3)
    )
    shots = serializers.IntegerField(min_value=1, allow_null=True, default=None)


class EnvironmentSerializer(StrictSerializer):
    reward_mode = serializers.ChoiceField(choices=REWARD_MODES, default='free_energy_fidelity')
    zeta_f = serializers.FloatField(min_value=0.0, default=_setting('ZETA_F', 1e-2))
    zeta_fid = serializers.FloatField(min_value=0.0, max_value=1.0, default=_setting('ZETA_FID', 0.9))
    max_depth = serializers.IntegerField(min_value=1, allow_null=True, default=None)
    weights = serializers.ListField(
        child=serializers.FloatField(min_value=0.0), min_length=2, max_length=2,
        default=lambda: list(domain_setting('REWARD_WEIGHTS', (0.6, 0.4))),
    )
    step_evaluations = serializers.IntegerField(min_value=1, default=_setting('STEP_EVALUATIONS', 200))
    final_evaluations = serializers.IntegerField(min_value=1, default=_setting('FINAL_EVALUATIONS', 1000))
    initial_step = serializers.FloatField(min_value=1e-6, default=0.5)
    coupling_map = serializers.CharField(default='all_to_all')
    entangler = serializers.ChoiceField(choices=('ring', 'all_to_all'), default='ring')
    energy_plane = serializers.BooleanField(default=False)
    repeat_masking = serializers.BooleanField(default=True)

    def validate_weights(self, value):
        if sum(value) <= 0:
            raise serializers.ValidationError('Reward weights must not both be zero.')
        return value


class AgentSerializer(StrictSerializer):
    batch_size = serializers.IntegerField(min_value=1, default=_agent_setting('batch_size', 1000))
    memory_size = serializers.IntegerField(min_value=1, default=_agent_setting('memory_size', 20000))
    dropout = serializers.FloatField(min_value=0.0, max_value=1.0, default=_agent_setting('dropout', 0.0))
    target_update_every = serializers.IntegerField(
        min_value=1, default=_agent_setting('target_update_every', 500)
    )
    gamma = serializers.FloatField(min_value=0.0, max_value=1.0, default=_agent_setting('gamma', 5e-3))
    epsilon_start = serializers.FloatField(min_value=0.0, max_value=1.0, default=_agent_setting('epsilon_start', 1.0))
    epsilon_decay = serializers.FloatField(min_value=0.0, max_value=1.0, default=_agent_setting('epsilon_decay', 0.99995))
    epsilon_min = serializers.FloatField(min_value=0.0, max_value=1.0, default=_agent_setting('epsilon_min', 5e-2))
    max_episodes = serializers.IntegerField(min_value=1, default=_agent_setting('max_episodes', 5000))
    learning_rate = serializers.FloatField(min_value=0.0, default=_agent_setting('learning_rate', 1e-3))
    checkpoint_every = serializers.IntegerField(min_value=1, default=_agent_setting('checkpoint_every', 25))

    def validate(self, attrs):
        if attrs['memory_size'] < attrs['batch_size']:
            raise serializers.ValidationError('memory_size must be at least batch_size')
        if attrs['epsilon_min'] > attrs['epsilon_start']:
            raise serializers.ValidationError('epsilon_min must not exceed epsilon_start')
        return attrs


class NetworkSerializer(StrictSerializer):
    architecture = serializers.ChoiceField(choices=ARCHITECTURES, default='cnn')
    channels = serializers.ListField(
        child=serializers.IntegerField(min_value=1), min_length=1,
        default=lambda: list(domain_setting('CNN_CHANNELS', [32, 64, 128, 256])),
    )
    neurons = serializers.ListField(
        child=serializers.IntegerField(min_value=1), min_length=1,
        default=lambda: list(domain_setting('FNN_NEURONS', [1000, 1000, 1000, 1000])),
    )
    leaky_slope = serializers.FloatField(min_value=0.0, default=0.01)
    hidden_head = serializers.IntegerField(min_value=1, allow_null=True, default=None)
    dtype = serializers.ChoiceField(choices=('float32', 'float64'), default='float32')


class FilterSerializer(StrictSerializer):
    w_a = serializers.FloatField(min_value=0.0, allow_null=True, default=None)
    w_b = serializers.FloatField(min_value=0.0, allow_null=True, default=None)


class TrainRunConfigSerializer(StrictSerializer):
    name = serializers.CharField(required=False)
    instance = InstanceSerializer()
    betas = serializers.ListField(
        child=serializers.FloatField(min_value=0.0), min_length=1,
        default=lambda: list(domain_setting('DEFAULT_BETAS', [5.2, 18.0, 35.0])),
    )
    seeds = serializers.ListField(child=serializers.IntegerField(min_value=0), min_length=1, default=lambda: [0])
    environment = EnvironmentSerializer(required=False)
    noise = NoiseSerializer(required=False)
    agent = AgentSerializer(required=False)
    network = NetworkSerializer(required=False)
    filter = FilterSerializer(required=False)
    output_dir = serializers.CharField(default=lambda: str(settings.OUTPUT_DIR))
    wall_clock_hours = serializers.FloatField(min_value=0.0, default=_setting('WALL_CLOCK_HOURS', 48.0))
    jobs = serializers.IntegerField(min_value=1, default=lambda: getattr(settings, 'THREADS', 1))

    def validate_betas(self, value):
        if any(beta <= 0 for beta in value):
            raise serializers.ValidationError('Training needs beta > 0.')
        return value


class CompareRunConfigSerializer(TrainRunConfigSerializer):
    architectures = serializers.ListField(
        child=serializers.ChoiceField(choices=ARCHITECTURES), min_length=1, default=lambda: list(ARCHITECTURES)
    )


def deep_merge(base: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in overrides.items():
        if isinstance(value, Mapping) and isinstance(merged.get(key), Mapping):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def read_config_document(path: Optional[Union[str, Path]]) -> Dict[str, Any]:
    if path is None:
        return {}
    try:
        document = yaml.safe_load(Path(path).read_text())
    except yaml.YAMLError as exc:
        raise InvalidArgumentError(f'Config {path} is not valid YAML: {exc}') from exc
    if document is None:
        return {}
    if not isinstance(document, Mapping):
        raise InvalidArgumentError(f'Config {path} must be a mapping at the top level')
    return dict(document)


def resolve_run_config(
    serializer_class: Type[serializers.Serializer],
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> Dict[str, Any]:
    """Load, merge CLI overrides into, and validate a run config; raises ValidationError"""
    document = deep_merge(read_config_document(path), overrides or {})
    serializer = serializer_class(data=document)
    serializer.is_valid(raise_exception=True)
    return to_jsonable(serializer.validated_data)
