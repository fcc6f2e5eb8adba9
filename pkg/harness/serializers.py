from dataclasses import replace

from rest_framework import serializers

from converter.constants import GM_MODELS, N_STAGES, STIMULUS_KINDS
from converter.exceptions import SimulationError
from converter.presets import PRESETS, get_preset
from converter.services.stimulus import dbfs_to_amplitude
from harness.services.runner import MODES, RunSpec
from .models import SimulationRun


def _offsets(value, count, label):
    if len(value) != count:
        raise serializers.ValidationError(f"{label} must hold {count} values")
    return tuple(float(item) for item in value)


class StageSerializer(serializers.Serializer):
    """
    Overrides for one MDAC stage; omitted fields keep the preset value
    """
    cap_scale = serializers.FloatField(min_value=0, required=False)
    bias_scale = serializers.FloatField(min_value=0, required=False)
    comparator_offsets = serializers.ListField(child=serializers.FloatField(), required=False)
    gain_error = serializers.FloatField(required=False)
    settle_epsilon = serializers.FloatField(min_value=0, max_value=0.999999, required=False)
    ktc_sigma = serializers.FloatField(min_value=0, required=False)

    def validate_comparator_offsets(self, value):
        return _offsets(value, 2, 'comparator_offsets')

    def validate_cap_scale(self, value):
        if value <= 0:
            raise serializers.ValidationError("cap_scale must be positive")
        return value

    def validate_bias_scale(self, value):
        if value <= 0:
            raise serializers.ValidationError("bias_scale must be positive")
        return value


class FrontEndSerializer(serializers.Serializer):
    r_on_nominal = serializers.FloatField(min_value=0, required=False)
    r_on_cubic_coeff = serializers.FloatField(required=False)
    track_time_constant_scale = serializers.FloatField(min_value=0, required=False)
    thermal_sigma = serializers.FloatField(min_value=0, required=False)
    c_sample = serializers.FloatField(min_value=0, required=False)
    parasitic_cap_ratio = serializers.FloatField(min_value=0, required=False)
    even_order_coeff = serializers.FloatField(required=False)
    aperture_jitter = serializers.FloatField(min_value=0, required=False)


class BiasSerializer(serializers.Serializer):
    c_b = serializers.FloatField(min_value=0, required=False)
    v_bias = serializers.FloatField(min_value=0, required=False)
    gm_model = serializers.ChoiceField(choices=GM_MODELS, required=False)
    gbw_calibration = serializers.FloatField(min_value=0, required=False)
    nominal_f_cr = serializers.FloatField(min_value=0, required=False)
    power_slope = serializers.FloatField(min_value=0, required=False)
    power_intercept = serializers.FloatField(min_value=0, required=False)


class AdcConfigSerializer(serializers.Serializer):
    """
    Converter parameters as an overlay on a named preset.

    ``stages`` may be shorter than ten entries; missing stages keep the
    preset values.
    """
    preset = serializers.ChoiceField(choices=[(name, name) for name in PRESETS], default='silicon')
    vref = serializers.FloatField(min_value=0, required=False)
    flash_offsets = serializers.ListField(child=serializers.FloatField(), required=False)
    ktc_share = serializers.FloatField(min_value=0, required=False)
    rng_seed = serializers.IntegerField(min_value=0, required=False)
    frontend = FrontEndSerializer(required=False)
    bias = BiasSerializer(required=False)
    stages = StageSerializer(many=True, required=False)

    def validate_flash_offsets(self, value):
        return _offsets(value, 3, 'flash_offsets')

    def validate_stages(self, value):
        if len(value) > N_STAGES:
            raise serializers.ValidationError(f"at most {N_STAGES} stages")
        return value

    def build(self):
        """AdcConfig from validated data"""
        data = dict(self.validated_data)
        cfg = get_preset(data.pop('preset', 'silicon'))
        frontend = data.pop('frontend', None)
        bias = data.pop('bias', None)
        stages = data.pop('stages', None)
        if frontend:
            cfg = replace(cfg, frontend=replace(cfg.frontend, **frontend))
        if bias:
            cfg = replace(cfg, bias=replace(cfg.bias, **bias))
        if stages:
            merged = list(cfg.stages)
            for index, overrides in enumerate(stages):
                merged[index] = replace(merged[index], **overrides)
            cfg = replace(cfg, stages=merged)
        cfg = replace(cfg, **data)
        try:
            return cfg.validate()
        except SimulationError as exc:
            raise serializers.ValidationError(str(exc))


class StimulusSerializer(serializers.Serializer):
    kind = serializers.ChoiceField(choices=STIMULUS_KINDS, default='sine')
    amplitude_dbfs = serializers.FloatField(max_value=6.0, required=False)
    amplitude = serializers.FloatField(min_value=0, required=False)
    frequency_hz = serializers.FloatField(min_value=0, required=False)
    phase_rad = serializers.FloatField(required=False)
    dc_offset = serializers.FloatField(required=False)
    jitter_sigma = serializers.FloatField(min_value=0, required=False)

    def validate(self, attrs):
        if 'amplitude' in attrs and 'amplitude_dbfs' in attrs:
            raise serializers.ValidationError("give amplitude or amplitude_dbfs, not both")
        return attrs


class RunSpecSerializer(serializers.Serializer):
    """
    Serializer for a complete simulation request
    """
    mode = serializers.ChoiceField(choices=MODES, default='single')
    adc = AdcConfigSerializer(required=False)
    stimulus = StimulusSerializer(required=False)
    f_cr = serializers.FloatField(min_value=1e6, required=False)
    record_length = serializers.IntegerField(min_value=16, required=False)
    area_mm2 = serializers.FloatField(min_value=0, required=False)
    seed = serializers.IntegerField(min_value=0, required=False)
    seeds = serializers.ListField(child=serializers.IntegerField(min_value=0), required=False)

    def validate_record_length(self, value):
        if value & (value - 1):
            raise serializers.ValidationError("record_length must be a power of two")
        return value

    def build(self) -> RunSpec:
        """RunSpec from validated data, defaults from settings"""
        data = self.validated_data
        adc_serializer = AdcConfigSerializer(data=self.initial_data.get('adc', {}))
        adc_serializer.is_valid(raise_exception=True)

        spec = RunSpec(mode=data.get('mode', 'single'), adc=adc_serializer.build())
        for name in ('f_cr', 'record_length', 'area_mm2'):
            if name in data:
                spec = replace(spec, **{name: data[name]})

        stimulus = dict(data.get('stimulus', {}))
        if 'amplitude_dbfs' in stimulus:
            stimulus['amplitude'] = dbfs_to_amplitude(stimulus.pop('amplitude_dbfs'), spec.adc.vref)
        spec = replace(spec, stimulus=replace(spec.stimulus, n_samples=spec.record_length, **stimulus))

        if 'seed' in data:
            spec = spec.with_seed(data['seed'])
        if data.get('seeds'):
            spec = replace(spec, seeds=list(data['seeds']))
        try:
            return spec.validate()
        except SimulationError as exc:
            raise serializers.ValidationError(str(exc))


class SimulationRunSerializer(serializers.ModelSerializer):
    class Meta:
        model = SimulationRun
        fields = [
            'id', 'mode', 'seed', 'f_cr_hz', 'f_in_hz', 'record_length',
            'snr_db', 'sndr_db', 'sfdr_db', 'enob', 'fom', 'created_at'
        ]


class SimulationRunDetailSerializer(serializers.ModelSerializer):
    class Meta:
        model = SimulationRun
        fields = [
            'id', 'mode', 'seed', 'f_cr_hz', 'f_in_hz', 'record_length',
            'snr_db', 'sndr_db', 'sfdr_db', 'enob', 'fom', 'config', 'report', 'created_at'
        ]
