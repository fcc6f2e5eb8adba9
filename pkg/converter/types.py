"""
Converter domain types

Plain dataclasses shared by the stimulus, pipeline, correction and bias
services. Validation lives in ``validate()`` so that presets, the INI loader
and the API serializers all reject the same inputs.
"""

from dataclasses import dataclass, field, asdict
from typing import Iterator, List, Optional, Tuple

import numpy as np

from .constants import (
    GM_MODEL_VALUES,
    N_STAGES,
    STAGE_SCALES,
    STIMULUS_KIND_VALUES,
)
from .exceptions import BiasError, CorrectionError, PipelineError, StimulusError


@dataclass
class StimulusSpec:
    """Analog test signal request"""
    kind: str = 'sine'
    amplitude: float = 1.0  # volts, differential half-swing
    frequency_hz: float = 10e6
    phase_rad: float = 0.0
    dc_offset: float = 0.0
    n_samples: int = 8192
    jitter_sigma: float = 0.0  # seconds RMS
    rng_seed: int = 0

    def validate(self, spectral: bool = False):
        if self.kind not in STIMULUS_KIND_VALUES:
            raise StimulusError(f"unknown stimulus kind '{self.kind}'")
        if self.amplitude < 0:
            raise StimulusError(f"amplitude must be >= 0, got {self.amplitude}")
        if self.jitter_sigma < 0:
            raise StimulusError(f"jitter_sigma must be >= 0, got {self.jitter_sigma}")
        if self.n_samples < 16:
            raise StimulusError(f"n_samples must be >= 16, got {self.n_samples}")
        if spectral and not is_power_of_two(self.n_samples):
            raise StimulusError(f"n_samples must be a power of two for spectral use, got {self.n_samples}")
        if self.frequency_hz < 0:
            raise StimulusError(f"frequency_hz must be >= 0, got {self.frequency_hz}")


@dataclass
class SampleStream:
    """Sampled differential input, one signed scalar per sample"""
    samples: np.ndarray
    sample_rate_hz: float
    # dV/dt at each sampling instant; None when only the levels are known
    slopes: Optional[np.ndarray] = None

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.slopes is not None:
            self.slopes = np.asarray(self.slopes, dtype=np.float64)
            if self.slopes.shape != self.samples.shape:
                raise StimulusError("slopes must align with samples")
        if not np.all(np.isfinite(self.samples)):
            raise StimulusError("sample stream contains non-finite values")

    def __len__(self):
        return len(self.samples)


@dataclass
class StageConfig:
    """One 1.5-bit MDAC stage"""
    cap_scale: float = 1.0
    bias_scale: float = 1.0
    comparator_offsets: Tuple[float, float] = (0.0, 0.0)
    gain_error: float = 0.0
    settle_epsilon: float = 0.0
    ktc_sigma: float = 0.0  # volts RMS, on top of the thermal share

    def validate(self, index: int = 0):
        label = f"stage {index}" if index else "stage"
        if self.cap_scale <= 0:
            raise PipelineError(f"{label}: cap_scale must be positive, got {self.cap_scale}")
        if self.bias_scale <= 0:
            raise PipelineError(f"{label}: bias_scale must be positive, got {self.bias_scale}")
        if not 0 <= self.settle_epsilon < 1:
            raise PipelineError(f"{label}: settle_epsilon must lie in [0, 1), got {self.settle_epsilon}")
        if self.ktc_sigma < 0:
            raise PipelineError(f"{label}: ktc_sigma must be >= 0, got {self.ktc_sigma}")
        if len(self.comparator_offsets) != 2 or not np.all(np.isfinite(self.comparator_offsets)):
            raise PipelineError(f"{label}: comparator_offsets must be two finite values")


@dataclass
class FrontEndConfig:
    """Input sampling switch and stage-1 sample-and-hold"""
    r_on_nominal: float = 0.0  # ohms
    r_on_cubic_coeff: float = 0.0
    track_time_constant_scale: float = 1.0
    thermal_sigma: float = 0.0  # volts RMS
    c_sample: float = 1e-12  # farads (C1)
    parasitic_cap_ratio: float = 0.0
    even_order_coeff: float = 0.0
    aperture_jitter: float = 0.0  # seconds RMS, sampling clock

    def validate(self):
        if self.r_on_nominal < 0:
            raise PipelineError(f"r_on_nominal must be >= 0, got {self.r_on_nominal}")
        if self.thermal_sigma < 0:
            raise PipelineError(f"thermal_sigma must be >= 0, got {self.thermal_sigma}")
        if self.c_sample <= 0:
            raise PipelineError(f"c_sample must be positive, got {self.c_sample}")
        if self.track_time_constant_scale < 0:
            raise PipelineError("track_time_constant_scale must be >= 0")
        if self.parasitic_cap_ratio < 0:
            raise PipelineError("parasitic_cap_ratio must be >= 0")
        if self.aperture_jitter < 0:
            raise PipelineError(f"aperture_jitter must be >= 0, got {self.aperture_jitter}")

    @property
    def nominal_time_constant(self) -> float:
        return self.r_on_nominal * self.c_sample * self.track_time_constant_scale


@dataclass
class BiasConfig:
    """Switched-capacitor bias generator and settling/power macro-model"""
    c_b: float = 1e-12  # farads
    v_bias: float = 1.0  # volts
    gm_model: str = 'sqrt'
    gbw_calibration: float = 12.0  # settling time constants at stage 1, nominal rate
    nominal_f_cr: float = 110e6
    power_slope: float = 0.65  # mW per MS/s
    power_intercept: float = 25.5  # mW

    def validate(self):
        if self.c_b <= 0:
            raise BiasError(f"c_b must be positive, got {self.c_b}")
        if self.v_bias <= 0:
            raise BiasError(f"v_bias must be positive, got {self.v_bias}")
        if self.gm_model not in GM_MODEL_VALUES:
            raise BiasError(f"unknown gm model '{self.gm_model}'")
        if self.gbw_calibration <= 0:
            raise BiasError("gbw_calibration must be positive")
        if self.nominal_f_cr <= 0:
            raise BiasError("nominal_f_cr must be positive")
        if self.power_slope < 0 or self.power_intercept < 0:
            raise BiasError("power model coefficients must be >= 0")


def default_stages() -> List[StageConfig]:
    return [StageConfig(cap_scale=scale, bias_scale=scale) for scale in STAGE_SCALES]


@dataclass
class AdcConfig:
    """Full converter parameterisation"""
    vref: float = 1.0
    stages: List[StageConfig] = field(default_factory=default_stages)
    flash_offsets: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    frontend: FrontEndConfig = field(default_factory=FrontEndConfig)
    bias: BiasConfig = field(default_factory=BiasConfig)
    rng_seed: int = 0
    ktc_share: float = 0.5

    def validate(self):
        if self.vref <= 0:
            raise PipelineError(f"vref must be positive, got {self.vref}")
        if len(self.stages) != N_STAGES:
            raise PipelineError(f"exactly {N_STAGES} stages required, got {len(self.stages)}")
        if len(self.flash_offsets) != 3:
            raise PipelineError("flash_offsets must hold three values")
        if self.ktc_share < 0:
            raise PipelineError("ktc_share must be >= 0")
        for index, stage in enumerate(self.stages, start=1):
            stage.validate(index)
        self.frontend.validate()
        self.bias.validate()
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> 'AdcConfig':
        data = dict(data)
        stages = [
            StageConfig(**{**stage, 'comparator_offsets': tuple(stage.get('comparator_offsets', (0.0, 0.0)))})
            for stage in data.pop('stages', [])
        ] or default_stages()
        return cls(
            stages=stages,
            flash_offsets=tuple(data.pop('flash_offsets', (0.0, 0.0, 0.0))),
            frontend=FrontEndConfig(**data.pop('frontend', {})),
            bias=BiasConfig(**data.pop('bias', {})),
            **data,
        )


@dataclass(frozen=True)
class RawCodeFrame:
    """Ten stage decisions plus the flash code for one conversion"""
    stage_codes: Tuple[int, ...]
    flash_code: int

    def __post_init__(self):
        if len(self.stage_codes) != N_STAGES:
            raise PipelineError(f"frame must carry {N_STAGES} stage codes")
        if any(code not in (0, 1, 2) for code in self.stage_codes):
            raise PipelineError(f"stage codes out of range: {self.stage_codes}")
        if self.flash_code not in (0, 1, 2, 3):
            raise PipelineError(f"flash code out of range: {self.flash_code}")


class RawCodeFrames:
    """
    Column store for a converted stream.

    Behaves as a read-only sequence of RawCodeFrame while keeping the stage
    decisions in one (n, 10) array so correction and metrics stay vectorised.
    """

    def __init__(self, stage_codes: np.ndarray, flash_codes: np.ndarray, saturation_count: int = 0):
        self.stage_codes = np.asarray(stage_codes, dtype=np.int8).reshape(-1, N_STAGES)
        self.flash_codes = np.asarray(flash_codes, dtype=np.int8).reshape(-1)
        if len(self.stage_codes) != len(self.flash_codes):
            raise PipelineError("stage and flash code columns differ in length")
        self.saturation_count = int(saturation_count)

    @classmethod
    def from_frames(cls, frames) -> 'RawCodeFrames':
        frames = list(frames)
        if not frames:
            return cls(np.empty((0, N_STAGES)), np.empty(0))
        return cls(
            np.array([frame.stage_codes for frame in frames]),
            np.array([frame.flash_code for frame in frames]),
        )

    def __len__(self):
        return len(self.flash_codes)

    def __getitem__(self, index: int) -> RawCodeFrame:
        return RawCodeFrame(
            stage_codes=tuple(int(code) for code in self.stage_codes[index]),
            flash_code=int(self.flash_codes[index]),
        )

    def __iter__(self) -> Iterator[RawCodeFrame]:
        for index in range(len(self)):
            yield self[index]

    def __eq__(self, other):
        if not isinstance(other, RawCodeFrames):
            return NotImplemented
        return (
            np.array_equal(self.stage_codes, other.stage_codes)
            and np.array_equal(self.flash_codes, other.flash_codes)
        )


@dataclass(frozen=True)
class OutputCode:
    """Corrected 12-bit converter output"""
    value: int

    def __post_init__(self):
        if not 0 <= self.value <= 4095:
            raise CorrectionError(f"output code {self.value} outside [0, 4095]")

    def __int__(self):
        return self.value


def is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0
