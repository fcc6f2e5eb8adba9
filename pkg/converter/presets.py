"""
Converter presets

``ideal`` switches every non-ideality off. ``silicon`` carries the front-end
and bias structure of the fabricated die together with first estimates of
the four calibration knobs (thermal noise, switch curvature, even-order
term and aperture jitter); ``calibrate`` refines them against the measured
figures.
"""

from typing import Callable, Dict

from converter.exceptions import ConfigurationError
from converter.types import AdcConfig, BiasConfig, FrontEndConfig, default_stages

# Stage-1 settling time constants at the nominal rate. Settling error in a
# 1.5-bit chain lands mostly on HD3, in phase with the sampler's static
# cubic, so the 140 MS/s error is capped by the headroom between the 70 dB
# SFDR operating point and the 69 dB floor: about 0.5 dB of SFDR for a
# 0.1 to 0.2 dB SNDR drop past 120 MS/s.
SILICON_SETTLING_CONSTANTS = 10.5


def ideal() -> AdcConfig:
    return AdcConfig(
        stages=default_stages(),
        frontend=FrontEndConfig(),
        bias=BiasConfig(gm_model='ideal'),
    )


def silicon() -> AdcConfig:
    frontend = FrontEndConfig(
        # 25 ohm x 1 pF x 2 gives a 50 ps tracking time constant
        r_on_nominal=25.0,
        c_sample=1e-12,
        track_time_constant_scale=2.0,
        parasitic_cap_ratio=0.0042,
        # 66.9 dB SNR at -0.1 dBFS after the quantization floor
        thermal_sigma=2.69e-4,
        # HD3 at -70 dBc, about 0.75 dynamic to 1 static at 10 MHz
        r_on_cubic_coeff=0.24,
        # HD2 at about -74 dBc closes the SNR to SNDR gap
        even_order_coeff=-4.2e-4,
        # 66.3 dB SNR at 100 MHz on top of the thermal floor
        aperture_jitter=2.76e-13,
    )
    return AdcConfig(
        stages=default_stages(),
        frontend=frontend,
        # settling error ~2.8e-5 at 110 MS/s, ~9e-5 at 140 MS/s
        bias=BiasConfig(gm_model='sqrt', gbw_calibration=SILICON_SETTLING_CONSTANTS),
    )


PRESETS: Dict[str, Callable[[], AdcConfig]] = {
    'ideal': ideal,
    'silicon': silicon,
}


def get_preset(name: str) -> AdcConfig:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ConfigurationError(f"unknown preset '{name}', expected one of {sorted(PRESETS)}")
