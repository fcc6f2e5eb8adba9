"""
Bias Service
Switched-capacitor bias current, stage scaling, settling error and the
power macro-model
"""

import logging
import math
from typing import List, Optional

from django.conf import settings

from converter.constants import GM_EXPONENTS, N_STAGES, STAGE_SCALES
from converter.exceptions import BiasError
from converter.types import BiasConfig

logger = logging.getLogger(__name__)


def bias_current(c_b: float, f_cr: float, v_bias: float) -> float:
    """I = C_B * f_CR * V_BIAS"""
    if c_b <= 0 or f_cr <= 0 or v_bias <= 0:
        raise BiasError(f"bias current inputs must be positive (c_b={c_b}, f_cr={f_cr}, v_bias={v_bias})")
    return c_b * f_cr * v_bias


def stage_scales() -> List[float]:
    return list(STAGE_SCALES)


def settle_epsilon(stage_index: int, f_cr: float, cfg: BiasConfig,
                   cap_scale: Optional[float] = None, bias_scale: Optional[float] = None) -> float:
    """
    Fractional residue settling error exp(-t_s / tau) for one stage.

    t_s is the full half clock period. tau follows C_H / gm with gm driven by
    the switched-capacitor bias current of the stage, so with cap and bias
    scaled together every stage settles alike. ``gbw_calibration`` pins
    t_s / tau at stage 1 and the nominal rate.
    """
    if not 1 <= stage_index <= N_STAGES:
        raise BiasError(f"stage index must lie in 1..{N_STAGES}, got {stage_index}")
    if f_cr <= 0:
        raise BiasError(f"conversion rate must be positive, got {f_cr}")
    if cfg.gm_model == 'ideal':
        return 0.0
    if cfg.gm_model not in GM_EXPONENTS:
        raise BiasError(f"unknown gm model '{cfg.gm_model}'")

    default_scale = STAGE_SCALES[stage_index - 1]
    cap_scale = default_scale if cap_scale is None else cap_scale
    bias_scale = default_scale if bias_scale is None else bias_scale

    current = bias_current(cfg.c_b, f_cr, cfg.v_bias)
    nominal_current = bias_current(cfg.c_b, cfg.nominal_f_cr, cfg.v_bias)

    # gm_i = bias_scale * gm_unit(I); device width scales with the stage
    gm_ratio = bias_scale * (current / nominal_current) ** GM_EXPONENTS[cfg.gm_model]
    settling_constants = cfg.gbw_calibration * (cfg.nominal_f_cr / f_cr) * gm_ratio / cap_scale

    return math.exp(-settling_constants)


def power_mw(f_cr: float, cfg: Optional[BiasConfig] = None) -> float:
    """Supply power in mW, linear in the conversion rate given in Hz"""
    if f_cr < 0:
        raise BiasError(f"conversion rate must be >= 0, got {f_cr}")
    if cfg is None:
        slope = getattr(settings, 'POWER_SLOPE_MW_PER_MSPS', 0.65)
        intercept = getattr(settings, 'POWER_INTERCEPT_MW', 25.5)
    else:
        slope, intercept = cfg.power_slope, cfg.power_intercept
    return intercept + slope * (f_cr / 1e6)
