"""
Pipeline Service
Front-end sampler, ten 1.5-bit MDAC stages and the 2-bit flash

Every operation accepts scalars or numpy arrays. Streams are converted a
block of samples at a time with one stage evaluated across the whole block,
which keeps the per-sample noise order identical to sample-by-sample
conversion with the same generator.
"""

import logging
import math
from typing import List, Optional, Tuple

import numpy as np

from converter.constants import N_STAGES, NOISE_DRAWS_PER_SAMPLE, RESIDUE_CLAMP
from converter.exceptions import PipelineError
from converter.services.bias import settle_epsilon
from converter.types import (
    AdcConfig,
    FrontEndConfig,
    RawCodeFrame,
    RawCodeFrames,
    SampleStream,
    StageConfig,
)
from converter.utils.rng import PIPELINE_STREAM, seeded_generator

logger = logging.getLogger(__name__)

BLOCK_SIZE = 65536


def _scalar_or_array(value: np.ndarray, scalar: bool, cast=float):
    return cast(value) if scalar else value


def adsc_decide(v, vref: float, offsets) -> int:
    """1.5-bit sub-converter: 2 above +vref/4, 0 below -vref/4, else 1"""
    scalar = np.ndim(v) == 0
    v = np.asarray(v, dtype=np.float64)
    upper = vref / 4 + offsets[1]
    lower = -vref / 4 + offsets[0]
    code = np.where(v > upper, 2, np.where(v < lower, 0, 1)).astype(np.int8)
    return _scalar_or_array(code, scalar, int)


def mdac_residue(v, code, stage: StageConfig, vref: float, noise_draw=0.0,
                 epsilon: Optional[float] = None):
    """
    r = clamp((2v - (code - 1) vref)(1 - eps)(1 + gain_error) + noise, +/- vref)

    ``epsilon`` overrides the stage's static settling error; the pipeline
    passes the combined static and bias-derived value.
    """
    scalar = np.ndim(v) == 0 and np.ndim(code) == 0 and np.ndim(noise_draw) == 0
    residue, _ = _residue(np.asarray(v, dtype=np.float64), np.asarray(code), stage, vref,
                          np.asarray(noise_draw, dtype=np.float64),
                          stage.settle_epsilon if epsilon is None else epsilon)
    return _scalar_or_array(residue, scalar)


def _residue(v, code, stage, vref, noise_draw, epsilon) -> Tuple[np.ndarray, np.ndarray]:
    ideal = 2.0 * v - (code - 1) * vref
    residue = ideal * (1.0 - epsilon) * (1.0 + stage.gain_error) + noise_draw
    limit = vref * RESIDUE_CLAMP
    clipped = np.abs(residue) > limit
    return np.clip(residue, -limit, limit), clipped


def frontend_sample(v_now, v_prev, fe: FrontEndConfig, f_cr: float, noise_draw=0.0,
                    vref: float = 1.0, slope=None):
    """
    Value held on the stage-1 sampling capacitor at the end of tracking.

    The input is treated as a ramp of slope ``slope`` across the half-period
    tracking window, starting from the previously held value. The switch
    on-resistance grows with (v/vref)^2, which makes the tracking lag
    signal dependent. The same curvature acting on the parasitic
    capacitance adds a static cubic term, and the transmission-gate
    imbalance adds a static even-order term.
    """
    if f_cr <= 0:
        raise PipelineError(f"conversion rate must be positive, got {f_cr}")

    scalar = np.ndim(v_now) == 0 and np.ndim(noise_draw) == 0
    v_now = np.asarray(v_now, dtype=np.float64)
    v_prev = np.asarray(v_prev, dtype=np.float64)
    curvature = fe.r_on_cubic_coeff * (v_now / vref) ** 2

    tau0 = fe.nominal_time_constant
    if tau0 > 0:
        half_period = 0.5 / f_cr
        if slope is None:
            slope = (v_now - v_prev) * f_cr
        tau = tau0 * (1.0 + curvature)
        settled = slope * tau
        start_error = v_now - slope * half_period - v_prev
        lag = settled + (start_error - settled) * np.exp(-half_period / tau)
    else:
        lag = 0.0

    sampled = (
        v_now
        - lag
        - fe.parasitic_cap_ratio * curvature * v_now
        + fe.even_order_coeff * v_now ** 2 / vref
        + noise_draw
    )
    return _scalar_or_array(sampled, scalar)


def flash_decide(v, vref: float, flash_offsets) -> int:
    """2-bit flash: number of thresholds {-vref/2, 0, +vref/2} at or below v"""
    scalar = np.ndim(v) == 0
    v = np.asarray(v, dtype=np.float64)
    thresholds = np.array([-vref / 2, 0.0, vref / 2]) + np.asarray(flash_offsets, dtype=np.float64)
    code = (v[..., np.newaxis] >= thresholds).sum(axis=-1).astype(np.int8)
    return _scalar_or_array(code, scalar, int)


def stage_noise_sigmas(cfg: AdcConfig) -> List[float]:
    """Per-stage sampling noise: explicit kT/C plus the stage's share of the thermal knob"""
    thermal = cfg.frontend.thermal_sigma * cfg.ktc_share
    return [
        math.hypot(stage.ktc_sigma, thermal / math.sqrt(stage.cap_scale))
        for stage in cfg.stages
    ]


def stage_epsilons(cfg: AdcConfig, f_cr: float) -> List[float]:
    epsilons = []
    for index, stage in enumerate(cfg.stages, start=1):
        dynamic = settle_epsilon(index, f_cr, cfg.bias, stage.cap_scale, stage.bias_scale)
        epsilons.append(1.0 - (1.0 - stage.settle_epsilon) * (1.0 - dynamic))
    return epsilons


def _convert_block(samples: np.ndarray, previous: np.ndarray, slopes: Optional[np.ndarray],
                   draws: np.ndarray, cfg: AdcConfig, f_cr: float,
                   epsilons: List[float], sigmas: List[float]):
    held = frontend_sample(
        samples, previous, cfg.frontend, f_cr,
        noise_draw=draws[:, 0] * cfg.frontend.thermal_sigma,
        vref=cfg.vref, slope=slopes,
    )

    stage_codes = np.empty((len(samples), N_STAGES), dtype=np.int8)
    saturated = np.zeros(len(samples), dtype=bool)
    residue = np.asarray(held, dtype=np.float64)
    for i, stage in enumerate(cfg.stages):
        code = adsc_decide(residue, cfg.vref, stage.comparator_offsets)
        stage_codes[:, i] = code
        residue, clipped = _residue(residue, code, stage, cfg.vref, draws[:, i + 1] * sigmas[i], epsilons[i])
        saturated |= clipped

    flash_codes = flash_decide(residue, cfg.vref, cfg.flash_offsets)
    return stage_codes, flash_codes, int(saturated.sum())


def convert_sample(v: float, cfg: AdcConfig, rng_state: np.random.Generator,
                   f_cr: Optional[float] = None, v_prev: Optional[float] = None,
                   slope: Optional[float] = None) -> RawCodeFrame:
    """
    Convert one sample, consuming one row of draws from ``rng_state``
    (front end first, then stages 1..10).
    """
    f_cr = cfg.bias.nominal_f_cr if f_cr is None else f_cr
    draws = rng_state.standard_normal((1, NOISE_DRAWS_PER_SAMPLE))
    stage_codes, flash_codes, _ = _convert_block(
        np.array([v], dtype=np.float64),
        np.array([v if v_prev is None else v_prev], dtype=np.float64),
        None if slope is None else np.array([slope], dtype=np.float64),
        draws, cfg, f_cr, stage_epsilons(cfg, f_cr), stage_noise_sigmas(cfg),
    )
    return RawCodeFrame(
        stage_codes=tuple(int(code) for code in stage_codes[0]),
        flash_code=int(flash_codes[0]),
    )


def convert_stream(stream: SampleStream, cfg: AdcConfig, f_cr: Optional[float] = None) -> RawCodeFrames:
    """
    Convert a whole stream with one generator seeded from ``cfg.rng_seed``.

    Frames align index-for-index with the input samples. ``f_cr`` defaults to
    the stream's sample rate.
    """
    cfg.validate()
    f_cr = stream.sample_rate_hz if f_cr is None else f_cr
    n = len(stream)
    if n == 0:
        return RawCodeFrames(np.empty((0, N_STAGES)), np.empty(0))

    rng = seeded_generator(cfg.rng_seed, PIPELINE_STREAM)
    epsilons = stage_epsilons(cfg, f_cr)
    sigmas = stage_noise_sigmas(cfg)
    samples = stream.samples
    previous = np.concatenate((samples[:1], samples[:-1]))

    stage_codes = np.empty((n, N_STAGES), dtype=np.int8)
    flash_codes = np.empty(n, dtype=np.int8)
    saturation_count = 0
    for start in range(0, n, BLOCK_SIZE):
        stop = min(start + BLOCK_SIZE, n)
        draws = rng.standard_normal((stop - start, NOISE_DRAWS_PER_SAMPLE))
        slopes = None if stream.slopes is None else stream.slopes[start:stop]
        codes, flash, saturated = _convert_block(
            samples[start:stop], previous[start:stop], slopes, draws, cfg, f_cr, epsilons, sigmas,
        )
        stage_codes[start:stop] = codes
        flash_codes[start:stop] = flash
        saturation_count += saturated

    if saturation_count:
        logger.warning(f"Residue saturated on {saturation_count} of {n} samples at f_cr={f_cr / 1e6:.3f} MS/s")
    logger.debug(f"Converted {n} samples (max settling error {max(epsilons):.3e})")

    return RawCodeFrames(stage_codes, flash_codes, saturation_count=saturation_count)
