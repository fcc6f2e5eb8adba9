"""
Correction Service
Redundant signed-digit alignment of the stage decisions into a 12-bit code
"""

import logging
from dataclasses import replace
from typing import Iterable, Tuple, Union

import numpy as np

from converter.constants import MAX_CODE, N_STAGES, STAGE_WEIGHTS
from converter.exceptions import CorrectionError
from converter.services.pipeline import convert_stream
from converter.services.stimulus import gen_ramp
from converter.types import AdcConfig, OutputCode, RawCodeFrame, RawCodeFrames

logger = logging.getLogger(__name__)

_WEIGHTS = np.array(STAGE_WEIGHTS, dtype=np.int64)


def correct(frame: RawCodeFrame) -> OutputCode:
    """Sum of stage_code_i * 2^(11 - i) plus the flash code, clamped to [0, 4095]"""
    if len(frame.stage_codes) != N_STAGES:
        raise CorrectionError(f"frame must carry {N_STAGES} stage codes")
    value = sum(code * weight for code, weight in zip(frame.stage_codes, STAGE_WEIGHTS)) + frame.flash_code
    return OutputCode(min(max(int(value), 0), MAX_CODE))


def correct_stream(frames: Union[RawCodeFrames, Iterable[RawCodeFrame]]) -> np.ndarray:
    """
    Element-wise ``correct`` over a stream.

    Returns the output code values as an integer array aligned with the
    frames.
    """
    if not isinstance(frames, RawCodeFrames):
        frames = RawCodeFrames.from_frames(frames)
    if len(frames) == 0:
        return np.empty(0, dtype=np.int64)

    values = frames.stage_codes.astype(np.int64) @ _WEIGHTS + frames.flash_codes.astype(np.int64)
    clamped = int(np.count_nonzero((values < 0) | (values > MAX_CODE)))
    if clamped:
        logger.debug(f"Output clamp engaged on {clamped} codes")
    return np.clip(values, 0, MAX_CODE)


def noiseless(cfg: AdcConfig) -> AdcConfig:
    """Copy of ``cfg`` with every random contribution switched off"""
    return replace(
        cfg,
        stages=[replace(stage, ktc_sigma=0.0) for stage in cfg.stages],
        frontend=replace(cfg.frontend, thermal_sigma=0.0),
    )


def transfer_codes(cfg: AdcConfig, n_points: int, lo_volts: float = None,
                   hi_volts: float = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Static transfer of the noiseless converter on a uniform ramp.

    Returns (levels, codes). The ramp is static, so the front end sees
    settled DC levels and only static non-idealities show.
    """
    lo_volts = -cfg.vref if lo_volts is None else lo_volts
    hi_volts = cfg.vref if hi_volts is None else hi_volts
    stream = gen_ramp(n_points, lo_volts, hi_volts, sample_rate_hz=cfg.bias.nominal_f_cr)
    codes = correct_stream(convert_stream(stream, noiseless(cfg)))
    return stream.samples, codes

