"""
Stimulus Service
Coherently sampled sine and ramp sources with optional aperture jitter
"""

import logging
from typing import Tuple

import numpy as np

from converter.exceptions import StimulusError
from converter.types import SampleStream, StimulusSpec, is_power_of_two
from converter.utils.rng import STIMULUS_STREAM, seeded_generator

logger = logging.getLogger(__name__)


def _candidate_bins(n_samples: int) -> np.ndarray:
    """Odd bins below N/2 that share no factor with N"""
    bins = np.arange(1, n_samples // 2, 2)
    return bins[np.gcd(bins, n_samples) == 1]


def _nearest_bin(candidates: np.ndarray, exact: float) -> int:
    distance = np.abs(candidates - exact)
    # Ties go to the higher bin
    best = np.flatnonzero(distance == distance.min())[-1]
    return int(candidates[best])


def coherent_bin(sample_rate_hz: float, target_freq_hz: float, n_samples: int) -> Tuple[float, int]:
    """
    Pick the realizable coherent frequency nearest to a target.

    Returns (actual_freq_hz, bin_index) where bin_index is odd, coprime with
    n_samples and strictly below n_samples / 2.
    """
    if not is_power_of_two(n_samples):
        raise StimulusError(f"n_samples must be a power of two, got {n_samples}")
    if sample_rate_hz <= 0:
        raise StimulusError(f"sample rate must be positive, got {sample_rate_hz}")
    if not 0 < target_freq_hz < sample_rate_hz / 2:
        raise StimulusError(
            f"no coherent bin: {target_freq_hz:.6g} Hz is outside (0, {sample_rate_hz / 2:.6g}) Hz"
        )

    candidates = _candidate_bins(n_samples)
    if candidates.size == 0:
        raise StimulusError(f"no coherent bin for a {n_samples}-point record")

    bin_index = _nearest_bin(candidates, target_freq_hz * n_samples / sample_rate_hz)
    actual = bin_index * sample_rate_hz / n_samples
    logger.debug(f"Coherent bin {bin_index} -> {actual:.6f} Hz (target {target_freq_hz:.6f} Hz)")
    return actual, bin_index


def folded_coherent_frequency(sample_rate_hz: float, target_freq_hz: float, n_samples: int) -> Tuple[float, int]:
    """
    Coherent frequency for targets anywhere on the axis, including
    under-sampled inputs above Nyquist.

    The target is folded into the first Nyquist zone, snapped to the nearest
    odd coprime bin and unfolded again, so the returned bin is where the tone
    lands in the captured spectrum.
    """
    if not is_power_of_two(n_samples):
        raise StimulusError(f"n_samples must be a power of two, got {n_samples}")
    if sample_rate_hz <= 0:
        raise StimulusError(f"sample rate must be positive, got {sample_rate_hz}")
    if target_freq_hz < 0:
        raise StimulusError(f"target frequency must be >= 0, got {target_freq_hz}")

    candidates = _candidate_bins(n_samples)
    if candidates.size == 0:
        raise StimulusError(f"no coherent bin for a {n_samples}-point record")

    zone = int(round(target_freq_hz / sample_rate_hz))
    offset = target_freq_hz - zone * sample_rate_hz
    bin_index = _nearest_bin(candidates, abs(offset) * n_samples / sample_rate_hz)

    sign = 1.0 if offset >= 0 else -1.0
    actual = zone * sample_rate_hz + sign * bin_index * sample_rate_hz / n_samples
    if actual <= 0:
        actual = bin_index * sample_rate_hz / n_samples

    if zone:
        logger.debug(
            f"Under-sampled input {target_freq_hz:.6g} Hz folds to bin {bin_index} "
            f"(actual {actual:.6f} Hz, Nyquist zone {zone})"
        )
    return actual, bin_index


def gen_sine(spec: StimulusSpec, sample_rate_hz: float) -> SampleStream:
    """
    Sample dc + A*sin(2*pi*f*(k/fs + d_k) + phase) with d_k ~ N(0, jitter_sigma).

    The analytic slope at the jittered instant travels with the samples so
    the front end can model tracking without finite differences.
    """
    if spec.kind != 'sine':
        raise StimulusError(f"gen_sine requires a sine spec, got '{spec.kind}'")
    spec.validate()
    if sample_rate_hz <= 0:
        raise StimulusError(f"sample rate must be positive, got {sample_rate_hz}")

    instants = np.arange(spec.n_samples, dtype=np.float64) / sample_rate_hz
    if spec.jitter_sigma > 0:
        rng = seeded_generator(spec.rng_seed, STIMULUS_STREAM)
        instants = instants + rng.standard_normal(spec.n_samples) * spec.jitter_sigma

    omega = 2.0 * np.pi * spec.frequency_hz
    angle = omega * instants + spec.phase_rad
    samples = spec.dc_offset + spec.amplitude * np.sin(angle)
    slopes = spec.amplitude * omega * np.cos(angle)

    return SampleStream(samples=samples, sample_rate_hz=sample_rate_hz, slopes=slopes)


def gen_ramp(n_samples: int, lo_volts: float, hi_volts: float, sample_rate_hz: float = 1.0) -> SampleStream:
    """n uniformly spaced levels from lo to hi inclusive"""
    if lo_volts >= hi_volts:
        raise StimulusError(f"ramp requires lo < hi, got lo={lo_volts}, hi={hi_volts}")
    if n_samples < 2:
        raise StimulusError(f"ramp needs at least 2 points, got {n_samples}")

    samples = np.linspace(lo_volts, hi_volts, n_samples)
    # Static levels: the converter sees each point as a settled DC input
    return SampleStream(samples=samples, sample_rate_hz=sample_rate_hz, slopes=np.zeros(n_samples))


def gen_stimulus(spec: StimulusSpec, sample_rate_hz: float) -> SampleStream:
    if spec.kind == 'ramp':
        spec.validate()
        return gen_ramp(
            spec.n_samples,
            spec.dc_offset - spec.amplitude,
            spec.dc_offset + spec.amplitude,
            sample_rate_hz=sample_rate_hz,
        )
    return gen_sine(spec, sample_rate_hz)


def dbfs_to_amplitude(level_dbfs: float, vref: float = 1.0) -> float:
    return vref * 10 ** (level_dbfs / 20.0)
