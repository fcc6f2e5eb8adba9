"""
Spectral Metrics Service
Rectangular-window FFT metrics for coherently sampled records
"""

import logging
from dataclasses import dataclass, field, asdict
from typing import Dict, Sequence

import numpy as np

from converter.constants import MID_CODE
from converter.exceptions import MetricsError
from converter.types import is_power_of_two

logger = logging.getLogger(__name__)

N_HARMONICS = 10
# Full-scale sine power on the +/-1 scale
FULL_SCALE_POWER = 0.5
# Signal bin must stand this far above the mean of the other AC bins
SIGNAL_PRESENCE_RATIO = 100.0


@dataclass
class SpectralMetrics:
    """Dynamic performance of one record"""
    snr_db: float
    sndr_db: float
    sfdr_db: float
    thd_db: float
    enob_bits: float
    signal_bin: int
    signal_power_dbfs: float
    noise_power: float = 0.0
    dc_power: float = 0.0
    spur_bin: int = 0
    harmonic_powers: Dict[int, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        data = asdict(self)
        data['harmonic_powers'] = {str(order): power for order, power in self.harmonic_powers.items()}
        return data


def _db(ratio: float) -> float:
    return float(10 * np.log10(ratio)) if ratio > 0 else float('-inf')


def enob_from_sndr(sndr_db: float) -> float:
    return (sndr_db - 1.76) / 6.02


def sndr_from_enob(enob_bits: float) -> float:
    return 6.02 * enob_bits + 1.76


def spectrum(codes: Sequence[int]) -> np.ndarray:
    """
    One-sided power spectrum of a code record, bins 0..N/2.

    Codes are centred on midscale and scaled to +/-1 full scale. Bin powers
    sum to the mean square of the scaled record.
    """
    x = np.asarray(codes, dtype=np.float64)
    n = len(x)
    if not is_power_of_two(n):
        raise MetricsError(f"record length must be a power of two, got {n}")

    scaled = (x - MID_CODE) / MID_CODE
    power = np.abs(np.fft.rfft(scaled)) ** 2 / n ** 2
    power[1:n // 2] *= 2.0
    return power


def harmonic_bins(signal_bin: int, n_samples: int, n_harmonics: int = N_HARMONICS) -> Dict[int, int]:
    """Aliased bin of each harmonic order 2..n_harmonics, folded into [0, N/2]"""
    bins = {}
    for order in range(2, n_harmonics + 1):
        k = (order * signal_bin) % n_samples
        if k > n_samples // 2:
            k = n_samples - k
        bins[order] = k
    return bins


def dynamic_metrics(codes: Sequence[int], signal_bin: int) -> SpectralMetrics:
    """
    SNR, SNDR, SFDR, THD and ENOB of a coherent record.

    SNR excludes DC, the signal and harmonics 2..10. SNDR excludes DC and
    the signal only. SFDR compares the signal with the largest non-DC,
    non-signal bin.
    """
    power = spectrum(codes)
    n = len(codes)
    if not 0 < signal_bin <= n // 2:
        raise MetricsError(f"no signal: bin {signal_bin} is not a valid signal bin for N={n}")

    signal_power = float(power[signal_bin])
    ac = power.copy()
    dc_power = float(ac[0])
    ac[0] = 0.0
    ac[signal_bin] = 0.0
    others = ac[1:]
    mean_other = float(others.sum()) / max(len(others) - 1, 1)
    if signal_power <= 0 or signal_power <= SIGNAL_PRESENCE_RATIO * mean_other:
        raise MetricsError(
            f"no signal: bin {signal_bin} holds {signal_power:.3e}, mean AC bin {mean_other:.3e}"
        )

    orders = harmonic_bins(signal_bin, n)
    harmonic_powers = {}
    counted = set()
    for order, k in orders.items():
        if k in (0, signal_bin):
            continue
        harmonic_powers[order] = float(power[k])
        counted.add(k)
    distortion = float(sum(power[k] for k in counted))

    noise_and_distortion = float(ac.sum())
    noise = max(noise_and_distortion - distortion, 0.0)
    spur_bin = int(np.argmax(ac))
    spur_power = float(ac[spur_bin])

    sndr_db = _db(signal_power / noise_and_distortion) if noise_and_distortion > 0 else float('inf')
    metrics = SpectralMetrics(
        snr_db=_db(signal_power / noise) if noise > 0 else float('inf'),
        sndr_db=sndr_db,
        sfdr_db=_db(signal_power / spur_power) if spur_power > 0 else float('inf'),
        thd_db=_db(distortion / signal_power) if distortion > 0 else float('-inf'),
        enob_bits=enob_from_sndr(sndr_db),
        signal_bin=int(signal_bin),
        signal_power_dbfs=_db(signal_power / FULL_SCALE_POWER),
        noise_power=noise,
        dc_power=dc_power,
        spur_bin=spur_bin,
        harmonic_powers=harmonic_powers,
    )
    logger.debug(
        f"Bin {signal_bin}: SNR {metrics.snr_db:.2f} dB, SNDR {metrics.sndr_db:.2f} dB, "
        f"SFDR {metrics.sfdr_db:.2f} dB (spur bin {spur_bin})"
    )
    return metrics
