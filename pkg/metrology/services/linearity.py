"""
Linearity Service
Static DNL/INL from sine-wave histograms and from uniform-ramp code density
"""

import logging
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from converter.constants import N_CODES
from converter.exceptions import MetricsError

logger = logging.getLogger(__name__)

MIN_HISTOGRAM_RECORD = 2 ** 18


@dataclass
class LinearityReport:
    """DNL and INL of codes 1..4094 in LSB"""
    dnl_lsb: np.ndarray
    inl_lsb: np.ndarray
    missing_codes: List[int] = field(default_factory=list)
    record_length: int = 0
    short_record: bool = False
    overdriven: bool = True
    method: str = 'histogram'

    @property
    def dnl_range(self):
        return float(self.dnl_lsb.min()), float(self.dnl_lsb.max())

    @property
    def inl_range(self):
        return float(self.inl_lsb.min()), float(self.inl_lsb.max())

    def to_dict(self, include_arrays: bool = True) -> dict:
        data = {
            'method': self.method,
            'record_length': self.record_length,
            'short_record': self.short_record,
            'overdriven': self.overdriven,
            'missing_codes': list(self.missing_codes),
            'dnl_min': self.dnl_range[0],
            'dnl_max': self.dnl_range[1],
            'inl_min': self.inl_range[0],
            'inl_max': self.inl_range[1],
        }
        if include_arrays:
            data['dnl_lsb'] = self.dnl_lsb.tolist()
            data['inl_lsb'] = self.inl_lsb.tolist()
        return data


def _code_counts(codes: Sequence[int], n_codes: int) -> np.ndarray:
    codes = np.asarray(codes, dtype=np.int64)
    if codes.size == 0:
        raise MetricsError("empty code record")
    if codes.min() < 0 or codes.max() >= n_codes:
        raise MetricsError(f"codes outside [0, {n_codes - 1}]")
    return np.bincount(codes, minlength=n_codes)


def _interior_missing(counts: np.ndarray) -> List[int]:
    interior = counts[1:-1]
    return [int(code) + 1 for code in np.flatnonzero(interior == 0)]


def _from_widths(widths: np.ndarray):
    dnl = widths / widths.mean() - 1.0
    return dnl, np.cumsum(dnl)


def histogram_linearity(codes: Sequence[int], n_codes: int = N_CODES) -> LinearityReport:
    """
    Sine-wave histogram test with arcsine correction.

    Transition levels come from the cumulative histogram,
    T_k = -cos(pi * CH_k / N), so amplitude and offset of the stimulus drop
    out once the interior code widths are normalised by their mean. End
    codes are excluded; the stimulus must overdrive both of them.
    """
    counts = _code_counts(codes, n_codes)
    total = int(counts.sum())

    cumulative = np.cumsum(counts)[:-1]  # CH_k for transitions k = 1..n_codes-1
    transitions = -np.cos(np.pi * cumulative / total)
    widths = np.diff(transitions)  # codes 1..n_codes-2
    dnl, inl = _from_widths(widths)

    missing = _interior_missing(counts)
    dnl[np.asarray(missing, dtype=np.int64) - 1] = -1.0

    short_record = total < MIN_HISTOGRAM_RECORD
    overdriven = bool(counts[0] > 0 and counts[-1] > 0)
    if short_record:
        logger.warning(f"Histogram record of {total} samples is shorter than {MIN_HISTOGRAM_RECORD}")
    if not overdriven:
        logger.warning("Histogram stimulus does not reach both end codes; transition levels are biased")
    if missing:
        logger.info(f"{len(missing)} missing codes in histogram record")

    return LinearityReport(
        dnl_lsb=dnl,
        inl_lsb=inl,
        missing_codes=missing,
        record_length=total,
        short_record=short_record,
        overdriven=overdriven,
        method='histogram',
    )


def ramp_linearity(codes: Sequence[int], n_codes: int = N_CODES) -> LinearityReport:
    """Code-density DNL/INL from a uniform ramp spanning past both end codes"""
    counts = _code_counts(codes, n_codes)
    widths = counts[1:-1].astype(np.float64)
    if widths.sum() == 0:
        raise MetricsError("ramp never reaches the interior codes")
    dnl, inl = _from_widths(widths)
    missing = _interior_missing(counts)

    return LinearityReport(
        dnl_lsb=dnl,
        inl_lsb=inl,
        missing_codes=missing,
        record_length=int(counts.sum()),
        overdriven=bool(counts[0] > 0 and counts[-1] > 0),
        method='ramp',
    )
