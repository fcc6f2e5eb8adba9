"""
Run Service
Drives stimulus -> pipeline -> correction -> metrics for single operating
points, rate and input-frequency sweeps, and histogram linearity runs
"""

import logging
import math
from dataclasses import dataclass, field, asdict, replace
from typing import Dict, List, Optional, Sequence

import numpy as np
from django.conf import settings
from joblib import Parallel, delayed
from tqdm import tqdm

from converter.constants import MIN_CONVERSION_RATE_HZ
from converter.exceptions import ConfigurationError, MetricsError
from converter.presets import silicon
from converter.services.bias import power_mw
from converter.services.correction import correct_stream
from converter.services.pipeline import convert_stream
from converter.services.stimulus import dbfs_to_amplitude, folded_coherent_frequency, gen_stimulus
from converter.types import AdcConfig, StimulusSpec, is_power_of_two
from metrology.services.linearity import LinearityReport, histogram_linearity, ramp_linearity
from metrology.services.merit import FomInputs, figure_of_merit
from metrology.services.spectral import SpectralMetrics, enob_from_sndr, dynamic_metrics

logger = logging.getLogger(__name__)

MODES = [
    ('single', 'Single operating point'),
    ('sweep_rate', 'Conversion-rate sweep'),
    ('sweep_fin', 'Input-frequency sweep'),
    ('calibrate', 'Calibration'),
    ('linearity', 'Histogram linearity'),
]
MODE_VALUES = {value for value, _ in MODES}
SPECTRAL_MODES = {'single', 'sweep_rate', 'sweep_fin', 'calibrate'}


def _default_stimulus() -> StimulusSpec:
    return StimulusSpec(
        kind='sine',
        amplitude=dbfs_to_amplitude(getattr(settings, 'SWEEP_BACKOFF_DBFS', -0.1)),
        frequency_hz=10e6,
        n_samples=getattr(settings, 'SPECTRAL_RECORD_LENGTH', 8192),
    )


@dataclass
class RunSpec:
    """Everything needed to reproduce one run"""
    adc: AdcConfig = field(default_factory=silicon)
    stimulus: StimulusSpec = field(default_factory=_default_stimulus)
    f_cr: float = field(default_factory=lambda: getattr(settings, 'NOMINAL_F_CR_HZ', 110e6))
    record_length: int = field(default_factory=lambda: getattr(settings, 'SPECTRAL_RECORD_LENGTH', 8192))
    outputs: Dict[str, str] = field(default_factory=dict)
    mode: str = 'single'
    area_mm2: float = field(default_factory=lambda: getattr(settings, 'ADC_AREA_MM2', 0.86))
    seeds: List[int] = field(default_factory=list)  # averaged over when non-empty

    def validate(self):
        if self.mode not in MODE_VALUES:
            raise ConfigurationError(f"unknown mode '{self.mode}'")
        if self.f_cr < MIN_CONVERSION_RATE_HZ:
            raise ConfigurationError(f"conversion rate must be >= 1 MS/s, got {self.f_cr / 1e6:.6g} MS/s")
        if self.mode in SPECTRAL_MODES and not is_power_of_two(self.record_length):
            raise ConfigurationError(f"record_length must be a power of two, got {self.record_length}")
        if self.area_mm2 <= 0:
            raise ConfigurationError(f"area must be positive, got {self.area_mm2}")
        if any(int(seed) < 0 for seed in self.seeds):
            raise ConfigurationError(f"seeds must be >= 0, got {self.seeds}")
        if self.mode in SPECTRAL_MODES and self.stimulus.kind != 'sine':
            raise ConfigurationError(f"{self.mode} runs need a sine stimulus, got '{self.stimulus.kind}'")
        self.adc.validate()
        self.stimulus.validate()
        return self

    @property
    def seed(self) -> int:
        return self.adc.rng_seed

    def with_seed(self, seed: int) -> 'RunSpec':
        return replace(
            self,
            adc=replace(self.adc, rng_seed=int(seed)),
            stimulus=replace(self.stimulus, rng_seed=int(seed)),
        )

    def to_dict(self) -> dict:
        return {
            'adc': self.adc.to_dict(),
            'stimulus': asdict(self.stimulus),
            'f_cr': self.f_cr,
            'record_length': self.record_length,
            'outputs': dict(self.outputs),
            'mode': self.mode,
            'area_mm2': self.area_mm2,
            'seeds': list(self.seeds),
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'RunSpec':
        return cls(
            adc=AdcConfig.from_dict(data['adc']),
            stimulus=StimulusSpec(**data['stimulus']),
            f_cr=data['f_cr'],
            record_length=data['record_length'],
            outputs=dict(data.get('outputs', {})),
            mode=data.get('mode', 'single'),
            area_mm2=data['area_mm2'],
            seeds=[int(seed) for seed in data.get('seeds', [])],
        )


@dataclass
class MetricsReport:
    """Figures for one operating point"""
    mode: str
    f_cr_hz: float
    f_in_hz: float
    target_f_in_hz: float
    record_length: int
    seed: int
    power_mw: float
    area_mm2: float
    spectral: Optional[SpectralMetrics] = None
    fom: Optional[float] = None
    linearity: Optional[LinearityReport] = None
    saturation_count: int = 0
    seeds: List[int] = field(default_factory=list)
    config: dict = field(default_factory=dict)
    codes: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    @property
    def snr_db(self):
        return self.spectral.snr_db if self.spectral else None

    @property
    def sndr_db(self):
        return self.spectral.sndr_db if self.spectral else None

    @property
    def sfdr_db(self):
        return self.spectral.sfdr_db if self.spectral else None

    @property
    def enob(self):
        return self.spectral.enob_bits if self.spectral else None

    def to_dict(self) -> dict:
        return {
            'mode': self.mode,
            'f_cr_hz': self.f_cr_hz,
            'f_in_hz': self.f_in_hz,
            'target_f_in_hz': self.target_f_in_hz,
            'record_length': self.record_length,
            'seed': self.seed,
            'seeds': list(self.seeds),
            'power_mw': self.power_mw,
            'area_mm2': self.area_mm2,
            'fom': self.fom,
            'saturation_count': self.saturation_count,
            'spectral': self.spectral.to_dict() if self.spectral else None,
            'linearity': self.linearity.to_dict() if self.linearity else None,
            'config': self.config,
        }


@dataclass
class SweepRow:
    independent_var: float
    snr_db: float
    sndr_db: float
    sfdr_db: float
    enob: float
    power_mw: float
    fom: Optional[float]
    spur_bin: int = 0
    f_cr_hz: float = 0.0
    f_in_hz: float = 0.0


@dataclass
class SweepTable:
    """Plot-ready sweep; rows ordered by the independent variable"""
    variable: str
    unit: str
    rows: List[SweepRow] = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(row, name) for row in self.rows], dtype=np.float64)

    def __len__(self):
        return len(self.rows)

    def to_dict(self) -> dict:
        return {
            'variable': self.variable,
            'unit': self.unit,
            'rows': [asdict(row) for row in self.rows],
        }


def _resolve_stimulus(spec: RunSpec):
    if spec.stimulus.kind == 'ramp':
        return replace(spec.stimulus, n_samples=spec.record_length), 0
    actual, signal_bin = folded_coherent_frequency(spec.f_cr, spec.stimulus.frequency_hz, spec.record_length)
    stimulus = replace(
        spec.stimulus,
        frequency_hz=actual,
        n_samples=spec.record_length,
        jitter_sigma=math.hypot(spec.stimulus.jitter_sigma, spec.adc.frontend.aperture_jitter),
    )
    return stimulus, signal_bin


def _convert(spec: RunSpec):
    stimulus, signal_bin = _resolve_stimulus(spec)
    stream = gen_stimulus(stimulus, spec.f_cr)
    frames = convert_stream(stream, spec.adc, f_cr=spec.f_cr)
    return correct_stream(frames), frames.saturation_count, stimulus, signal_bin


def _fom(spec: RunSpec, enob: float, power: float) -> Optional[float]:
    if enob <= 0:
        return None
    return figure_of_merit(FomInputs(f_cr=spec.f_cr / 1e6, enob=enob, area=spec.area_mm2, power=power))


def run_single(spec: RunSpec, keep_codes: bool = False) -> MetricsReport:
    """Full chain at one operating point"""
    spec.validate()
    codes, saturation_count, stimulus, signal_bin = _convert(spec)
    spectral = dynamic_metrics(codes, signal_bin)
    power = power_mw(spec.f_cr, spec.adc.bias)

    report = MetricsReport(
        mode=spec.mode,
        f_cr_hz=spec.f_cr,
        f_in_hz=stimulus.frequency_hz,
        target_f_in_hz=spec.stimulus.frequency_hz,
        record_length=spec.record_length,
        seed=spec.seed,
        seeds=[spec.seed],
        power_mw=power,
        area_mm2=spec.area_mm2,
        spectral=spectral,
        fom=_fom(spec, spectral.enob_bits, power),
        saturation_count=saturation_count,
        config=spec.to_dict(),
        codes=codes if keep_codes else None,
    )
    logger.info(
        f"Run f_cr={spec.f_cr / 1e6:.3f} MS/s f_in={stimulus.frequency_hz / 1e6:.4f} MHz seed={spec.seed}: "
        f"SNR {spectral.snr_db:.2f} dB, SNDR {spectral.sndr_db:.2f} dB, SFDR {spectral.sfdr_db:.2f} dB, "
        f"ENOB {spectral.enob_bits:.2f}"
    )
    return report


def run_single_averaged(spec: RunSpec, seeds: Sequence[int]) -> MetricsReport:
    """``run_single`` over several seeds with the dB figures averaged"""
    seeds = [int(seed) for seed in seeds]
    if not seeds:
        raise ConfigurationError("at least one seed is required")
    reports = [run_single(spec.with_seed(seed)) for seed in seeds]
    if len(reports) == 1:
        return reports[0]

    def mean(name):
        return float(np.mean([getattr(report.spectral, name) for report in reports]))

    first = reports[0]
    sndr_db = mean('sndr_db')
    harmonic_orders = first.spectral.harmonic_powers.keys()
    spectral = SpectralMetrics(
        snr_db=mean('snr_db'),
        sndr_db=sndr_db,
        sfdr_db=mean('sfdr_db'),
        thd_db=mean('thd_db'),
        enob_bits=enob_from_sndr(sndr_db),
        signal_bin=first.spectral.signal_bin,
        signal_power_dbfs=mean('signal_power_dbfs'),
        noise_power=mean('noise_power'),
        dc_power=mean('dc_power'),
        spur_bin=first.spectral.spur_bin,
        harmonic_powers={
            order: float(np.mean([report.spectral.harmonic_powers[order] for report in reports]))
            for order in harmonic_orders
        },
    )
    return replace(
        first,
        spectral=spectral,
        fom=_fom(spec, spectral.enob_bits, first.power_mw),
        saturation_count=sum(report.saturation_count for report in reports),
        seeds=seeds,
    )


def run_point(spec: RunSpec) -> MetricsReport:
    """``run_single`` averaged over the spec's own seeds when it lists any"""
    if spec.seeds:
        return run_single_averaged(spec, spec.seeds)
    return run_single(spec)


def run_linearity(spec: RunSpec, keep_codes: bool = False) -> MetricsReport:
    """
    DNL/INL at the run's operating point: arcsine-corrected histogram for a
    sine stimulus, code density for a ramp spanning past both end codes
    """
    spec.validate()
    if spec.record_length < 2 ** 18:
        logger.warning(f"Linearity record of {spec.record_length} samples is short for 12-bit resolution")
    codes, saturation_count, stimulus, _ = _convert(spec)
    if spec.stimulus.kind == 'ramp':
        linearity = ramp_linearity(codes)
    else:
        linearity = histogram_linearity(codes)

    report = MetricsReport(
        mode='linearity',
        f_cr_hz=spec.f_cr,
        f_in_hz=stimulus.frequency_hz,
        target_f_in_hz=spec.stimulus.frequency_hz,
        record_length=spec.record_length,
        seed=spec.seed,
        seeds=[spec.seed],
        power_mw=power_mw(spec.f_cr, spec.adc.bias),
        area_mm2=spec.area_mm2,
        linearity=linearity,
        saturation_count=saturation_count,
        config=spec.to_dict(),
        codes=codes if keep_codes else None,
    )
    dnl_lo, dnl_hi = linearity.dnl_range
    inl_lo, inl_hi = linearity.inl_range
    logger.info(
        f"Linearity N={spec.record_length} seed={spec.seed}: DNL [{dnl_lo:+.3f}, {dnl_hi:+.3f}] LSB, "
        f"INL [{inl_lo:+.3f}, {inl_hi:+.3f}] LSB, {len(linearity.missing_codes)} missing codes"
    )
    return report


def _check_increasing(values: Sequence[float], name: str):
    values = list(values)
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ConfigurationError(f"{name} must be strictly increasing")
    return values


def report_row(report: MetricsReport, independent_var: float) -> SweepRow:
    return SweepRow(
        independent_var=independent_var,
        snr_db=report.snr_db,
        sndr_db=report.sndr_db,
        sfdr_db=report.sfdr_db,
        enob=report.enob,
        power_mw=report.power_mw,
        fom=report.fom,
        spur_bin=report.spectral.spur_bin,
        f_cr_hz=report.f_cr_hz,
        f_in_hz=report.f_in_hz,
    )


def _rate_point(spec: RunSpec, rate: float) -> SweepRow:
    report = run_point(replace(spec, f_cr=rate, mode='sweep_rate'))
    return report_row(report, rate / 1e6)


def _fin_point(spec: RunSpec, f_in: float) -> SweepRow:
    report = run_point(replace(spec, stimulus=replace(spec.stimulus, frequency_hz=f_in), mode='sweep_fin'))
    return report_row(report, f_in / 1e6)


def _run_points(worker, spec: RunSpec, values: List[float], n_jobs: Optional[int], progress: bool, label: str):
    n_jobs = getattr(settings, 'SWEEP_N_JOBS', 1) if n_jobs is None else n_jobs
    iterator = tqdm(values, desc=label, unit='pt', disable=not progress)
    # joblib returns results in submission order
    return Parallel(n_jobs=n_jobs)(delayed(worker)(spec, value) for value in iterator)


def sweep_rate(spec: RunSpec, rates: Sequence[float], n_jobs: Optional[int] = None,
               progress: bool = False) -> SweepTable:
    """One run per conversion rate (Hz) at the run's fixed input"""
    rates = _check_increasing(rates, 'conversion rates')
    for rate in rates:
        if rate < MIN_CONVERSION_RATE_HZ:
            raise ConfigurationError(f"conversion rate {rate / 1e6:.6g} MS/s is below 1 MS/s")
    spec.validate()
    logger.info(f"Rate sweep over {len(rates)} points, f_in={spec.stimulus.frequency_hz / 1e6:.3f} MHz")
    rows = _run_points(_rate_point, spec, rates, n_jobs, progress, 'sweep-rate')
    return SweepTable(variable='f_cr', unit='MS/s', rows=rows)


def sweep_fin(spec: RunSpec, frequencies: Sequence[float], n_jobs: Optional[int] = None,
              progress: bool = False) -> SweepTable:
    """One run per input frequency (Hz); inputs above Nyquist are under-sampled"""
    frequencies = _check_increasing(frequencies, 'input frequencies')
    if frequencies and frequencies[0] <= 0:
        raise ConfigurationError("input frequencies must be positive")
    spec.validate()
    logger.info(f"Input-frequency sweep over {len(frequencies)} points at f_cr={spec.f_cr / 1e6:.3f} MS/s")
    rows = _run_points(_fin_point, spec, frequencies, n_jobs, progress, 'sweep-fin')
    return SweepTable(variable='f_in', unit='MHz', rows=rows)


@dataclass
class JitterSlope:
    """Jitter-attributable noise versus input frequency"""
    frequencies_hz: List[float]
    excess_noise: List[float]
    noise_slope_db_per_decade: float

    @property
    def snr_slope_db_per_decade(self) -> float:
        return -self.noise_slope_db_per_decade


def _excess_noise(spec: RunSpec, f_in: float) -> float:
    point = replace(spec, stimulus=replace(spec.stimulus, frequency_hz=f_in), mode='sweep_fin')
    clean = replace(
        point,
        stimulus=replace(point.stimulus, jitter_sigma=0.0),
        adc=replace(point.adc, frontend=replace(point.adc.frontend, aperture_jitter=0.0)),
    )
    return run_single(point).spectral.noise_power - run_single(clean).spectral.noise_power


def jitter_noise_slope(spec: RunSpec, frequencies: Sequence[float], n_jobs: Optional[int] = None) -> JitterSlope:
    """
    Slope in dB/decade of the noise added by clock jitter.

    Each point is run with and without jitter on the same seed; the rest of
    the noise draws are shared, so the difference isolates the jitter term.
    """
    frequencies = _check_increasing(frequencies, 'input frequencies')
    if len(frequencies) < 2:
        raise ConfigurationError("a slope needs at least two frequencies")
    spec.validate()

    n_jobs = getattr(settings, 'SWEEP_N_JOBS', 1) if n_jobs is None else n_jobs
    excess = Parallel(n_jobs=n_jobs)(delayed(_excess_noise)(spec, f_in) for f_in in frequencies)
    if min(excess) <= 0:
        raise MetricsError("jitter adds no measurable noise at one or more frequencies")

    slope, _ = np.polyfit(np.log10(frequencies), 10 * np.log10(excess), 1)
    logger.info(f"Jitter noise slope {slope:+.2f} dB/decade over {frequencies[0] / 1e6:.0f}-{frequencies[-1] / 1e6:.0f} MHz")
    return JitterSlope(
        frequencies_hz=list(frequencies),
        excess_noise=[float(value) for value in excess],
        noise_slope_db_per_decade=float(slope),
    )
