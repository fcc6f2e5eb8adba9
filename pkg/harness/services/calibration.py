"""
Calibration Service
Fits the silicon knobs of an AdcConfig to measured figures by sequential
one-dimensional bisection
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from django.conf import settings
from tqdm import tqdm

from converter.exceptions import CalibrationError
from converter.types import AdcConfig
from harness.services.runner import RunSpec, run_single_averaged

logger = logging.getLogger(__name__)

DEFAULT_TARGETS = {
    'snr_db': {'value': 66.9, 'tolerance': 0.05},
    'sfdr_db': {'value': 70.0, 'tolerance': 0.1},
    'sndr_db': {'value': 64.6, 'tolerance': 0.05},
    'snr_db_100mhz': {'value': 66.3, 'tolerance': 0.1},
}


def _set_frontend(name: str) -> Callable[[AdcConfig, float], AdcConfig]:
    def setter(cfg: AdcConfig, value: float) -> AdcConfig:
        return replace(cfg, frontend=replace(cfg.frontend, **{name: value}))
    return setter


def _even_order_setter(cfg: AdcConfig, magnitude: float) -> AdcConfig:
    # The sign of the even-order term is structural; only its size is fitted
    sign = 1.0 if cfg.frontend.even_order_coeff > 0 else -1.0
    return replace(cfg, frontend=replace(cfg.frontend, even_order_coeff=sign * magnitude))


@dataclass
class CalibrationStep:
    """One knob fitted against one metric; the metric falls as the knob grows"""
    target_key: str
    knob: str
    metric: str
    f_in_hz: float
    bracket: Tuple[float, float]
    getter: Callable[[AdcConfig], float]
    setter: Callable[[AdcConfig, float], AdcConfig]


CALIBRATION_STEPS = [
    CalibrationStep(
        target_key='snr_db', knob='thermal_sigma', metric='snr_db', f_in_hz=10e6,
        bracket=(0.0, 2e-3),
        getter=lambda cfg: cfg.frontend.thermal_sigma,
        setter=_set_frontend('thermal_sigma'),
    ),
    CalibrationStep(
        target_key='sfdr_db', knob='r_on_cubic_coeff', metric='sfdr_db', f_in_hz=10e6,
        bracket=(0.0, 2.0),
        getter=lambda cfg: cfg.frontend.r_on_cubic_coeff,
        setter=_set_frontend('r_on_cubic_coeff'),
    ),
    CalibrationStep(
        target_key='sndr_db', knob='even_order_coeff', metric='sndr_db', f_in_hz=10e6,
        bracket=(0.0, 0.02),
        getter=lambda cfg: abs(cfg.frontend.even_order_coeff),
        setter=_even_order_setter,
    ),
    CalibrationStep(
        target_key='snr_db_100mhz', knob='aperture_jitter', metric='snr_db', f_in_hz=100e6,
        bracket=(0.0, 5e-12),
        getter=lambda cfg: cfg.frontend.aperture_jitter,
        setter=_set_frontend('aperture_jitter'),
    ),
]


@dataclass
class CalibrationResult:
    config: AdcConfig
    converged: bool
    passes: int
    metrics: Dict[str, float] = field(default_factory=dict)
    history: List[dict] = field(default_factory=list)


class Calibrator:
    """
    Sequential bisection over the calibration steps.

    A step whose metric already sits within tolerance is left alone, so a
    calibrated config is a fixed point. The ordered sequence repeats until a
    pass changes nothing or ``passes`` is exhausted.
    """

    def __init__(self, base: Optional[RunSpec] = None, targets: Optional[Dict[str, dict]] = None,
                 passes: Optional[int] = None, seeds: Optional[Sequence[int]] = None,
                 max_iterations: Optional[int] = None, progress: bool = False):
        self.base = base or RunSpec(mode='calibrate')
        self.targets = targets or getattr(settings, 'CALIBRATION_TARGETS', DEFAULT_TARGETS)
        self.passes = passes or getattr(settings, 'CALIBRATION_PASSES', 3)
        self.seeds = list(seeds or getattr(settings, 'CALIBRATION_SEEDS', [101, 202]))
        self.max_iterations = max_iterations or getattr(settings, 'CALIBRATION_MAX_ITERATIONS', 40)
        self.progress = progress
        self.history = []

    def measure(self, cfg: AdcConfig, step: CalibrationStep) -> float:
        spec = replace(
            self.base,
            adc=cfg,
            stimulus=replace(self.base.stimulus, frequency_hz=step.f_in_hz),
            mode='calibrate',
        )
        report = run_single_averaged(spec, self.seeds)
        return getattr(report.spectral, step.metric)

    def _target(self, step: CalibrationStep) -> Tuple[float, float]:
        try:
            target = self.targets[step.target_key]
        except KeyError:
            raise CalibrationError(f"no target configured for '{step.target_key}'", knob=step.knob)
        return float(target['value']), float(target['tolerance'])

    def bisect(self, cfg: AdcConfig, step: CalibrationStep) -> AdcConfig:
        target, tolerance = self._target(step)
        lo, hi = step.bracket
        metric_lo = self.measure(step.setter(cfg, lo), step)
        metric_hi = self.measure(step.setter(cfg, hi), step)
        if not metric_lo >= target >= metric_hi:
            raise CalibrationError(
                f"{step.knob} bracket [{lo:.4g}, {hi:.4g}] gives {step.metric} "
                f"[{metric_lo:.3f}, {metric_hi:.3f}] dB which does not bracket {target:.3f} dB",
                knob=step.knob,
                bracket=(lo, hi),
                bracket_values=(metric_lo, metric_hi),
            )

        value, metric = lo, metric_lo
        for iteration in range(self.max_iterations):
            value = (lo + hi) / 2
            metric = self.measure(step.setter(cfg, value), step)
            logger.debug(f"{step.knob} iteration {iteration + 1}: {value:.6g} -> {metric:.4f} dB")
            if abs(metric - target) <= tolerance:
                break
            if metric > target:
                lo = value
            else:
                hi = value
        else:
            logger.warning(
                f"{step.knob} stopped after {self.max_iterations} iterations at {metric:.4f} dB "
                f"(target {target:.3f} +/- {tolerance})"
            )

        logger.info(f"Calibrated {step.knob} = {value:.6g} ({step.metric} {metric:.3f} dB, target {target:.3f})")
        self.history.append({'knob': step.knob, 'value': value, 'metric': metric, 'target': target})
        return step.setter(cfg, value)

    def run(self, cfg: AdcConfig) -> CalibrationResult:
        cfg.validate()
        passes_run = 0
        converged = False
        for pass_index in range(self.passes):
            passes_run += 1
            changed = False
            steps = tqdm(CALIBRATION_STEPS, desc=f'calibrate pass {pass_index + 1}', disable=not self.progress)
            for step in steps:
                target, tolerance = self._target(step)
                metric = self.measure(cfg, step)
                if abs(metric - target) <= tolerance:
                    logger.info(f"{step.knob} already within tolerance ({step.metric} {metric:.3f} dB)")
                    continue
                cfg = self.bisect(cfg, step)
                changed = True
            if not changed:
                converged = True
                break

        metrics = {step.target_key: self.measure(cfg, step) for step in CALIBRATION_STEPS}
        if not converged:
            converged = all(
                abs(metrics[step.target_key] - self._target(step)[0]) <= self._target(step)[1]
                for step in CALIBRATION_STEPS
            )
        if not converged:
            logger.warning(f"Calibration did not converge after {passes_run} passes: {metrics}")
        return CalibrationResult(config=cfg, converged=converged, passes=passes_run,
                                 metrics=metrics, history=list(self.history))


def calibrate(cfg: AdcConfig, targets: Optional[Dict[str, dict]] = None, **kwargs) -> AdcConfig:
    """Calibrated copy of ``cfg``; see ``Calibrator`` for the procedure"""
    return Calibrator(targets=targets, **kwargs).run(cfg).config


def knob_values(cfg: AdcConfig) -> Dict[str, float]:
    return {step.knob: step.getter(cfg) for step in CALIBRATION_STEPS}
