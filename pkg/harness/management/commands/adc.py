"""
Management command to run the pipeline ADC simulator: single operating
points, rate and input-frequency sweeps, histogram linearity and calibration
"""

import logging
from dataclasses import replace

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from converter.exceptions import SimulationError
from converter.services.stimulus import dbfs_to_amplitude
from harness.models import SimulationRun
from harness.services.calibration import Calibrator, knob_values
from harness.services.config_loader import load_config
from harness.services.emitter import FORMATS, emit
from harness.services.runner import (
    RunSpec,
    run_linearity,
    run_point,
    sweep_fin,
    sweep_rate,
)

logger = logging.getLogger('harness')

DEFAULT_RATES_MSPS = '20,30,40,50,60,70,80,90,100,110,120,130,140'
DEFAULT_FINS_MHZ = '1,5,10,20,30,40,50,60,70,80,90,100'


def _mega_list(raw: str):
    try:
        return [float(item) * 1e6 for item in raw.split(',') if item.strip()]
    except ValueError:
        raise CommandError(f"expected a comma separated list of numbers, got '{raw}'")


def _seed_list(raw: str):
    try:
        return [int(item) for item in raw.split(',') if item.strip()]
    except ValueError:
        raise CommandError(f"expected a comma separated list of seeds, got '{raw}'")


class Command(BaseCommand):
    help = 'Simulate the 12-bit pipeline ADC and emit plot-ready tables'

    def add_arguments(self, parser):
        subparsers = parser.add_subparsers(dest='mode', required=True)

        single = subparsers.add_parser('single', help='One operating point')
        self._add_common(single)
        single.add_argument(
            '--seeds',
            type=str,
            help='Comma separated seeds; dB figures are averaged over them'
        )

        rate = subparsers.add_parser('sweep-rate', help='Sweep the conversion rate')
        self._add_common(rate)
        rate.add_argument(
            '--rates',
            type=str,
            default=DEFAULT_RATES_MSPS,
            help='Comma separated conversion rates in MS/s'
        )
        rate.add_argument('--jobs', type=int, help='Parallel sweep points (joblib n_jobs)')

        fin = subparsers.add_parser('sweep-fin', help='Sweep the input frequency')
        self._add_common(fin)
        fin.add_argument(
            '--fins',
            type=str,
            default=DEFAULT_FINS_MHZ,
            help='Comma separated input frequencies in MHz'
        )
        fin.add_argument('--jobs', type=int, help='Parallel sweep points (joblib n_jobs)')

        linearity = subparsers.add_parser('linearity', help='Sine-wave histogram DNL/INL')
        self._add_common(linearity)

        calibrate = subparsers.add_parser('calibrate', help='Fit the silicon knobs to the measured figures')
        self._add_common(calibrate)
        calibrate.add_argument('--seeds', type=str, help='Comma separated seeds averaged per evaluation')
        calibrate.add_argument('--passes', type=int, help='Maximum passes over the calibration steps')

    def _add_common(self, parser):
        parser.add_argument('--config', type=str, help='INI configuration or JSON run record')
        parser.add_argument('--fs', type=float, help='Conversion rate in MS/s')
        parser.add_argument('--fin', type=float, help='Input frequency in MHz')
        parser.add_argument('--amp', type=float, help='Input amplitude in dBFS')
        parser.add_argument('--n', type=int, help='Record length in samples')
        parser.add_argument('--seed', type=int, help='Random seed')
        parser.add_argument('--out', type=str, help='Output file stem')
        parser.add_argument(
            '--format',
            choices=[value for value, _ in FORMATS],
            default='both',
            help='Output format when --out is given'
        )
        parser.add_argument('--save', action='store_true', help='Store the run in the database')
        parser.add_argument('--progress', action='store_true', help='Show progress bars')

    def handle(self, *args, **options):
        mode = options['mode'].replace('-', '_')
        try:
            spec = self._build_spec(mode, options)
            handler = getattr(self, f'_handle_{mode}')
            handler(spec, options)
        except SimulationError as exc:
            logger.error(f"adc {options['mode']} failed: {exc}")
            raise CommandError(str(exc))

    def _build_spec(self, mode: str, options) -> RunSpec:
        if options.get('config'):
            spec = load_config(options['config'])
        else:
            spec = RunSpec()
            if mode == 'linearity':
                spec = replace(
                    spec,
                    record_length=getattr(settings, 'LINEARITY_RECORD_LENGTH', 2 ** 20),
                    stimulus=replace(
                        spec.stimulus,
                        amplitude=dbfs_to_amplitude(getattr(settings, 'LINEARITY_OVERDRIVE_DBFS', 0.1)),
                    ),
                )
        spec = replace(spec, mode=mode)

        if options.get('fs') is not None:
            spec = replace(spec, f_cr=options['fs'] * 1e6)
        if options.get('fin') is not None:
            spec = replace(spec, stimulus=replace(spec.stimulus, frequency_hz=options['fin'] * 1e6))
        if options.get('amp') is not None:
            spec = replace(spec, stimulus=replace(spec.stimulus, amplitude=dbfs_to_amplitude(options['amp'], spec.adc.vref)))
        if options.get('n') is not None:
            spec = replace(spec, record_length=options['n'])
        spec = replace(spec, stimulus=replace(spec.stimulus, n_samples=spec.record_length))
        if options.get('seed') is not None:
            spec = spec.with_seed(options['seed'])
        return spec.validate()

    def _emit(self, obj, spec, options, values=None):
        if options.get('out'):
            for path in emit(obj, options['format'], options['out'], spec=spec, values=values):
                self.stdout.write(f'Wrote {path}')

    def _save(self, run, options):
        if options['save'] or getattr(settings, 'RECORD_RUNS', False):
            run.save()
            self.stdout.write(f'Stored simulation run {run.pk}')

    def _write_report(self, report):
        self.stdout.write(
            f"f_cr {report.f_cr_hz / 1e6:.3f} MS/s  f_in {report.f_in_hz / 1e6:.4f} MHz  "
            f"N {report.record_length}  seeds {report.seeds}"
        )
        self.stdout.write(
            f"SNR {report.snr_db:.2f} dB  SNDR {report.sndr_db:.2f} dB  SFDR {report.sfdr_db:.2f} dB  "
            f"ENOB {report.enob:.2f}"
        )
        fom = f"{report.fom:.1f}" if report.fom is not None else '-'
        self.stdout.write(f"Power {report.power_mw:.2f} mW  FoM {fom}")
        if report.saturation_count:
            self.stdout.write(self.style.WARNING(f"{report.saturation_count} residues clipped"))

    def _handle_single(self, spec, options):
        if options.get('seeds'):
            spec = replace(spec, seeds=_seed_list(options['seeds']))
        report = run_point(spec)
        self._write_report(report)
        self._emit(report, spec, options)
        self._save(SimulationRun.from_report(report, spec), options)
        self.stdout.write(self.style.SUCCESS('Single run complete'))

    def _write_table(self, table):
        self.stdout.write(f"{table.variable} [{table.unit}]   SNR    SNDR   SFDR   ENOB   P[mW]")
        for row in table.rows:
            self.stdout.write(
                f"{row.independent_var:10.3f}  {row.snr_db:6.2f} {row.sndr_db:6.2f} {row.sfdr_db:6.2f} "
                f"{row.enob:6.2f} {row.power_mw:7.2f}"
            )

    def _handle_sweep_rate(self, spec, options):
        rates = _mega_list(options['rates'])
        table = sweep_rate(spec, rates, n_jobs=options.get('jobs'), progress=options['progress'])
        self._write_table(table)
        self._emit(table, spec, options, values=rates)
        self._save(SimulationRun.from_table(table, spec), options)
        self.stdout.write(self.style.SUCCESS(f'Rate sweep complete: {len(table)} points'))

    def _handle_sweep_fin(self, spec, options):
        frequencies = _mega_list(options['fins'])
        table = sweep_fin(spec, frequencies, n_jobs=options.get('jobs'), progress=options['progress'])
        self._write_table(table)
        self._emit(table, spec, options, values=frequencies)
        self._save(SimulationRun.from_table(table, spec), options)
        self.stdout.write(self.style.SUCCESS(f'Input-frequency sweep complete: {len(table)} points'))

    def _handle_linearity(self, spec, options):
        report = run_linearity(spec)
        linearity = report.linearity
        dnl_lo, dnl_hi = linearity.dnl_range
        inl_lo, inl_hi = linearity.inl_range
        self.stdout.write(f"DNL [{dnl_lo:+.3f}, {dnl_hi:+.3f}] LSB")
        self.stdout.write(f"INL [{inl_lo:+.3f}, {inl_hi:+.3f}] LSB")
        if linearity.missing_codes:
            self.stdout.write(self.style.ERROR(f"{len(linearity.missing_codes)} missing codes"))
        if linearity.short_record:
            self.stdout.write(self.style.WARNING('Record is short for a 12-bit histogram test'))
        if options.get('out'):
            # a linearity record has no spectral row, so CSV is header only
            self._emit(report, spec, options)
        self._save(SimulationRun.from_report(report, spec), options)
        self.stdout.write(self.style.SUCCESS('Linearity run complete'))

    def _handle_calibrate(self, spec, options):
        seeds = _seed_list(options['seeds']) if options.get('seeds') else (spec.seeds or None)
        calibrator = Calibrator(base=spec, passes=options.get('passes'), seeds=seeds, progress=options['progress'])
        result = calibrator.run(spec.adc)

        for knob, value in knob_values(result.config).items():
            self.stdout.write(f"{knob:>18} = {value:.6g}")
        for key, value in result.metrics.items():
            self.stdout.write(f"{key:>18} = {value:.3f} dB")

        calibrated = replace(spec, adc=result.config, mode='calibrate', seeds=list(calibrator.seeds))
        report = run_point(calibrated)
        self._emit(report, calibrated, options)
        self._save(SimulationRun.from_report(report, calibrated), options)

        if result.converged:
            self.stdout.write(self.style.SUCCESS(f'Calibration converged in {result.passes} passes'))
        else:
            self.stdout.write(self.style.WARNING(f'Calibration stopped after {result.passes} passes without converging'))
