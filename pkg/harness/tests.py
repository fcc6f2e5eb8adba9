import csv
import json
import shutil
import tempfile
from dataclasses import replace
from io import StringIO
from pathlib import Path

import numpy as np
from django.conf import settings
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase
from django.urls import reverse
from rest_framework.test import APIClient

from converter.exceptions import CalibrationError, ConfigurationError, MetricsError
from converter.presets import ideal, silicon
from converter.services.correction import transfer_codes
from harness.models import SimulationRun
from harness.serializers import AdcConfigSerializer
from harness.services.calibration import CALIBRATION_STEPS, Calibrator, calibrate, knob_values
from harness.services.config_loader import load_config
from harness.services.emitter import CSV_HEADER, emit
from harness.services.runner import (
    RunSpec,
    SweepTable,
    jitter_noise_slope,
    run_linearity,
    run_point,
    run_single,
    run_single_averaged,
    sweep_fin,
    sweep_rate,
)
from metrology.services.linearity import ramp_linearity

CONFIG_DIR = Path(settings.BASE_DIR) / 'config'


def small_spec(adc=None, n=4096, **changes) -> RunSpec:
    spec = RunSpec(adc=adc or ideal(), record_length=n)
    spec = replace(spec, stimulus=replace(spec.stimulus, n_samples=n))
    return replace(spec, **changes)


class TempDirMixin:

    def setUp(self):
        super().setUp()
        self.tmp = Path(tempfile.mkdtemp())

    def tearDown(self):
        shutil.rmtree(self.tmp, ignore_errors=True)
        super().tearDown()


class RunSpecTests(SimpleTestCase):

    def test_rejects_unknown_mode(self):
        with self.assertRaises(ConfigurationError):
            small_spec(mode='burst').validate()

    def test_rejects_slow_rate(self):
        with self.assertRaises(ConfigurationError):
            small_spec(f_cr=0.5e6).validate()

    def test_spectral_record_must_be_power_of_two(self):
        with self.assertRaises(ConfigurationError):
            small_spec(n=4000).validate()

    def test_dict_round_trip(self):
        spec = small_spec(adc=silicon()).with_seed(9)
        self.assertEqual(RunSpec.from_dict(spec.to_dict()), spec)

    def test_dict_round_trip_keeps_seeds(self):
        spec = small_spec(seeds=[1, 2, 3])
        self.assertEqual(RunSpec.from_dict(spec.to_dict()).seeds, [1, 2, 3])

    def test_spectral_modes_reject_ramp(self):
        for mode in ('single', 'sweep_rate', 'sweep_fin', 'calibrate'):
            spec = small_spec(mode=mode)
            spec = replace(spec, stimulus=replace(spec.stimulus, kind='ramp'))
            with self.assertRaisesMessage(ConfigurationError, 'sine stimulus'):
                spec.validate()

    def test_linearity_mode_accepts_ramp(self):
        spec = small_spec(mode='linearity')
        replace(spec, stimulus=replace(spec.stimulus, kind='ramp')).validate()


class RunSingleTests(SimpleTestCase):

    def test_ideal_config_reaches_twelve_bits(self):
        report = run_single(RunSpec(adc=ideal()))
        self.assertAlmostEqual(report.enob, 12.0, delta=0.1)
        self.assertAlmostEqual(report.power_mw, 97.0)
        self.assertGreater(report.fom, 0)
        self.assertEqual(report.spectral.signal_bin, 745)
        self.assertEqual(report.saturation_count, 0)

    def test_full_scale_ideal_floor(self):
        spec = RunSpec(adc=ideal())
        spec = replace(spec, stimulus=replace(spec.stimulus, amplitude=1.0))
        report = run_single(spec)
        self.assertAlmostEqual(report.sndr_db, 74.0, delta=0.3)
        self.assertAlmostEqual(report.enob, 12.0, delta=0.05)

    def test_zero_amplitude_has_no_signal(self):
        spec = small_spec()
        spec = replace(spec, stimulus=replace(spec.stimulus, amplitude=0.0))
        with self.assertRaisesMessage(MetricsError, "no signal"):
            run_single(spec)

    def test_identical_seed_is_bit_identical(self):
        spec = small_spec(adc=silicon()).with_seed(3)
        first = run_single(spec, keep_codes=True)
        second = run_single(spec, keep_codes=True)
        np.testing.assert_array_equal(first.codes, second.codes)
        self.assertEqual(first.to_dict(), second.to_dict())

    def test_seeds_change_the_noise(self):
        first = run_single(small_spec(adc=silicon()).with_seed(1), keep_codes=True)
        second = run_single(small_spec(adc=silicon()).with_seed(2), keep_codes=True)
        self.assertFalse(np.array_equal(first.codes, second.codes))

    def test_averaged_run(self):
        spec = small_spec(adc=silicon())
        report = run_single_averaged(spec, [1, 2, 3])
        singles = [run_single(spec.with_seed(seed)).snr_db for seed in (1, 2, 3)]
        self.assertAlmostEqual(report.snr_db, np.mean(singles))
        self.assertEqual(report.seeds, [1, 2, 3])
        self.assertAlmostEqual(report.enob, (report.sndr_db - 1.76) / 6.02)

    def test_spec_seeds_are_averaged(self):
        spec = small_spec(adc=silicon())
        report = run_point(replace(spec, seeds=[1, 2]))
        self.assertEqual(report.seeds, [1, 2])
        self.assertAlmostEqual(report.sndr_db, run_single_averaged(spec, [1, 2]).sndr_db)

    def test_spec_without_seeds_uses_its_own(self):
        spec = small_spec(adc=silicon()).with_seed(6)
        self.assertEqual(run_point(spec).to_dict(), run_single(spec).to_dict())

    def test_under_sampled_input(self):
        spec = small_spec(adc=ideal())
        spec = replace(spec, stimulus=replace(spec.stimulus, frequency_hz=100e6))
        report = run_single(spec)
        self.assertGreater(report.f_in_hz, 55e6)
        self.assertGreater(report.enob, 11.8)

    def test_stage_offset_config_is_corrected(self):
        baseline = run_single(RunSpec())
        shifted = run_single(load_config(CONFIG_DIR / 'offset_stage3.ini'))
        self.assertAlmostEqual(shifted.sndr_db, baseline.sndr_db, delta=0.5)


class SweepTests(SimpleTestCase):

    def test_rate_sweep_rows_follow_rates(self):
        table = sweep_rate(small_spec(), [100e6, 110e6, 130e6])
        self.assertEqual(table.variable, 'f_cr')
        np.testing.assert_allclose(table.column('independent_var'), [100, 110, 130])
        np.testing.assert_allclose(table.column('power_mw')[1:], [97.0, 110.0])

    def test_rates_must_increase(self):
        with self.assertRaises(ConfigurationError):
            sweep_rate(small_spec(), [110e6, 100e6])
        with self.assertRaises(ConfigurationError):
            sweep_rate(small_spec(), [0.5e6, 10e6])

    def test_parallel_sweep_matches_serial(self):
        spec = small_spec(adc=silicon())
        serial = sweep_fin(spec, [5e6, 20e6, 40e6], n_jobs=1)
        parallel = sweep_fin(spec, [5e6, 20e6, 40e6], n_jobs=2)
        self.assertEqual(serial.to_dict(), parallel.to_dict())

    def test_sweep_is_reproducible(self):
        spec = small_spec(adc=silicon()).with_seed(4)
        self.assertEqual(sweep_fin(spec, [10e6, 30e6]).to_dict(), sweep_fin(spec, [10e6, 30e6]).to_dict())

    def test_empty_sweep(self):
        self.assertEqual(len(sweep_rate(small_spec(), [])), 0)


class LinearityRunTests(SimpleTestCase):

    def test_gain_error_histogram_matches_ramp(self):
        stages = list(ideal().stages)
        stages[0] = replace(stages[0], gain_error=-0.001)
        cfg = replace(ideal(), stages=stages)

        spec = RunSpec(adc=cfg, record_length=2 ** 20, mode='linearity')
        spec = replace(spec, stimulus=replace(spec.stimulus, amplitude=10 ** (0.1 / 20), n_samples=2 ** 20))
        histogram = run_linearity(spec).linearity

        _, codes = transfer_codes(cfg, 2 ** 18)
        ramp = ramp_linearity(codes)
        self.assertGreater(np.ptp(ramp.inl_lsb), 0.5)
        self.assertLessEqual(np.max(np.abs(histogram.inl_lsb - ramp.inl_lsb)), 0.1)

    def test_ramp_stimulus_uses_code_density(self):
        spec = small_spec(n=2 ** 16, mode='linearity')
        spec = replace(spec, stimulus=replace(spec.stimulus, kind='ramp', amplitude=1.01))
        report = run_linearity(spec)
        self.assertEqual(report.linearity.method, 'ramp')
        self.assertTrue(report.linearity.overdriven)
        self.assertEqual(report.linearity.missing_codes, [])
        self.assertLess(np.max(np.abs(report.linearity.dnl_lsb)), 0.1)


class EmitTests(TempDirMixin, SimpleTestCase):

    def test_empty_table_is_header_only(self):
        paths = emit(SweepTable(variable='f_cr', unit='MS/s'), 'csv', self.tmp / 'empty')
        self.assertEqual(paths[0].read_text().splitlines(), [','.join(CSV_HEADER)])

    def test_one_row_table(self):
        table = sweep_rate(small_spec(), [110e6])
        path = emit(table, 'csv', self.tmp / 'one')[0]
        with open(path) as handle:
            rows = list(csv.reader(handle))
        self.assertEqual(rows[0], CSV_HEADER)
        self.assertEqual(len(rows), 2)
        self.assertEqual(rows[1][0], '110.0000')
        self.assertEqual(rows[1][5], '97.0000')

    def test_both_formats(self):
        spec = small_spec()
        paths = emit(run_single(spec), 'both', self.tmp / 'run', spec=spec)
        self.assertEqual(sorted(path.suffix for path in paths), ['.csv', '.json'])

    def test_unknown_format(self):
        with self.assertRaises(ConfigurationError):
            emit(SweepTable(variable='f_cr', unit='MS/s'), 'xml', self.tmp / 'x')

    def test_record_reruns_bit_identically(self):
        spec = small_spec(adc=silicon()).with_seed(17)
        report = run_single(spec, keep_codes=True)
        path = emit(report, 'json', self.tmp / 'record', spec=spec)[0]

        record = json.loads(path.read_text())
        self.assertEqual(record['seed'], 17)
        self.assertIn('frontend', record['run_spec']['adc'])

        rerun = run_single(load_config(path), keep_codes=True)
        np.testing.assert_array_equal(rerun.codes, report.codes)
        self.assertEqual(rerun.to_dict(), report.to_dict())


class ConfigLoaderTests(TempDirMixin, SimpleTestCase):

    def write(self, text: str) -> Path:
        path = self.tmp / 'run.ini'
        path.write_text(text)
        return path

    def test_silicon_ini_matches_defaults(self):
        self.assertEqual(load_config(CONFIG_DIR / 'silicon.ini').to_dict(), RunSpec().to_dict())

    def test_ideal_ini(self):
        spec = load_config(CONFIG_DIR / 'ideal.ini')
        self.assertEqual(spec.adc, ideal())

    def test_stage_sections_override_single_stages(self):
        spec = load_config(self.write(
            "[adc]\npreset = ideal\n[stage2]\ngain_error = 0.002\ncomparator_offsets = 0.01, -0.01\n"
        ))
        self.assertEqual(spec.adc.stages[1].gain_error, 0.002)
        self.assertEqual(spec.adc.stages[1].comparator_offsets, (0.01, -0.01))
        self.assertEqual(spec.adc.stages[0], ideal().stages[0])

    def test_run_section(self):
        spec = load_config(self.write("[run]\nf_cr = 130e6\nrecord_length = 4096\nseed = 5\n"))
        self.assertEqual(spec.f_cr, 130e6)
        self.assertEqual(spec.stimulus.n_samples, 4096)
        self.assertEqual(spec.adc.rng_seed, 5)

    def test_run_section_seeds(self):
        spec = load_config(self.write("[run]\nrecord_length = 4096\nseeds = 1, 2\n"))
        self.assertEqual(spec.seeds, [1, 2])

    def test_invalid_value_names_the_field(self):
        with self.assertRaisesMessage(ConfigurationError, 'thermal_sigma'):
            load_config(self.write("[frontend]\nthermal_sigma = -1\n"))

    def test_unknown_section(self):
        with self.assertRaises(ConfigurationError):
            load_config(self.write("[opamp]\ngain = 60\n"))

    def test_missing_file(self):
        with self.assertRaises(ConfigurationError):
            load_config(self.tmp / 'absent.ini')

    def test_serializer_overlays_preset(self):
        serializer = AdcConfigSerializer(data={'preset': 'ideal', 'frontend': {'thermal_sigma': 1e-4}})
        self.assertTrue(serializer.is_valid(), serializer.errors)
        cfg = serializer.build()
        self.assertEqual(cfg.frontend.thermal_sigma, 1e-4)
        self.assertEqual(cfg.bias.gm_model, 'ideal')

    def test_serializer_rejects_wrong_offset_count(self):
        serializer = AdcConfigSerializer(data={'flash_offsets': [0.0, 0.0]})
        self.assertFalse(serializer.is_valid())
        self.assertIn('flash_offsets', serializer.errors)


class CalibrationTests(SimpleTestCase):

    def test_non_bracketing_interval_reports_values(self):
        calibrator = Calibrator(
            base=small_spec(mode='calibrate'),
            targets={'snr_db': {'value': 80.0, 'tolerance': 0.05}},
            seeds=[1],
        )
        with self.assertRaises(CalibrationError) as caught:
            calibrator.bisect(silicon(), CALIBRATION_STEPS[0])
        self.assertEqual(caught.exception.knob, 'thermal_sigma')
        self.assertEqual(caught.exception.bracket, CALIBRATION_STEPS[0].bracket)
        self.assertEqual(len(caught.exception.bracket_values), 2)

    def test_targets_met_by_ideal_config(self):
        loose = {
            'snr_db': {'value': 73.0, 'tolerance': 3.0},
            'sfdr_db': {'value': 85.0, 'tolerance': 20.0},
            'sndr_db': {'value': 73.0, 'tolerance': 3.0},
            'snr_db_100mhz': {'value': 73.0, 'tolerance': 3.0},
        }
        result = Calibrator(base=small_spec(mode='calibrate'), targets=loose, seeds=[1]).run(ideal())
        self.assertTrue(result.converged)
        self.assertEqual(result.passes, 1)
        self.assertEqual(result.config, ideal())
        self.assertEqual(set(knob_values(result.config).values()), {0.0})


class AcceptanceTests(SimpleTestCase):
    """Calibrated silicon model against the measured die"""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.calibrated = calibrate(silicon())
        cls.targets = settings.MEASURED_TARGETS

    def spec(self, **changes) -> RunSpec:
        return replace(RunSpec(adc=self.calibrated), **changes)

    def test_measured_figures_at_nominal_point(self):
        report = run_single_averaged(self.spec(), [1, 2, 3, 4])
        self.assertAlmostEqual(report.snr_db, self.targets['snr_db'], delta=0.3)
        self.assertAlmostEqual(report.sndr_db, self.targets['sndr_db'], delta=0.5)
        self.assertAlmostEqual(report.sfdr_db, self.targets['sfdr_db'], delta=1.0)
        self.assertAlmostEqual(report.enob, self.targets['enob'], delta=0.1)
        self.assertAlmostEqual(report.power_mw, self.targets['power_mw'])

    def test_calibration_is_idempotent(self):
        again = calibrate(self.calibrated)
        for knob, value in knob_values(self.calibrated).items():
            self.assertLessEqual(abs(knob_values(again)[knob] - value), 0.01 * abs(value), knob)

    def test_rate_sweep_envelopes(self):
        table = sweep_rate(self.spec(seeds=[1, 2, 3, 4]), [5e6, 20e6, 60e6, 100e6, 120e6, 140e6])
        for row in table.rows:
            if 20 <= row.independent_var <= 120:
                self.assertGreaterEqual(row.sndr_db, 64.0, row)
            self.assertGreaterEqual(row.sfdr_db, 69.0, row)
        self.assertGreaterEqual(table.rows[-1].sndr_db, 62.0)

    def test_sndr_falls_past_the_nominal_rate(self):
        table = sweep_rate(self.spec(seeds=[1, 2, 3, 4]), [110e6, 140e6])
        nominal, fastest = table.rows
        # settling error grows past 120 MS/s; noise draws are shared between rates
        self.assertGreater(nominal.sndr_db - fastest.sndr_db, 0.05)
        self.assertGreaterEqual(fastest.sndr_db, 62.0)

    def test_input_frequency_envelopes(self):
        table = sweep_fin(self.spec(), [1e6, 10e6, 20e6, 40e6, 70e6, 100e6])
        for row in table.rows:
            self.assertGreaterEqual(row.snr_db, 66.0, row)
            if row.independent_var <= 40:
                self.assertGreaterEqual(row.sndr_db, 60.0, row)

    def test_jitter_slope_above_one_hundred_megahertz(self):
        spec = self.spec(record_length=2 ** 14)
        spec = replace(spec, stimulus=replace(spec.stimulus, n_samples=2 ** 14))
        slope = jitter_noise_slope(spec, [150e6, 200e6, 300e6, 400e6])
        self.assertAlmostEqual(slope.snr_slope_db_per_decade, -20.0, delta=2.0)

    def test_histogram_linearity_envelopes(self):
        spec = self.spec(record_length=2 ** 20, mode='linearity')
        spec = replace(spec, stimulus=replace(spec.stimulus, amplitude=10 ** (0.1 / 20), n_samples=2 ** 20))
        report = run_linearity(spec)
        dnl_lo, dnl_hi = report.linearity.dnl_range
        inl_lo, inl_hi = report.linearity.inl_range
        self.assertGreaterEqual(dnl_lo, self.targets['dnl_lsb'][0])
        self.assertLessEqual(dnl_hi, self.targets['dnl_lsb'][1])
        self.assertGreaterEqual(inl_lo, self.targets['inl_lsb'][0])
        self.assertLessEqual(inl_hi, self.targets['inl_lsb'][1])


class SimulationApiTests(TestCase):

    def setUp(self):
        self.client = APIClient()

    def test_single_run_is_stored(self):
        payload = {
            'adc': {'preset': 'ideal'},
            'record_length': 4096,
            'stimulus': {'frequency_hz': 10e6, 'amplitude_dbfs': -1.0},
        }
        response = self.client.post(reverse('harness:run_single'), payload, format='json')
        self.assertEqual(response.status_code, 201)
        self.assertTrue(response.data['success'])
        self.assertGreater(response.data['report']['spectral']['enob_bits'], 11.5)

        run = SimulationRun.objects.get(pk=response.data['run_id'])
        self.assertEqual(run.record_length, 4096)
        self.assertIn('MS/s', str(run))

        listing = self.client.get(reverse('harness:run_list'))
        self.assertEqual(listing.data['count'], 1)
        detail = self.client.get(reverse('harness:run_detail', args=[run.pk]))
        self.assertEqual(detail.data['run']['config']['record_length'], 4096)

    def test_invalid_request(self):
        response = self.client.post(reverse('harness:run_single'), {'record_length': 1000}, format='json')
        self.assertEqual(response.status_code, 400)
        self.assertFalse(response.data['success'])

    def test_zero_amplitude_is_rejected(self):
        payload = {'adc': {'preset': 'ideal'}, 'record_length': 4096, 'stimulus': {'amplitude': 0.0}}
        response = self.client.post(reverse('harness:run_single'), payload, format='json')
        self.assertEqual(response.status_code, 400)
        self.assertIn('no signal', response.data['error'])

    def test_missing_run(self):
        response = self.client.get(reverse('harness:run_detail', args=[999]))
        self.assertEqual(response.status_code, 404)


class AdcCommandTests(TempDirMixin, TestCase):

    def test_single_run(self):
        out = StringIO()
        call_command('adc', 'single', '--config', str(CONFIG_DIR / 'ideal.ini'), '--n', '4096', stdout=out)
        self.assertIn('SNDR', out.getvalue())
        self.assertIn('Single run complete', out.getvalue())

    def test_sweep_writes_csv(self):
        out = StringIO()
        call_command(
            'adc', 'sweep-rate', '--config', str(CONFIG_DIR / 'ideal.ini'), '--n', '4096',
            '--rates', '100,110', '--out', str(self.tmp / 'rates'), '--format', 'csv', stdout=out,
        )
        lines = (self.tmp / 'rates.csv').read_text().splitlines()
        self.assertEqual(len(lines), 3)

    def test_save_persists_run(self):
        call_command('adc', 'single', '--config', str(CONFIG_DIR / 'ideal.ini'), '--n', '4096', '--save',
                     stdout=StringIO())
        self.assertEqual(SimulationRun.objects.count(), 1)

    def test_module_error_becomes_command_error(self):
        with self.assertRaises(CommandError):
            call_command('adc', 'single', '--fs', '0.5', stdout=StringIO())

    def test_seeded_record_reruns_identically(self):
        first = self.tmp / 'first'
        call_command('adc', 'single', '--config', str(CONFIG_DIR / 'silicon.ini'), '--n', '4096',
                     '--seeds', '3,4', '--out', str(first), '--format', 'json', stdout=StringIO())
        record = json.loads(first.with_suffix('.json').read_text())
        self.assertEqual(record['run_spec']['seeds'], [3, 4])
        self.assertEqual(record['seeds'], [3, 4])

        second = self.tmp / 'second'
        call_command('adc', 'single', '--config', str(first.with_suffix('.json')), '--out', str(second),
                     '--format', 'json', stdout=StringIO())
        rerun = json.loads(second.with_suffix('.json').read_text())
        self.assertEqual(rerun['report']['seeds'], [3, 4])
        self.assertEqual(rerun['report'], record['report'])
