import numpy as np
from django.test import SimpleTestCase

from converter.exceptions import MetricsError
from converter.services.stimulus import coherent_bin
from metrology.services.linearity import histogram_linearity, ramp_linearity
from metrology.services.merit import FomInputs, figure_of_merit
from metrology.services.spectral import (
    dynamic_metrics,
    enob_from_sndr,
    harmonic_bins,
    sndr_from_enob,
    spectrum,
)


def quantize(levels):
    return np.clip(np.floor((levels + 1.0) * 2048), 0, 4095).astype(np.int64)


def coherent_sine(n, signal_bin, amplitude, harmonic3=0.0, noise_sigma=0.0, seed=0):
    phase = 2 * np.pi * signal_bin * np.arange(n) / n
    levels = amplitude * np.sin(phase) + harmonic3 * np.sin(3 * phase)
    if noise_sigma:
        levels = levels + np.random.default_rng(seed).standard_normal(n) * noise_sigma
    return levels


class SpectrumTests(SimpleTestCase):

    def test_midscale_record_has_no_ac_power(self):
        power = spectrum(np.full(1024, 2048))
        self.assertLessEqual(power[1:].max(), 1e-25)

    def test_digital_sine_lands_in_one_bin(self):
        n, m = 1024, 37
        codes = 2048 + 1000 * np.sin(2 * np.pi * m * np.arange(n) / n)
        power = spectrum(codes)
        others = np.delete(power, m)
        self.assertLess(others.max(), power[m] * 1e-25)

    def test_parseval(self):
        codes = np.random.default_rng(4).integers(0, 4096, 4096)
        scaled = (codes - 2048) / 2048
        self.assertAlmostEqual(spectrum(codes).sum(), np.mean(scaled ** 2), places=12)

    def test_rejects_non_power_of_two(self):
        with self.assertRaises(MetricsError):
            spectrum(np.zeros(1000))

    def test_harmonic_bins_fold(self):
        bins = harmonic_bins(745, 8192)
        self.assertEqual(bins[2], 1490)
        self.assertEqual(bins[6], 8192 - 6 * 745)
        self.assertEqual(sorted(bins), list(range(2, 11)))


class DynamicMetricsTests(SimpleTestCase):

    def test_ideal_full_scale_quantization(self):
        _, signal_bin = coherent_bin(110e6, 10e6, 8192)
        metrics = dynamic_metrics(quantize(coherent_sine(8192, signal_bin, 1.0)), signal_bin)
        self.assertAlmostEqual(metrics.sndr_db, 74.0, delta=0.3)
        self.assertAlmostEqual(metrics.enob_bits, 12.0, delta=0.05)
        self.assertAlmostEqual(metrics.signal_power_dbfs, 0.0, delta=0.01)

    def test_enob_conversion(self):
        self.assertAlmostEqual(enob_from_sndr(64.2), 10.37, places=2)
        self.assertAlmostEqual(sndr_from_enob(enob_from_sndr(61.0)), 61.0)

    def test_known_white_noise(self):
        n, amplitude, sigma = 8192, 0.9, 1e-3
        _, signal_bin = coherent_bin(110e6, 10e6, n)
        metrics = dynamic_metrics(quantize(coherent_sine(n, signal_bin, amplitude, noise_sigma=sigma)), signal_bin)
        lsb = 2 / 4096
        expected = 20 * np.log10((amplitude / np.sqrt(2)) / np.sqrt(sigma ** 2 + lsb ** 2 / 12))
        self.assertAlmostEqual(metrics.snr_db, expected, delta=0.3)

    def test_third_harmonic_sets_sfdr(self):
        n, amplitude = 8192, 0.9
        _, signal_bin = coherent_bin(110e6, 10e6, n)
        spur = amplitude * 10 ** (-60 / 20)
        metrics = dynamic_metrics(quantize(coherent_sine(n, signal_bin, amplitude, harmonic3=spur)), signal_bin)
        self.assertAlmostEqual(metrics.sfdr_db, 60.0, delta=0.3)
        self.assertEqual(metrics.spur_bin, harmonic_bins(signal_bin, n)[3])
        self.assertAlmostEqual(metrics.thd_db, -60.0, delta=0.3)
        # harmonics are excluded from SNR but not from SNDR
        self.assertGreater(metrics.snr_db, 70.0)
        self.assertLess(metrics.sndr_db, 60.1)

    def test_zero_amplitude_has_no_signal(self):
        with self.assertRaisesMessage(MetricsError, "no signal"):
            dynamic_metrics(np.full(8192, 2048), 745)

    def test_signal_bin_out_of_range(self):
        with self.assertRaisesMessage(MetricsError, "no signal"):
            dynamic_metrics(np.full(1024, 2048), 600)

    def test_report_serialises(self):
        _, signal_bin = coherent_bin(110e6, 10e6, 4096)
        data = dynamic_metrics(quantize(coherent_sine(4096, signal_bin, 0.9)), signal_bin).to_dict()
        self.assertIn('snr_db', data)
        self.assertEqual(set(data['harmonic_powers']), {str(order) for order in range(2, 11)})


class HistogramLinearityTests(SimpleTestCase):

    def test_ideal_quantizer_histogram(self):
        n = 2 ** 20
        _, signal_bin = coherent_bin(110e6, 10e6, n)
        report = histogram_linearity(quantize(coherent_sine(n, signal_bin, 1.0116)))
        self.assertLessEqual(np.max(np.abs(report.dnl_lsb)), 0.05)
        self.assertLessEqual(np.max(np.abs(report.inl_lsb)), 0.05)
        self.assertFalse(report.short_record)
        self.assertTrue(report.overdriven)
        self.assertEqual(report.missing_codes, [])
        self.assertEqual(len(report.dnl_lsb), 4094)

    def test_amplitude_and_offset_cancel(self):
        n = 2 ** 18
        _, signal_bin = coherent_bin(110e6, 10e6, n)
        levels = coherent_sine(n, signal_bin, 1.05) + 0.01
        report = histogram_linearity(quantize(levels))
        self.assertLessEqual(np.max(np.abs(report.inl_lsb)), 0.1)

    def test_missing_code(self):
        n = 2 ** 18
        _, signal_bin = coherent_bin(110e6, 10e6, n)
        codes = quantize(coherent_sine(n, signal_bin, 1.0116))
        codes[codes == 1000] = 1001
        report = histogram_linearity(codes)
        self.assertEqual(report.missing_codes, [1000])
        self.assertEqual(report.dnl_lsb[999], -1.0)

    def test_short_record_warns(self):
        _, signal_bin = coherent_bin(110e6, 10e6, 2 ** 16)
        codes = quantize(coherent_sine(2 ** 16, signal_bin, 1.0116))
        with self.assertLogs('metrology.services.linearity', level='WARNING'):
            report = histogram_linearity(codes)
        self.assertTrue(report.short_record)

    def test_underdriven_record_is_flagged(self):
        _, signal_bin = coherent_bin(110e6, 10e6, 2 ** 18)
        with self.assertLogs('metrology.services.linearity', level='WARNING'):
            report = histogram_linearity(quantize(coherent_sine(2 ** 18, signal_bin, 0.9)))
        self.assertFalse(report.overdriven)

    def test_rejects_out_of_range_codes(self):
        with self.assertRaises(MetricsError):
            histogram_linearity(np.array([0, 4096]))
        with self.assertRaises(MetricsError):
            histogram_linearity(np.array([], dtype=np.int64))


class RampLinearityTests(SimpleTestCase):

    def test_uniform_density_is_linear(self):
        report = ramp_linearity(np.repeat(np.arange(4096), 16))
        self.assertTrue(np.allclose(report.dnl_lsb, 0.0))
        self.assertTrue(np.allclose(report.inl_lsb, 0.0))
        self.assertEqual(report.method, 'ramp')

    def test_wide_code(self):
        counts = np.full(4096, 16)
        counts[2000] = 32
        counts[2001] = 0
        report = ramp_linearity(np.repeat(np.arange(4096), counts))
        self.assertAlmostEqual(report.dnl_lsb[1999], 1.0)
        self.assertEqual(report.dnl_lsb[2000], -1.0)
        self.assertEqual(report.missing_codes, [2001])

    def test_to_dict(self):
        data = ramp_linearity(np.repeat(np.arange(4096), 4)).to_dict(include_arrays=False)
        self.assertNotIn('dnl_lsb', data)
        self.assertEqual(data['dnl_min'], 0.0)


class FigureOfMeritTests(SimpleTestCase):

    def test_measured_operating_point(self):
        self.assertAlmostEqual(figure_of_merit(FomInputs(f_cr=110, enob=10.4, area=0.86, power=97)), 1782, delta=1)

    def test_enob_exponent(self):
        base = figure_of_merit(FomInputs(f_cr=110, enob=10.4, area=0.86, power=97))
        higher = figure_of_merit(FomInputs(f_cr=110, enob=12, area=0.86, power=97))
        self.assertAlmostEqual(higher / base, 2 ** 1.6)

    def test_area_halves(self):
        base = figure_of_merit(FomInputs(f_cr=110, enob=10.4, area=0.86, power=97))
        doubled = figure_of_merit(FomInputs(f_cr=110, enob=10.4, area=1.72, power=97))
        self.assertAlmostEqual(doubled, base / 2)

    def test_non_positive_inputs(self):
        with self.assertRaises(MetricsError):
            FomInputs(f_cr=110, enob=10.4, area=0.0, power=97)
        with self.assertRaises(MetricsError):
            FomInputs(f_cr=110, enob=-1.0, area=0.86, power=97)
