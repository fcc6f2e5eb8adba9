import math
from dataclasses import replace

import numpy as np
from django.test import SimpleTestCase

from converter.constants import MID_CODE, N_STAGES
from converter.exceptions import (
    BiasError,
    ConfigurationError,
    CorrectionError,
    PipelineError,
    SimulationError,
    StimulusError,
)
from converter.presets import get_preset, ideal, silicon
from converter.services.bias import bias_current, power_mw, settle_epsilon, stage_scales
from converter.services.correction import correct, correct_stream, noiseless, transfer_codes
from converter.services.pipeline import (
    adsc_decide,
    convert_sample,
    convert_stream,
    flash_decide,
    frontend_sample,
    mdac_residue,
    stage_epsilons,
)
from converter.services.stimulus import (
    coherent_bin,
    dbfs_to_amplitude,
    folded_coherent_frequency,
    gen_ramp,
    gen_sine,
    gen_stimulus,
)
from converter.types import (
    AdcConfig,
    BiasConfig,
    FrontEndConfig,
    OutputCode,
    RawCodeFrame,
    RawCodeFrames,
    SampleStream,
    StageConfig,
    StimulusSpec,
)
from converter.utils.rng import PIPELINE_STREAM, seeded_generator
from metrology.services.linearity import ramp_linearity


def floor_quantizer(levels, vref=1.0):
    return np.clip(np.floor((np.asarray(levels) + vref) / (2 * vref) * 4096), 0, 4095).astype(np.int64)


def with_stage(cfg: AdcConfig, index: int, **changes) -> AdcConfig:
    stages = list(cfg.stages)
    stages[index] = replace(stages[index], **changes)
    return replace(cfg, stages=stages)


def forced_chain(levels, stage: int, shift: int):
    """
    Ideal chain with one stage decision moved by ``shift``. The mask marks
    inputs whose moved decision stays in range and leaves the residue
    unclipped.
    """
    residue = np.asarray(levels, dtype=np.float64)
    valid = np.ones(residue.shape, dtype=bool)
    columns = []
    for index in range(N_STAGES):
        code = adsc_decide(residue, 1.0, (0.0, 0.0)).astype(np.int64)
        if index == stage:
            code = code + shift
            valid &= (code >= 0) & (code <= 2) & (np.abs(2 * residue - (code - 1)) <= 1.0)
            code = np.clip(code, 0, 2)
        columns.append(code)
        residue = mdac_residue(residue, code, StageConfig(), 1.0)
    flash = flash_decide(residue, 1.0, (0.0, 0.0, 0.0))
    return correct_stream(RawCodeFrames(np.stack(columns, axis=1), flash)), valid


class ExceptionTests(SimpleTestCase):

    def test_message_carries_module_tag(self):
        self.assertEqual(str(StimulusError("no coherent bin: x")), "[signals] no coherent bin: x")
        self.assertEqual(str(PipelineError("bad")), "[pipeline] bad")
        self.assertEqual(SimulationError("boom", module='bias').module, 'bias')


class CoherentBinTests(SimpleTestCase):

    def test_ten_megahertz_at_nominal_rate(self):
        actual, bin_index = coherent_bin(110e6, 10e6, 8192)
        self.assertEqual(bin_index, 745)
        self.assertAlmostEqual(actual, 745 * 110e6 / 8192)
        self.assertAlmostEqual(actual / 1e6, 10.0037, places=3)

    def test_tie_resolves_to_higher_bin(self):
        actual, bin_index = coherent_bin(100e6, 25e6, 4096)
        self.assertEqual(bin_index, 1025)
        self.assertAlmostEqual(actual / 1e6, 25.024, places=3)

    def test_above_nyquist_is_an_error(self):
        with self.assertRaisesMessage(StimulusError, "no coherent bin"):
            coherent_bin(110e6, 60e6, 8192)

    def test_bin_matches_exhaustive_scan(self):
        n = 1024
        for target in (1e6, 3.3e6, 17e6, 49.9e6):
            _, bin_index = coherent_bin(100e6, target, n)
            exact = target * n / 100e6
            scan = [m for m in range(1, n // 2) if m % 2 and math.gcd(m, n) == 1]
            best = min(abs(m - exact) for m in scan)
            self.assertEqual(abs(bin_index - exact), best)
            self.assertEqual(bin_index % 2, 1)

    def test_non_power_of_two_record(self):
        with self.assertRaises(StimulusError):
            coherent_bin(110e6, 10e6, 1000)

    def test_folded_frequency_under_samples(self):
        actual, bin_index = folded_coherent_frequency(110e6, 100e6, 8192)
        # 100 MHz at 110 MS/s aliases to 10 MHz in the captured spectrum
        self.assertEqual(bin_index, 745)
        self.assertAlmostEqual(actual, 110e6 - 745 * 110e6 / 8192)

    def test_folded_frequency_matches_coherent_bin_below_nyquist(self):
        self.assertEqual(folded_coherent_frequency(110e6, 10e6, 8192), coherent_bin(110e6, 10e6, 8192))


class StimulusTests(SimpleTestCase):

    def test_zero_amplitude_gives_dc(self):
        stream = gen_sine(StimulusSpec(amplitude=0.0, dc_offset=0.125, n_samples=64), 100e6)
        np.testing.assert_array_equal(stream.samples, np.full(64, 0.125))

    def test_quarter_rate_sine_cycles(self):
        stream = gen_sine(StimulusSpec(amplitude=1.0, frequency_hz=25e6, n_samples=16), 100e6)
        np.testing.assert_allclose(stream.samples[:8], [0, 1, 0, -1, 0, 1, 0, -1], atol=1e-12)

    def test_slopes_are_analytic(self):
        spec = StimulusSpec(amplitude=0.5, frequency_hz=1e6, n_samples=32)
        stream = gen_sine(spec, 100e6)
        t = np.arange(32) / 100e6
        np.testing.assert_allclose(stream.slopes, 0.5 * 2 * np.pi * 1e6 * np.cos(2 * np.pi * 1e6 * t))

    def test_jitter_error_follows_aperture_law(self):
        fs, f, sigma = 110e6, 100e6, 0.8e-12
        n = 2 ** 16
        clean = gen_sine(StimulusSpec(amplitude=1.0, frequency_hz=f, n_samples=n), fs)
        jittered = gen_sine(StimulusSpec(amplitude=1.0, frequency_hz=f, n_samples=n, jitter_sigma=sigma, rng_seed=7), fs)
        error = jittered.samples - clean.samples
        snr = 10 * np.log10(0.5 / np.mean(error ** 2))
        self.assertAlmostEqual(snr, -20 * np.log10(2 * np.pi * f * sigma), delta=0.2)

    def test_jitter_law_over_aperture_products(self):
        fs, f, n = 110e6, 100e6, 2 ** 16
        clean = gen_sine(StimulusSpec(amplitude=1.0, frequency_hz=f, n_samples=n), fs)
        for product in (1e-5, 1e-4, 1e-3):
            spec = StimulusSpec(amplitude=1.0, frequency_hz=f, n_samples=n, jitter_sigma=product / f, rng_seed=11)
            error = gen_sine(spec, fs).samples - clean.samples
            snr = 10 * np.log10(0.5 / np.mean(error ** 2))
            self.assertAlmostEqual(snr, -20 * np.log10(2 * np.pi * product), delta=0.2, msg=f"f*sigma={product}")

    def test_coherent_sine_has_no_leakage(self):
        actual, bin_index = coherent_bin(110e6, 10e6, 8192)
        stream = gen_sine(StimulusSpec(amplitude=1.0, frequency_hz=actual, n_samples=8192), 110e6)
        spectrum = np.abs(np.fft.rfft(stream.samples)) ** 2
        others = np.delete(spectrum, bin_index)
        # every other bin below -250 dBc
        self.assertLess(others.max() / spectrum[bin_index], 1e-25)

    def test_jitter_is_seeded(self):
        spec = StimulusSpec(n_samples=256, jitter_sigma=1e-12, rng_seed=3)
        np.testing.assert_array_equal(gen_sine(spec, 110e6).samples, gen_sine(spec, 110e6).samples)

    def test_ramp_examples(self):
        np.testing.assert_array_equal(gen_ramp(3, -1, 1).samples, [-1, 0, 1])
        np.testing.assert_array_equal(gen_ramp(2, 0, 1).samples, [0, 1])
        step = np.diff(gen_ramp(4097, -1, 1).samples)
        np.testing.assert_allclose(step, 2 / 4096)

    def test_ramp_slopes_are_zero(self):
        self.assertFalse(gen_ramp(8, -1, 1).slopes.any())

    def test_ramp_rejects_inverted_bounds(self):
        with self.assertRaises(StimulusError):
            gen_ramp(16, 1, -1)

    def test_invalid_spec(self):
        with self.assertRaises(StimulusError):
            gen_sine(StimulusSpec(amplitude=-1.0), 110e6)
        with self.assertRaises(StimulusError):
            gen_sine(StimulusSpec(jitter_sigma=-1e-12), 110e6)
        with self.assertRaises(StimulusError):
            StimulusSpec(n_samples=1000).validate(spectral=True)

    def test_gen_stimulus_dispatches_ramp(self):
        stream = gen_stimulus(StimulusSpec(kind='ramp', amplitude=1.0, n_samples=17), 1e6)
        self.assertEqual(stream.samples[0], -1.0)
        self.assertEqual(stream.samples[-1], 1.0)

    def test_non_finite_samples_rejected(self):
        with self.assertRaises(StimulusError):
            SampleStream(samples=np.array([0.0, np.nan]), sample_rate_hz=1.0)

    def test_dbfs(self):
        self.assertAlmostEqual(dbfs_to_amplitude(0.0), 1.0)
        self.assertAlmostEqual(dbfs_to_amplitude(-6.0206), 0.5, places=4)


class StageDecisionTests(SimpleTestCase):

    def test_adsc_examples(self):
        self.assertEqual(adsc_decide(0.0, 1.0, (0.0, 0.0)), 1)
        self.assertEqual(adsc_decide(0.3, 1.0, (0.0, 0.0)), 2)
        self.assertEqual(adsc_decide(-0.26, 1.0, (-0.02, 0.0)), 1)
        self.assertEqual(adsc_decide(-0.26, 1.0, (0.0, 0.0)), 0)

    def test_adsc_vectorised(self):
        codes = adsc_decide(np.array([-0.5, 0.0, 0.5]), 1.0, (0.0, 0.0))
        np.testing.assert_array_equal(codes, [0, 1, 2])

    def test_mdac_examples(self):
        stage = StageConfig()
        self.assertEqual(mdac_residue(0.0, 1, stage, 1.0), 0.0)
        self.assertEqual(mdac_residue(0.5, 2, stage, 1.0), 0.0)
        self.assertAlmostEqual(mdac_residue(0.3, 2, stage, 1.0), -0.4)
        self.assertAlmostEqual(mdac_residue(0.3, 2, StageConfig(settle_epsilon=1e-3), 1.0), -0.3996)

    def test_mdac_clamps_at_reference(self):
        self.assertEqual(mdac_residue(0.9, 1, StageConfig(), 1.0), 1.0)
        self.assertEqual(mdac_residue(-0.9, 1, StageConfig(), 1.0), -1.0)

    def test_mdac_gain_error_and_noise(self):
        residue = mdac_residue(0.1, 1, StageConfig(gain_error=0.01), 1.0, noise_draw=0.001)
        self.assertAlmostEqual(residue, 0.2 * 1.01 + 0.001)

    def test_flash_examples(self):
        self.assertEqual(flash_decide(-0.75, 1.0, (0, 0, 0)), 0)
        self.assertEqual(flash_decide(0.25, 1.0, (0, 0, 0)), 2)
        self.assertEqual(flash_decide(0.5, 1.0, (0, 0, 0)), 3)
        self.assertEqual(flash_decide(0.0, 1.0, (0, 0, 0)), 2)


class FrontEndTests(SimpleTestCase):

    def test_ideal_switch_is_identity(self):
        v = np.linspace(-1, 1, 11)
        np.testing.assert_array_equal(frontend_sample(v, v, FrontEndConfig(), 110e6), v)

    def test_linear_tracking_adds_no_distortion(self):
        fe = FrontEndConfig(r_on_nominal=200.0, c_sample=1e-12)
        fs, n = 110e6, 4096
        _, bin_index = coherent_bin(fs, 20e6, n)
        stream = gen_sine(StimulusSpec(amplitude=0.9, frequency_hz=bin_index * fs / n, n_samples=n), fs)
        previous = np.roll(stream.samples, 1)
        held = frontend_sample(stream.samples, previous, fe, fs, slope=stream.slopes)
        power = np.abs(np.fft.rfft(held)) ** 2
        carrier = power[bin_index]
        harmonics = [power[min(h * bin_index % n, n - h * bin_index % n)] for h in (2, 3)]
        self.assertLess(max(harmonics) / carrier, 1e-20)
        # the lag is a real gain/phase error
        self.assertGreater(np.max(np.abs(held - stream.samples)), 1e-6)

    def test_static_curvature_is_odd(self):
        fe = FrontEndConfig(r_on_cubic_coeff=0.5, parasitic_cap_ratio=0.01)
        v = 0.8
        self.assertAlmostEqual(frontend_sample(v, v, fe, 110e6), -frontend_sample(-v, -v, fe, 110e6))

    def test_even_order_term(self):
        fe = FrontEndConfig(even_order_coeff=1e-3)
        self.assertAlmostEqual(frontend_sample(0.5, 0.5, fe, 110e6), 0.5 + 1e-3 * 0.25)

    def test_rejects_non_positive_rate(self):
        with self.assertRaises(PipelineError):
            frontend_sample(0.0, 0.0, FrontEndConfig(), 0.0)


class ConvertTests(SimpleTestCase):

    def test_midscale_frame(self):
        frame = convert_sample(0.0, ideal(), seeded_generator(0, PIPELINE_STREAM))
        self.assertEqual(frame.stage_codes, (1,) * N_STAGES)
        self.assertEqual(frame.flash_code, 2)
        self.assertEqual(correct(frame).value, MID_CODE)

    def test_full_scale_frames(self):
        rng = seeded_generator(0, PIPELINE_STREAM)
        self.assertEqual(correct(convert_sample(1.0 - 2 ** -13, ideal(), rng)).value, 4095)
        self.assertEqual(correct(convert_sample(-1.0, ideal(), rng)).value, 0)

    def test_point_three_matches_quantizer(self):
        code = correct(convert_sample(0.3, ideal(), seeded_generator(0, PIPELINE_STREAM))).value
        self.assertLessEqual(abs(code - 2662), 1)
        self.assertEqual(code, floor_quantizer(0.3))

    def test_empty_stream(self):
        frames = convert_stream(SampleStream(samples=np.empty(0), sample_rate_hz=110e6), ideal())
        self.assertEqual(len(frames), 0)
        self.assertEqual(len(correct_stream(frames)), 0)

    def test_equal_seeds_give_identical_frames(self):
        stream = gen_sine(StimulusSpec(amplitude=0.9, frequency_hz=10e6, n_samples=2048), 110e6)
        cfg = replace(silicon(), rng_seed=11)
        self.assertEqual(convert_stream(stream, cfg), convert_stream(stream, cfg))
        self.assertNotEqual(convert_stream(stream, cfg), convert_stream(stream, replace(cfg, rng_seed=12)))

    def test_stream_matches_sample_by_sample(self):
        cfg = replace(silicon(), rng_seed=5)
        stream = gen_sine(StimulusSpec(amplitude=0.9, frequency_hz=10e6, n_samples=64), 110e6)
        frames = convert_stream(stream, cfg)
        rng = seeded_generator(cfg.rng_seed, PIPELINE_STREAM)
        previous = stream.samples[0]
        for index, v in enumerate(stream.samples):
            frame = convert_sample(v, cfg, rng, f_cr=110e6, v_prev=previous, slope=stream.slopes[index])
            self.assertEqual(frame, frames[index])
            previous = v

    def test_ideal_ramp_is_monotone(self):
        codes = correct_stream(convert_stream(gen_ramp(4097, -1, 1, sample_rate_hz=110e6), ideal()))
        self.assertTrue(np.all(np.diff(codes) >= 0))
        self.assertEqual(codes[0], 0)
        self.assertEqual(codes[-1], 4095)

    def test_ideal_chain_equals_floor_quantizer(self):
        levels, codes = transfer_codes(ideal(), 2 ** 14)
        np.testing.assert_array_equal(codes, floor_quantizer(levels))
        rounded = np.clip(np.round((levels + 1) / 2 * 4096), 0, 4095)
        self.assertLessEqual(np.max(np.abs(codes - rounded)), 1)

    def test_residue_saturation_is_counted(self):
        cfg = with_stage(ideal(), 0, comparator_offsets=(0.0, 0.5))
        frames = convert_stream(gen_ramp(1024, -1, 1), cfg)
        self.assertGreater(frames.saturation_count, 0)

    def test_invalid_config(self):
        with self.assertRaises(PipelineError):
            convert_stream(gen_ramp(4, -1, 1), replace(ideal(), stages=ideal().stages[:9]))
        with self.assertRaises(PipelineError):
            convert_stream(gen_ramp(4, -1, 1), with_stage(ideal(), 2, settle_epsilon=1.0))


class RedundancyTests(SimpleTestCase):

    def test_offsets_inside_quarter_reference_are_absorbed(self):
        levels, reference = transfer_codes(ideal(), 2 ** 13)
        limit = 0.25 - 2 ** -10
        for index in range(N_STAGES):
            for side in (0, 1):
                for sign in (-1.0, 1.0):
                    offsets = [0.0, 0.0]
                    offsets[side] = sign * limit
                    cfg = with_stage(ideal(), index, comparator_offsets=tuple(offsets))
                    _, codes = transfer_codes(cfg, 2 ** 13)
                    self.assertLessEqual(
                        int(np.max(np.abs(codes - reference))), 1,
                        f"stage {index + 1} offset {offsets}",
                    )

    def test_half_reference_offset_breaks_linearity(self):
        cfg = with_stage(ideal(), 0, comparator_offsets=(0.0, 0.5))
        _, codes = transfer_codes(cfg, 2 ** 16)
        report = ramp_linearity(codes)
        self.assertGreater(np.max(np.abs(report.dnl_lsb)), 1.0)

    def test_moved_decision_is_cancelled_downstream(self):
        levels = (np.arange(4096) + 0.5) / 2048 - 1.0
        reference, _ = forced_chain(levels, 0, 0)
        for stage in range(N_STAGES):
            for shift in (-1, 1):
                codes, valid = forced_chain(levels, stage, shift)
                self.assertTrue(valid.any(), f"stage {stage + 1} shift {shift}")
                self.assertLessEqual(
                    int(np.max(np.abs(codes[valid] - reference[valid]))), 1,
                    f"stage {stage + 1} shift {shift}",
                )

    def test_quarter_reference_offsets_never_clip(self):
        ramp = gen_ramp(4097, -1, 1, sample_rate_hz=110e6)
        for index in range(N_STAGES):
            for lower in (-0.25, 0.0, 0.25):
                for upper in (-0.25, 0.0, 0.25):
                    cfg = with_stage(ideal(), index, comparator_offsets=(lower, upper))
                    self.assertEqual(convert_stream(ramp, cfg).saturation_count, 0,
                                     f"stage {index + 1} offsets {(lower, upper)}")

        rng = np.random.default_rng(5)
        for _ in range(5):
            offsets = rng.uniform(-0.25, 0.25, size=(N_STAGES, 2))
            cfg = replace(ideal(), stages=[
                replace(stage, comparator_offsets=tuple(pair)) for stage, pair in zip(ideal().stages, offsets)
            ])
            self.assertEqual(convert_stream(ramp, cfg).saturation_count, 0)


class CorrectionTests(SimpleTestCase):

    def test_correction_examples(self):
        self.assertEqual(correct(RawCodeFrame((0,) * 10, 0)).value, 0)
        self.assertEqual(correct(RawCodeFrame((2,) * 10, 3)).value, 4095)
        self.assertEqual(correct(RawCodeFrame((1,) * 10, 2)).value, 2048)

    def test_stage_weights(self):
        self.assertEqual(correct(RawCodeFrame((2,) + (0,) * 9, 3)).value, 2 * 1024 + 3)

    def test_correct_stream_singleton(self):
        np.testing.assert_array_equal(correct_stream([RawCodeFrame((1,) * 10, 2)]), [2048])

    def test_correct_stream_matches_correct(self):
        frames = convert_stream(gen_ramp(257, -1, 1), silicon())
        values = correct_stream(frames)
        self.assertEqual([correct(frame).value for frame in frames], values.tolist())

    def test_frame_validation(self):
        with self.assertRaises(PipelineError):
            RawCodeFrame((1,) * 9, 2)
        with self.assertRaises(PipelineError):
            RawCodeFrame((3,) + (1,) * 9, 2)
        with self.assertRaises(CorrectionError):
            OutputCode(4096)

    def test_frames_round_trip_through_columns(self):
        frames = [RawCodeFrame((1,) * 10, 2), RawCodeFrame((2,) * 10, 3)]
        self.assertEqual(list(RawCodeFrames.from_frames(frames)), frames)

    def test_noiseless_removes_random_terms(self):
        cfg = noiseless(silicon())
        self.assertEqual(cfg.frontend.thermal_sigma, 0.0)
        self.assertTrue(all(stage.ktc_sigma == 0 for stage in cfg.stages))
        self.assertEqual(cfg.frontend.r_on_cubic_coeff, silicon().frontend.r_on_cubic_coeff)

    def test_correct_is_monotone_in_every_field(self):
        rng = np.random.default_rng(8)
        for _ in range(200):
            stage_codes = tuple(int(code) for code in rng.integers(0, 3, N_STAGES))
            flash_code = int(rng.integers(0, 4))
            base = correct(RawCodeFrame(stage_codes, flash_code)).value
            for index in range(N_STAGES):
                if stage_codes[index] < 2:
                    raised = list(stage_codes)
                    raised[index] += 1
                    self.assertGreaterEqual(correct(RawCodeFrame(tuple(raised), flash_code)).value, base)
            if flash_code < 3:
                self.assertGreaterEqual(correct(RawCodeFrame(stage_codes, flash_code + 1)).value, base)


class BiasTests(SimpleTestCase):

    def test_bias_current_examples(self):
        self.assertAlmostEqual(bias_current(1e-12, 100e6, 1.0), 100e-6)
        self.assertAlmostEqual(bias_current(1e-12, 110e6, 0.9), 99e-6)
        self.assertAlmostEqual(bias_current(1e-12, 220e6, 1.0), 2 * bias_current(1e-12, 110e6, 1.0))

    def test_bias_current_rejects_non_positive(self):
        with self.assertRaises(BiasError):
            bias_current(0.0, 110e6, 1.0)

    def test_stage_scales(self):
        scales = stage_scales()
        self.assertEqual(len(scales), 10)
        self.assertEqual(scales[0], 1.0)
        self.assertAlmostEqual(scales[1], 2 / 3)
        self.assertAlmostEqual(scales[6], 1 / 3)

    def test_linear_model_is_rate_independent(self):
        cfg = BiasConfig(gm_model='linear')
        self.assertAlmostEqual(settle_epsilon(1, 55e6, cfg), settle_epsilon(1, 110e6, cfg))

    def test_sqrt_model_closed_form(self):
        cfg = BiasConfig(gm_model='sqrt', gbw_calibration=16.0)
        self.assertAlmostEqual(settle_epsilon(1, 110e6, cfg), math.exp(-16), delta=1e-12)
        self.assertAlmostEqual(settle_epsilon(1, 140e6, cfg), math.exp(-16 * math.sqrt(110 / 140)), delta=1e-12)
        self.assertAlmostEqual(settle_epsilon(1, 140e6, cfg) / 7.0e-7, 1.0, delta=0.02)

    def test_stages_settle_alike(self):
        cfg = BiasConfig(gm_model='sqrt')
        values = [settle_epsilon(index, 130e6, cfg) for index in range(1, 11)]
        np.testing.assert_allclose(values, values[0])

    def test_ideal_model_settles_fully(self):
        self.assertEqual(settle_epsilon(3, 140e6, BiasConfig(gm_model='ideal')), 0.0)

    def test_static_and_bias_errors_combine(self):
        cfg = with_stage(replace(ideal(), bias=BiasConfig(gm_model='linear', gbw_calibration=5.0)), 0,
                         settle_epsilon=1e-3)
        expected = 1 - (1 - 1e-3) * (1 - math.exp(-5.0))
        self.assertAlmostEqual(stage_epsilons(cfg, 110e6)[0], expected)

    def test_invalid_stage_index(self):
        with self.assertRaises(BiasError):
            settle_epsilon(11, 110e6, BiasConfig())

    def test_power_model(self):
        self.assertAlmostEqual(power_mw(110e6), 97.0, places=9)
        self.assertAlmostEqual(power_mw(130e6), 110.0, places=9)
        self.assertAlmostEqual(power_mw(0.0), 25.5)

    def test_power_is_linear_in_rate(self):
        a, b = 37e6, 91e6
        self.assertAlmostEqual(power_mw((a + b) / 2), (power_mw(a) + power_mw(b)) / 2)


class PresetTests(SimpleTestCase):

    def test_presets_validate(self):
        self.assertIsInstance(get_preset('ideal').validate(), AdcConfig)
        self.assertIsInstance(get_preset('silicon').validate(), AdcConfig)

    def test_unknown_preset(self):
        with self.assertRaises(ConfigurationError):
            get_preset('typical')

    def test_config_dict_round_trip(self):
        cfg = with_stage(silicon(), 4, comparator_offsets=(0.01, -0.02), gain_error=1e-3)
        self.assertEqual(AdcConfig.from_dict(cfg.to_dict()), cfg)
