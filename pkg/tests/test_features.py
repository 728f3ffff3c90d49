import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tfblur.features import (Spectrogram, hz_to_mel, load_feature, log_mel,
                             mel_filterbank, normalize_01, save_feature,
                             spec_blur, spectrogram)
from tfblur.gabor import Lattice, TfMatrix, make_window, stft
from tfblur.kernels import delta_kernel, gaussian_kernel
from tfblur.signal_io import gen_signal

LAT = Lattice(64, 4, 16, 16, "circular")


def rand_tf(seed):
    rng = np.random.default_rng(seed)
    return TfMatrix(rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16)),
                    LAT)


class TestSpectrogram:
    def test_zero(self):
        spec = spectrogram(TfMatrix(np.zeros((16, 16)), LAT))
        assert not np.any(spec.values)

    def test_phase_invariance(self):
        tf = rand_tf(0)
        rotated = TfMatrix(tf.coeffs * np.exp(1j * 0.7), LAT)
        a, b = spectrogram(tf), spectrogram(rotated)
        assert np.max(np.abs(a.values - b.values)) <= 1e-12 * np.max(a.values)

    def test_total_energy(self):
        tf = rand_tf(1)
        spec = spectrogram(tf)
        assert np.sum(spec.values) == pytest.approx(tf.norm() ** 2, rel=1e-12)

    def test_power_must_be_nonnegative(self):
        with pytest.raises(ValueError):
            Spectrogram(np.array([[-1.0]]), "power")


class TestMelFilterbank:
    def test_htk_formula(self):
        assert hz_to_mel(700.0) == pytest.approx(2595.0 * np.log10(2.0))

    def test_supports_inside_band(self):
        fb = mel_filterbank(16000, 1024, 40, fmin=100.0, fmax=6000.0)
        bin_freqs = np.arange(513) * (16000 / 1024)
        outside = (bin_freqs < 100.0) | (bin_freqs > 6000.0)
        assert not np.any(fb.triangles[:, outside])

    def test_single_triangle(self):
        fb = mel_filterbank(16000, 1024, 1, fmin=1000.0, fmax=2000.0)
        assert fb.triangles.shape == (1, 513)
        assert fb.triangles.max() > 0

    def test_invalid_band(self):
        with pytest.raises(ValueError):
            mel_filterbank(16000, 1024, 10, fmin=5000.0, fmax=4000.0)
        with pytest.raises(ValueError):
            mel_filterbank(16000, 1024, 10, fmin=0.0, fmax=9000.0)

    def test_nonnegative(self):
        fb = mel_filterbank(16000, 1024, 256)
        assert fb.triangles.min() >= 0


class TestLogMel:
    def feature_shape(self, kind, **params):
        sig = gen_signal(kind, sample_rate=16000, length=16000, **params)
        lat = Lattice(16000, 256, 1024, 1024, "zeropad")
        tf = stft(sig, make_window("hann", 1024), lat)
        fb = mel_filterbank(16000, 1024, 256)
        return log_mel(spectrogram(tf), fb).shape

    def test_default_pipeline_shape_63x256(self):
        assert self.feature_shape("sinusoid", frequency=440.0) == (63, 256)
        assert self.feature_shape("white_noise", seed=0) == (63, 256)

    def test_zero_spectrogram_hits_floor(self):
        fb = mel_filterbank(16000, 64, 8)
        spec = Spectrogram(np.zeros((4, 33)), "power")
        out = log_mel(spec, fb, floor=1e-10)
        assert np.allclose(out.values, -100.0)

    def test_doubling_power_adds_3dB(self):
        rng = np.random.default_rng(2)
        vals = rng.uniform(0.5, 2.0, (6, 33))
        fb = mel_filterbank(16000, 64, 8)
        a = log_mel(Spectrogram(vals, "power"), fb)
        b = log_mel(Spectrogram(2.0 * vals, "power"), fb)
        assert np.allclose(b.values - a.values, 10.0 * np.log10(2.0))

    def test_monotone_in_power(self):
        fb = mel_filterbank(16000, 64, 8)
        lo = log_mel(Spectrogram(np.full((3, 33), 1e-3), "power"), fb)
        hi = log_mel(Spectrogram(np.full((3, 33), 2e-3), "power"), fb)
        assert np.all(hi.values >= lo.values)

    def test_rejects_db_scale(self):
        fb = mel_filterbank(16000, 64, 8)
        with pytest.raises(ValueError):
            log_mel(Spectrogram._unchecked(np.zeros((3, 33)), "db", {}), fb)


class TestNormalize01:
    def test_range(self):
        rng = np.random.default_rng(3)
        spec = Spectrogram(rng.uniform(5, 9, (8, 8)), "power")
        out = normalize_01(spec)
        assert out.values.min() == 0.0 and out.values.max() == 1.0

    def test_idempotent(self):
        rng = np.random.default_rng(4)
        spec = Spectrogram(rng.uniform(0, 3, (8, 8)), "power")
        once = normalize_01(spec)
        twice = normalize_01(once)
        assert np.max(np.abs(twice.values - once.values)) <= 1e-12

    def test_constant_gives_zeros(self):
        out = normalize_01(Spectrogram(np.full((4, 4), 7.0), "power"))
        assert not np.any(out.values)

    @given(st.floats(0.1, 50.0), st.floats(-20.0, 20.0))
    @settings(max_examples=20, deadline=None)
    def test_affine_invariance(self, scale, offset):
        rng = np.random.default_rng(5)
        vals = rng.uniform(0, 1, (6, 6))
        vals[0, 0], vals[-1, -1] = 0.0, 1.0
        base = normalize_01(Spectrogram._unchecked(vals, "power", {}))
        moved = normalize_01(Spectrogram._unchecked(scale * vals + offset,
                                                    "power", {}))
        assert np.max(np.abs(base.values - moved.values)) <= 1e-9


class TestSpecBlur:
    def test_delta_identity(self):
        rng = np.random.default_rng(6)
        spec = Spectrogram(rng.uniform(0, 2, (16, 16)), "power")
        out = spec_blur(spec, delta_kernel())
        assert np.array_equal(out.values, spec.values)

    def test_mass_one_preserves_mean_circular(self):
        rng = np.random.default_rng(7)
        spec = Spectrogram(rng.uniform(0, 2, (16, 16)), "power")
        out = spec_blur(spec, gaussian_kernel(1.0, 2.0), mode="circular")
        assert out.values.mean() == pytest.approx(spec.values.mean(), rel=1e-12)

    def test_averaging_bounds(self):
        rng = np.random.default_rng(8)
        spec = Spectrogram(rng.uniform(1, 5, (16, 16)), "power")
        out = spec_blur(spec, gaussian_kernel(1.5, 1.5), mode="circular")
        assert out.values.max() <= spec.values.max() + 1e-12
        assert out.values.min() >= spec.values.min() - 1e-12

    def test_nonnegativity(self):
        rng = np.random.default_rng(9)
        spec = Spectrogram(rng.uniform(0, 1, (16, 16)), "power")
        out = spec_blur(spec, gaussian_kernel(1.0, 1.0))
        assert out.values.min() >= -1e-15

    def test_freq_only_kernel_preserves_time_marginal_exactly(self):
        # on the phase-free grid, a frequency-only mass-1 kernel leaves the
        # per-frame row sums untouched (contrast with the complex STFT path,
        # where phase interference reshapes the marginal)
        rng = np.random.default_rng(10)
        spec = Spectrogram(rng.uniform(0, 3, (16, 16)), "power")
        out = spec_blur(spec, gaussian_kernel(0.0, 3.0), mode="circular")
        assert np.allclose(out.values.sum(axis=1), spec.values.sum(axis=1),
                           rtol=1e-12)


class TestExport:
    def test_raw_round_trip(self, tmp_path):
        rng = np.random.default_rng(11)
        spec = Spectrogram(rng.uniform(0, 1, (5, 7)).astype(np.float32).astype(float),
                           "power", {"tag": 1})
        save_feature(spec, tmp_path / "feat", fmt="raw")
        back = load_feature(tmp_path / "feat")
        assert back.scale == "power"
        assert np.array_equal(back.values, spec.values)
        assert back.meta["tag"] == 1

    def test_csv(self, tmp_path):
        spec = Spectrogram(np.arange(6, dtype=float).reshape(2, 3), "power")
        (path,) = save_feature(spec, tmp_path / "feat", fmt="csv")
        rows = [line.split(",") for line in path.read_text().strip().splitlines()]
        assert np.allclose(np.array(rows, dtype=float), spec.values)

    def test_pgm_header_and_size(self, tmp_path):
        spec = Spectrogram(np.random.default_rng(12).uniform(0, 1, (63, 256)),
                           "power")
        (path,) = save_feature(spec, tmp_path / "img", fmt="pgm")
        blob = path.read_bytes()
        assert blob.startswith(b"P5\n63 256\n255\n")
        assert len(blob) == len(b"P5\n63 256\n255\n") + 63 * 256

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ValueError):
            save_feature(Spectrogram(np.zeros((2, 2)), "power"),
                         tmp_path / "x", fmt="bmp")
