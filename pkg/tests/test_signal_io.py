import numpy as np
import pytest

from tfblur.errors import FormatError, UnsupportedError
from tfblur.signal_io import (Signal, gen_signal, pad_to_length, read_wav,
                              write_wav)


def test_signal_validation():
    with pytest.raises(ValueError):
        Signal(np.array([1.0, np.nan]), 16000)
    with pytest.raises(ValueError):
        Signal(np.zeros(4), 0)
    with pytest.raises(ValueError):
        Signal(np.zeros((2, 2)), 16000)
    sig = Signal(np.zeros(4) + 1j, 8000)
    assert sig.is_complex and len(sig) == 4


def test_read_pcm16_max_amplitude(tmp_path):
    from scipy.io import wavfile

    path = tmp_path / "peak.wav"
    wavfile.write(path, 16000, np.array([32767], dtype=np.int16))
    sig = read_wav(path)
    assert sig.sample_rate == 16000
    assert sig.samples[0] == pytest.approx(0.99997, abs=1e-5)


def test_read_header_arithmetic(tmp_path):
    path = tmp_path / "one_second.wav"
    write_wav(Signal(np.zeros(16000), 16000), path)
    assert len(read_wav(path)) == 16000


def test_float32_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(0)
    samples = rng.uniform(-1, 1, 1000).astype(np.float32).astype(np.float64)
    path = tmp_path / "rt.wav"
    write_wav(Signal(samples, 16000), path)
    back = read_wav(path)
    assert np.array_equal(back.samples, samples)


def test_round_trip_float64_bounded_by_float32_eps(tmp_path):
    rng = np.random.default_rng(1)
    samples = rng.uniform(-1, 1, 2048)
    path = tmp_path / "quant.wav"
    write_wav(Signal(samples, 16000), path)
    back = read_wav(path)
    assert np.max(np.abs(back.samples - samples)) <= 2.0 ** -23


def test_write_rejects_nan_and_complex(tmp_path):
    bad = Signal.__new__(Signal)
    object.__setattr__(bad, "samples", np.array([np.nan]))
    object.__setattr__(bad, "sample_rate", 16000)
    object.__setattr__(bad, "is_complex", False)
    with pytest.raises(ValueError):
        write_wav(bad, tmp_path / "nan.wav")
    with pytest.raises(ValueError):
        write_wav(Signal(np.zeros(4) + 1j, 16000), tmp_path / "cplx.wav")


def test_empty_signal_round_trip(tmp_path):
    path = tmp_path / "empty.wav"
    write_wav(Signal(np.zeros(0), 16000), path)
    assert len(read_wav(path)) == 0


def test_malformed_and_unsupported(tmp_path):
    bad = tmp_path / "garbage.wav"
    bad.write_bytes(b"not a riff header at all")
    with pytest.raises(FormatError):
        read_wav(bad)
    from scipy.io import wavfile

    u8 = tmp_path / "u8.wav"
    wavfile.write(u8, 8000, np.zeros(16, dtype=np.uint8))
    with pytest.raises(UnsupportedError):
        read_wav(u8)


def test_multichannel_takes_first(tmp_path):
    from scipy.io import wavfile

    path = tmp_path / "stereo.wav"
    data = np.stack([np.ones(8), -np.ones(8)], axis=1).astype(np.float32)
    wavfile.write(path, 16000, data)
    with pytest.warns(UserWarning):
        sig = read_wav(path)
    assert np.all(sig.samples == 1.0)


def test_pad_to_length_split_and_energy():
    sig = Signal(np.ones(15000), 16000)
    padded = pad_to_length(sig, 16000)
    assert len(padded) == 16000
    assert np.all(padded.samples[:500] == 0) and np.all(padded.samples[-500:] == 0)
    assert np.all(padded.samples[500:15500] == 1.0)
    assert padded.energy() == sig.energy()
    assert pad_to_length(sig, 15000) is sig
    with pytest.raises(ValueError):
        pad_to_length(sig, 14999)


def test_gen_sinusoid_definition():
    sig = gen_signal("sinusoid", sample_rate=16000, length=16000,
                     frequency=440.0)
    t = np.arange(16000)
    assert np.allclose(sig.samples, np.sin(2 * np.pi * 440.0 * t / 16000))
    with pytest.raises(ValueError):
        gen_signal("sinusoid", sample_rate=16000, length=100, frequency=8000.0)


def test_gen_white_noise_deterministic_unit_variance():
    a = gen_signal("white_noise", sample_rate=16000, length=50000, seed=3)
    b = gen_signal("white_noise", sample_rate=16000, length=50000, seed=3)
    c = gen_signal("white_noise", sample_rate=16000, length=50000, seed=4)
    assert np.array_equal(a.samples, b.samples)
    assert not np.array_equal(a.samples, c.samples)
    assert np.var(a.samples) == pytest.approx(1.0, rel=0.05)


def test_gen_impulse_and_pulse():
    imp = gen_signal("impulse", sample_rate=16000, length=64, position=10)
    assert np.count_nonzero(imp.samples) == 1 and imp.samples[10] == 1.0
    pulse = gen_signal("gaussian_pulse", sample_rate=16000, length=256,
                       center=128.0, width=20.0)
    assert pulse.samples[128] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        gen_signal("impulse", sample_rate=16000, length=64, position=64)
    with pytest.raises(ValueError):
        gen_signal("nope", sample_rate=16000, length=64)


def test_gen_chirp_endpoints():
    sig = gen_signal("chirp", sample_rate=16000, length=16000, f0=100.0,
                     f1=4000.0)
    assert len(sig) == 16000
    with pytest.raises(ValueError):
        gen_signal("chirp", sample_rate=16000, length=100, f0=100.0, f1=9000.0)
