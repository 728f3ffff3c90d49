"""Waveform I/O, padding, and deterministic synthetic test signals.

WAV support is deliberately narrow: RIFF little-endian, 16-bit PCM or 32-bit
IEEE float in, 32-bit float out (lossless for float32 payloads). Multichannel
files are reduced to channel 0 with a warning.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.io import wavfile

from .errors import FormatError, UnsupportedError

GEN_KINDS = ("sinusoid", "chirp", "white_noise", "impulse", "gaussian_pulse")


@dataclass(frozen=True, eq=False)
class Signal:
    """A finite sampled waveform.

    samples are float64 (or complex128 when is_complex) and must be finite;
    sample_rate is in Hz.
    """

    samples: np.ndarray
    sample_rate: int
    is_complex: bool = field(default=False)

    def __post_init__(self):
        samples = np.asarray(self.samples)
        if samples.ndim != 1:
            raise ValueError(f"samples must be 1-D, got shape {samples.shape}")
        is_complex = bool(np.iscomplexobj(samples))
        samples = samples.astype(np.complex128 if is_complex else np.float64)
        if samples.size and not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")
        if int(self.sample_rate) <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))
        object.__setattr__(self, "is_complex", is_complex)

    def __len__(self):
        return self.samples.shape[0]

    @property
    def duration(self):
        return len(self) / self.sample_rate

    def energy(self):
        """Squared l2 norm of the samples."""
        return float(np.sum(np.abs(self.samples) ** 2))


def read_wav(path) -> Signal:
    """Read a WAV file into a Signal scaled to [-1, 1].

    Accepts 16-bit PCM (scaled by 1/32768) and 32-bit float payloads; other
    encodings raise UnsupportedError, malformed files raise FormatError.
    """
    try:
        rate, data = wavfile.read(path)
    except FileNotFoundError:
        raise
    except ValueError as exc:
        raise FormatError(f"{path}: not a readable WAV file ({exc})") from exc
    if data.ndim == 2:
        warnings.warn(f"{path}: {data.shape[1]} channels, keeping channel 0")
        data = data[:, 0]
    if data.dtype == np.int16:
        samples = data.astype(np.float64) / 32768.0
    elif data.dtype == np.float32:
        samples = data.astype(np.float64)
    else:
        raise UnsupportedError(
            f"{path}: unsupported sample encoding {data.dtype}; "
            "only 16-bit PCM and 32-bit float are accepted")
    return Signal(samples, rate)


def write_wav(signal: Signal, path) -> None:
    """Write a real Signal as 32-bit float WAV (read_wav inverts it exactly)."""
    if signal.is_complex:
        raise ValueError("cannot write complex samples to WAV")
    if signal.samples.size and not np.all(np.isfinite(signal.samples)):
        raise ValueError("cannot write non-finite samples")
    wavfile.write(path, signal.sample_rate, signal.samples.astype(np.float32))


def pad_to_length(signal: Signal, target: int) -> Signal:
    """Zero-pad symmetrically to `target` samples (floor(extra/2) in front)."""
    extra = int(target) - len(signal)
    if extra < 0:
        raise ValueError(f"target {target} is shorter than signal ({len(signal)})")
    if extra == 0:
        return signal
    front = extra // 2
    padded = np.pad(signal.samples, (front, extra - front))
    return Signal(padded, signal.sample_rate)


def gen_signal(kind: str, *, sample_rate: int, length: int, seed: int = 0,
               **params) -> Signal:
    """Deterministic synthetic test signals.

    Kinds: sinusoid(frequency, phase), chirp(f0, f1), white_noise(),
    impulse(position), gaussian_pulse(center, width, frequency). Unit peak
    amplitude except white_noise (unit variance). Pure function of
    (kind, params, seed).
    """
    if kind not in GEN_KINDS:
        raise ValueError(f"unknown signal kind {kind!r}; choose from {GEN_KINDS}")
    sr = int(sample_rate)
    n = int(length)
    t = np.arange(n, dtype=np.float64)
    nyquist = sr / 2.0

    if kind == "sinusoid":
        freq = float(params.pop("frequency"))
        phase = float(params.pop("phase", 0.0))
        _reject_extra(params)
        if freq >= nyquist:
            raise ValueError(f"frequency {freq} >= Nyquist {nyquist}")
        samples = np.sin(2.0 * np.pi * freq * t / sr + phase)
    elif kind == "chirp":
        f0 = float(params.pop("f0"))
        f1 = float(params.pop("f1"))
        _reject_extra(params)
        if max(f0, f1) >= nyquist:
            raise ValueError(f"chirp endpoint >= Nyquist {nyquist}")
        dur = n / sr
        phase = 2.0 * np.pi * (f0 * t / sr + (f1 - f0) * (t / sr) ** 2 / (2.0 * dur))
        samples = np.sin(phase)
    elif kind == "white_noise":
        _reject_extra(params)
        samples = np.random.default_rng(seed).standard_normal(n)
    elif kind == "impulse":
        pos = int(params.pop("position", 0))
        _reject_extra(params)
        if not 0 <= pos < n:
            raise ValueError(f"impulse position {pos} outside [0, {n})")
        samples = np.zeros(n)
        samples[pos] = 1.0
    else:  # gaussian_pulse
        center = float(params.pop("center", n / 2))
        width = float(params.pop("width", n / 16))
        freq = float(params.pop("frequency", 0.0))
        _reject_extra(params)
        if width <= 0:
            raise ValueError("gaussian_pulse width must be positive")
        if freq >= nyquist:
            raise ValueError(f"frequency {freq} >= Nyquist {nyquist}")
        samples = np.exp(-np.pi * ((t - center) / width) ** 2)
        if freq:
            samples = samples * np.cos(2.0 * np.pi * freq * (t - center) / sr)
    return Signal(samples, sr)


def _reject_extra(params):
    if params:
        raise ValueError(f"unexpected parameters: {sorted(params)}")
