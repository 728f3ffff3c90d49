"""Spectrograms, mel filterbanks, log-mel features, 0-1 normalization, and
spectrogram blurring, plus feature export (raw/CSV/PGM).

The default feature pipeline (16 kHz, 1 s, Hann 1024, hop 256, 1024
channels, 256 mels) produces a 63 x 256 (time x mel) log-mel grid.
"""

import json
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import backend
from .gabor import TfMatrix
from .kernels import Kernel

POWER = "power"
DB = "db"

DEFAULT_DB_FLOOR = 1e-10


@dataclass(eq=False)
class Spectrogram:
    """Real nonnegative (power) or dB-scale grid, frames x channels/mels."""

    values: np.ndarray
    scale: str = POWER
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError("spectrogram values must be 2-D")
        if not np.all(np.isfinite(values)):
            raise ValueError("spectrogram values must be finite")
        if self.scale not in (POWER, DB):
            raise ValueError(f"unknown scale {self.scale!r}")
        if self.scale == POWER and values.size and values.min() < 0:
            raise ValueError("power-scale values must be nonnegative")
        self.values = values

    @property
    def shape(self):
        return self.values.shape

    @classmethod
    def _unchecked(cls, values, scale, meta):
        # blurred/normalized grids keep their source scale tag but may leave
        # the strict power cone (negative kernel taps, rounding), so skip
        # the constructor's sign check
        out = cls.__new__(cls)
        out.values = np.ascontiguousarray(values, dtype=np.float64)
        out.scale = scale
        out.meta = meta
        return out


@dataclass(eq=False)
class MelFilterbank:
    """Triangular filters, rows = mels, columns = half-spectrum FFT bins."""

    triangles: np.ndarray
    sample_rate: int
    n_fft_channels: int
    fmin: float
    fmax: float
    scale_formula: str = "htk"

    @property
    def n_mels(self):
        return self.triangles.shape[0]


def hz_to_mel(freq):
    return 2595.0 * np.log10(1.0 + np.asarray(freq, dtype=np.float64) / 700.0)


def mel_to_hz(mel):
    return 700.0 * (10.0 ** (np.asarray(mel, dtype=np.float64) / 2595.0) - 1.0)


def spectrogram(tf: TfMatrix) -> Spectrogram:
    """Squared modulus of the coefficient grid; phase is discarded."""
    vals = np.abs(tf.coeffs) ** 2
    meta = {
        "L": tf.lattice.num_samples, "a": tf.lattice.hop,
        "M": tf.lattice.channels, "W": tf.lattice.win_length,
        "mode": tf.lattice.mode, "sample_rate": tf.sample_rate,
    }
    return Spectrogram(vals, POWER, meta)


def mel_filterbank(sample_rate: int, n_fft_channels: int, n_mels: int,
                   fmin: float = 0.0, fmax: float | None = None,
                   normalize_rows: bool = False) -> MelFilterbank:
    """Triangular filters equally spaced on the HTK mel axis
    mel(f) = 2595*log10(1 + f/700), over half-spectrum bins 0..M/2.

    Every bin strictly inside (fmin, fmax) lands in the support of at least
    one filter. normalize_rows divides each filter by its l1 mass (off by
    default). Construction is cached per parameter tuple (the GIL keeps the
    cache safe under concurrent callers); treat the triangles as read-only.
    """
    if fmax is not None:
        fmax = float(fmax)
    return _mel_filterbank_cached(int(sample_rate), int(n_fft_channels),
                                  int(n_mels), float(fmin), fmax,
                                  bool(normalize_rows))


@lru_cache(maxsize=32)
def _mel_filterbank_cached(sample_rate, n_fft_channels, n_mels, fmin, fmax,
                           normalize_rows) -> MelFilterbank:
    sr, M = int(sample_rate), int(n_fft_channels)
    if fmax is None:
        fmax = sr / 2.0
    if not (0 <= fmin < fmax <= sr / 2.0):
        raise ValueError(f"need 0 <= fmin < fmax <= sr/2, got [{fmin}, {fmax}]")
    if n_mels < 1:
        raise ValueError("n_mels must be >= 1")
    n_bins = M // 2 + 1
    bin_freqs = np.arange(n_bins) * (sr / M)
    edges = mel_to_hz(np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), n_mels + 2))
    tri = np.zeros((n_mels, n_bins))
    for k in range(n_mels):
        left, center, right = edges[k], edges[k + 1], edges[k + 2]
        up = (bin_freqs - left) / max(center - left, 1e-30)
        down = (right - bin_freqs) / max(right - center, 1e-30)
        tri[k] = np.maximum(0.0, np.minimum(up, down))
    if normalize_rows:
        mass = tri.sum(axis=1, keepdims=True)
        tri = np.divide(tri, mass, out=np.zeros_like(tri), where=mass > 0)
    inner = (bin_freqs > fmin) & (bin_freqs < fmax)
    if np.any(inner & (tri.sum(axis=0) == 0)):
        raise ValueError("filterbank leaves interior bins uncovered; "
                         "increase n_mels or adjust the band")
    return MelFilterbank(tri, sr, M, float(fmin), float(fmax))


def log_mel(spec: Spectrogram, fb: MelFilterbank,
            floor: float = DEFAULT_DB_FLOOR) -> Spectrogram:
    """Mel-project a power spectrogram and convert to dB:
    10*log10(max(fb @ power, floor)).

    Accepts the full-channel power grid (the redundant upper half is sliced
    off) or an already half-spectrum grid."""
    if spec.scale != POWER:
        raise ValueError("log_mel expects a power-scale spectrogram")
    n_bins = fb.triangles.shape[1]
    if spec.values.shape[1] == fb.n_fft_channels:
        power = spec.values[:, :n_bins]
    elif spec.values.shape[1] == n_bins:
        power = spec.values
    else:
        raise ValueError(f"spectrogram has {spec.values.shape[1]} channels; "
                         f"filterbank expects {fb.n_fft_channels} or {n_bins}")
    mel_power = power @ fb.triangles.T
    vals = 10.0 * np.log10(np.maximum(mel_power, floor))
    meta = dict(spec.meta, n_mels=fb.n_mels, fmin=fb.fmin, fmax=fb.fmax,
                floor=floor, scale_formula=fb.scale_formula)
    return Spectrogram(vals, DB, meta)


def normalize_01(spec: Spectrogram) -> Spectrogram:
    """Affine rescale to [0, 1]; constant input maps to all zeros."""
    lo, hi = float(spec.values.min()), float(spec.values.max())
    if hi > lo:
        vals = (spec.values - lo) / (hi - lo)
    else:
        vals = np.zeros_like(spec.values)
    return Spectrogram._unchecked(vals, spec.scale, dict(spec.meta, normalized=True))


def spec_blur(spec: Spectrogram, kernel: Kernel, mode: str = "circular"
              ) -> Spectrogram:
    """2D convolution of the real grid with the kernel taps. Both axes wrap
    in circular mode; zeropad-time leaves the frequency/mel axis circular
    but zero-extends time."""
    out = backend.conv2d_taps(spec.values.astype(np.complex128), kernel.taps,
                              kernel.anchor[0], kernel.anchor[1],
                              mode == "circular").real
    return Spectrogram._unchecked(out, spec.scale, dict(spec.meta, blurred=True))


def save_feature(spec: Spectrogram, basepath, fmt: str = "raw") -> list:
    """Export a feature grid. 'raw' writes little-endian float32 row-major
    plus a JSON sidecar; 'csv' writes comma-separated rows; 'pgm' writes an
    8-bit binary PGM of the 0-1 normalized grid. Returns written paths."""
    basepath = Path(basepath)
    basepath.parent.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt == "raw":
        data = spec.values.astype("<f4").tobytes(order="C")
        raw_path = basepath.with_suffix(".f32")
        raw_path.write_bytes(data)
        sidecar = {"shape": list(spec.shape), "scale": spec.scale,
                   "dtype": "<f4", "order": "C", "meta": spec.meta}
        side_path = basepath.with_suffix(".json")
        side_path.write_text(json.dumps(sidecar, indent=1, sort_keys=True))
        written += [raw_path, side_path]
    elif fmt == "csv":
        csv_path = basepath.with_suffix(".csv")
        np.savetxt(csv_path, spec.values, delimiter=",", fmt="%.9g")
        written.append(csv_path)
    elif fmt == "pgm":
        norm = normalize_01(spec)
        img = np.round(norm.values * 255.0).astype(np.uint8)
        # PGM rows top-down: highest channel/mel on top, time left to right
        img = img.T[::-1]
        pgm_path = basepath.with_suffix(".pgm")
        header = f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode()
        pgm_path.write_bytes(header + img.tobytes(order="C"))
        written.append(pgm_path)
    else:
        raise ValueError(f"unknown feature format {fmt!r}")
    return written


def load_feature(basepath) -> Spectrogram:
    basepath = Path(basepath)
    sidecar = json.loads(basepath.with_suffix(".json").read_text())
    raw = np.frombuffer(basepath.with_suffix(".f32").read_bytes(), dtype="<f4")
    vals = raw.reshape(sidecar["shape"]).astype(np.float64)
    return Spectrogram(vals, sidecar["scale"], sidecar.get("meta", {}))
