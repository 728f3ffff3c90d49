"""Discrete Gabor analysis: STFT, painless dual/tight windows, synthesis,
Gabor projection, and an inner-product (Moyal-type) residual check.

Conventions, fixed once for the whole library:

* Analysis: ``coeffs[n, m] = sum_t x(t) conj(w(t - n*hop)) exp(-2j*pi*m*t/M)``
  with ``M = channels`` DFT bins, frames at ``t = n*hop``, and the window
  origin at its first sample.
* Synthesis is the exact adjoint:
  ``x(t) = sum_{n,m} F[n, m] w(t - n*hop) exp(+2j*pi*m*t/M)``.
* Circular mode works on the cyclic group Z_L and requires hop | L and
  channels | L (the modulation characters must be L-periodic); every
  reconstruction/inner-product identity is then exact. Zeropad mode reads
  off-signal samples as zero and is meant for audio-plausible features, not
  for identity checks.
* Painless case throughout: win_length <= channels and hop <= win_length,
  so the frame operator is diagonal and duals are pointwise divisions.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import backend
from .errors import FormatError, NotAFrameError, UnsupportedError
from .signal_io import Signal

CIRCULAR = "circular"
ZEROPAD = "zeropad"

_FRAME_DIAGONAL_TINY = 1e-300


@dataclass(frozen=True)
class Lattice:
    """Sampling geometry of the time-frequency grid."""

    num_samples: int
    hop: int
    channels: int
    win_length: int
    mode: str = CIRCULAR

    def __post_init__(self):
        L, a, M, W = (int(self.num_samples), int(self.hop),
                      int(self.channels), int(self.win_length))
        if self.mode not in (CIRCULAR, ZEROPAD):
            raise ValueError(f"unknown lattice mode {self.mode!r}")
        if min(L, a, M, W) < 1:
            raise ValueError("lattice parameters must be positive")
        if W > M:
            raise ValueError(f"painless condition violated: win_length {W} > channels {M}")
        if a > W:
            raise ValueError(f"hop {a} exceeds win_length {W}")
        if M > L:
            raise ValueError(f"channels {M} exceed num_samples {L}")
        if self.mode == CIRCULAR:
            if L % a:
                raise ValueError(f"circular mode needs hop | num_samples ({a} | {L})")
            if L % M:
                raise ValueError(f"circular mode needs channels | num_samples ({M} | {L})")

    @property
    def n_frames(self) -> int:
        if self.mode == CIRCULAR:
            return self.num_samples // self.hop
        return -(-self.num_samples // self.hop)

    @property
    def is_circular(self) -> bool:
        return self.mode == CIRCULAR


@dataclass(frozen=True, eq=False)
class Window:
    """Analysis/synthesis window of length win_length."""

    values: np.ndarray
    kind: str = "custom"

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("window values must be a nonempty 1-D sequence")
        values = values.astype(np.complex128 if np.iscomplexobj(values)
                               else np.float64)
        if not np.all(np.isfinite(values)):
            raise ValueError("window values must be finite")
        if not np.any(values != 0):
            raise ValueError("window must not be identically zero")
        object.__setattr__(self, "values", values)

    @property
    def win_length(self) -> int:
        return self.values.shape[0]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.values))


@dataclass(eq=False)
class TfMatrix:
    """Complex STFT coefficient grid, shape (n_frames, channels)."""

    coeffs: np.ndarray
    lattice: Lattice
    sample_rate: int | None = None

    def __post_init__(self):
        coeffs = np.ascontiguousarray(self.coeffs, dtype=np.complex128)
        expected = (self.lattice.n_frames, self.lattice.channels)
        if coeffs.shape != expected:
            raise ValueError(f"coeffs shape {coeffs.shape} != lattice grid {expected}")
        self.coeffs = coeffs

    @property
    def shape(self):
        return self.coeffs.shape

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))


def make_window(kind: str, win_length: int, *, width: float | None = None,
                values=None) -> Window:
    """Build a window: 'gaussian' (peak-normalized, exp(-pi((t-c)/width)^2)),
    'hann' (symmetric cosine taper), or 'custom' (explicit values)."""
    W = int(win_length)
    if W < 1:
        raise ValueError("win_length must be >= 1")
    if kind == "gaussian":
        lam = float(width) if width is not None else W / 4.0
        if lam <= 0:
            raise ValueError("gaussian width must be positive")
        t = np.arange(W, dtype=np.float64)
        vals = np.exp(-np.pi * ((t - (W - 1) / 2.0) / lam) ** 2)
        vals /= vals.max()
    elif kind == "hann":
        if W == 1:
            vals = np.ones(1)
        else:
            t = np.arange(W, dtype=np.float64)
            vals = 0.5 - 0.5 * np.cos(2.0 * np.pi * t / (W - 1))
    elif kind == "custom":
        if values is None:
            raise ValueError("custom window needs explicit values")
        return Window(np.asarray(values), kind="custom")
    else:
        raise ValueError(f"unknown window kind {kind!r}")
    return Window(vals, kind=kind)


def random_trig_window(rng, win_length: int, degree: int = 1) -> Window:
    """Random low-degree trigonometric window supported on [0, win_length).

    Windows of degree d are spanned by exp(2j*pi*k*t/W), |k| <= d. For a
    pair of such windows with combined degree below win_length/hop, the
    product's hop-periodization is exactly flat, which is the condition for
    the sampled inner-product identity checked by moyal_check to hold with
    constant channels/hop. Used by the verification suite to draw window
    quadruples for which the identity is exact.
    """
    W = int(win_length)
    t = np.arange(W)
    vals = np.zeros(W, dtype=np.complex128)
    for k in range(-degree, degree + 1):
        c = rng.standard_normal() + 1j * rng.standard_normal()
        vals += c * np.exp(2j * np.pi * k * t / W)
    return Window(vals, kind="custom")


def _check_window(window: Window, lattice: Lattice):
    if window.win_length != lattice.win_length:
        raise ValueError(f"window length {window.win_length} != lattice "
                         f"win_length {lattice.win_length}")


def _samples(signal) -> np.ndarray:
    if isinstance(signal, Signal):
        return signal.samples
    return np.asarray(signal)


def stft(signal, window: Window, lattice: Lattice) -> TfMatrix:
    """Analysis transform onto the (hop, channels) lattice."""
    _check_window(window, lattice)
    x = _samples(signal)
    if x.ndim != 1 or x.shape[0] != lattice.num_samples:
        raise ValueError(f"signal length {x.shape} != lattice num_samples "
                         f"{lattice.num_samples}")
    N, M, a = lattice.n_frames, lattice.channels, lattice.hop
    seg = backend.extract_frames(x, window.values, a, N, lattice.is_circular)
    base = np.fft.fft(seg, n=M, axis=1)
    na = (a * np.arange(N)) % M
    twist = np.exp(-2j * np.pi * np.outer(na, np.arange(M)) / M)
    sr = signal.sample_rate if isinstance(signal, Signal) else None
    return TfMatrix(base * twist, lattice, sample_rate=sr)


def synthesize(tf: TfMatrix, window: Window, lattice: Lattice | None = None
               ) -> np.ndarray:
    """Adjoint transform; returns complex samples of length num_samples.

    Exact adjoint of stft with the same window:
    <stft(x), F> == <x, synthesize(F)> for all x, F.
    """
    lattice = lattice or tf.lattice
    _check_window(window, lattice)
    if tf.coeffs.shape != (lattice.n_frames, lattice.channels):
        raise ValueError(f"tf shape {tf.coeffs.shape} does not match lattice")
    M, a, L = lattice.channels, lattice.hop, lattice.num_samples
    g = M * np.fft.ifft(tf.coeffs, axis=1)
    return backend.ola_synthesize(g, window.values, a, L, lattice.is_circular)


def frame_diagonal(window: Window, lattice: Lattice) -> np.ndarray:
    """Painless frame-operator diagonal on the window support:
    d(t) = channels * sum_n |w(t - n*hop)|^2, which is hop-periodic."""
    _check_window(window, lattice)
    a, M, W = lattice.hop, lattice.channels, lattice.win_length
    poly = np.zeros(a)
    for r in range(a):
        poly[r] = np.sum(np.abs(window.values[r::a]) ** 2)
    return M * poly[np.arange(W) % a]


def dual_window(window: Window, lattice: Lattice) -> Window:
    """Canonical dual in the painless case: w / frame_diagonal.

    synthesize(stft(x, w), dual) reconstructs x exactly in circular mode.
    """
    diag = frame_diagonal(window, lattice)
    if np.min(diag) <= _FRAME_DIAGONAL_TINY:
        raise NotAFrameError("frame diagonal has a zero entry; window/lattice "
                             "pair is not a frame")
    return Window(window.values / diag, kind="dual")


def tight_window(window: Window, lattice: Lattice) -> Window:
    """Self-dual normalization w / sqrt(frame_diagonal); analysis with it is
    an isometry and synthesis with it inverts analysis exactly."""
    diag = frame_diagonal(window, lattice)
    if np.min(diag) <= _FRAME_DIAGONAL_TINY:
        raise NotAFrameError("frame diagonal has a zero entry; window/lattice "
                             "pair is not a frame")
    return Window(window.values / np.sqrt(diag), kind="tight")


def is_tight(window: Window, lattice: Lattice, tol: float = 1e-10) -> bool:
    diag = frame_diagonal(window, lattice)
    return bool(np.max(np.abs(diag - 1.0)) <= tol)


def gabor_project(tf: TfMatrix, window: Window, lattice: Lattice | None = None,
                  synthesis: str = "dual") -> TfMatrix:
    """Project a grid onto the range of the analysis transform:
    stft(synthesize(tf, gamma), w) with gamma the dual (or w itself when
    tight). Idempotent; orthogonal when the window is tight."""
    lattice = lattice or tf.lattice
    if synthesis == "tight":
        w = tight_window(window, lattice)
        gamma = w
    elif synthesis == "dual":
        w = window
        gamma = dual_window(window, lattice)
    else:
        raise ValueError(f"unknown synthesis choice {synthesis!r}")
    x = synthesize(tf, gamma, lattice)
    out = stft(x, w, lattice)
    out.sample_rate = tf.sample_rate
    return out


def moyal_check(psi1, psi2, win1: Window, win2: Window,
                lattice: Lattice) -> float:
    """Residual of the sampled inner-product identity
    <V1 psi1, V2 psi2> = (channels/hop) * <psi1, psi2> * conj(<w1, w2>),
    normalized by ||V1|| * ||V2||.

    The identity is exact on circular painless lattices whenever the product
    conj(w1)*w2 has a flat hop-periodization (always true for hop 1;
    guaranteed for low-degree trigonometric windows, see random_trig_window).
    """
    if not lattice.is_circular:
        raise UnsupportedError("moyal_check requires circular mode")
    V1 = stft(psi1, win1, lattice).coeffs
    V2 = stft(psi2, win2, lattice).coeffs
    lhs = np.vdot(V2, V1)  # sum V1 * conj(V2)
    c = lattice.channels / lattice.hop
    x1, x2 = _samples(psi1), _samples(psi2)
    sig_ip = np.vdot(x2, x1)
    win_ip = np.vdot(win2.values.astype(np.complex128),
                     win1.values.astype(np.complex128))
    rhs = c * sig_ip * np.conj(win_ip)
    scale = max(np.linalg.norm(V1) * np.linalg.norm(V2), 1e-30)
    return float(abs(lhs - rhs) / scale)


def save_tf(tf: TfMatrix, basepath) -> None:
    """Write coefficients as raw little-endian float32 (re, im interleaved,
    row-major frames-first) plus a JSON sidecar with the lattice parameters."""
    basepath = Path(basepath)
    inter = np.empty(tf.coeffs.shape + (2,), dtype="<f4")
    inter[..., 0] = tf.coeffs.real
    inter[..., 1] = tf.coeffs.imag
    basepath.with_suffix(".f32").write_bytes(inter.tobytes(order="C"))
    lat = tf.lattice
    sidecar = {
        "L": lat.num_samples, "a": lat.hop, "M": lat.channels,
        "W": lat.win_length, "mode": lat.mode, "sample_rate": tf.sample_rate,
    }
    basepath.with_suffix(".json").write_text(json.dumps(sidecar, indent=1))


def load_tf(basepath) -> TfMatrix:
    basepath = Path(basepath)
    try:
        sidecar = json.loads(basepath.with_suffix(".json").read_text())
        lattice = Lattice(sidecar["L"], sidecar["a"], sidecar["M"],
                          sidecar["W"], sidecar["mode"])
        raw = np.frombuffer(basepath.with_suffix(".f32").read_bytes(), dtype="<f4")
        inter = raw.reshape(lattice.n_frames, lattice.channels, 2)
    except (KeyError, json.JSONDecodeError, ValueError) as exc:
        raise FormatError(f"{basepath}: bad TF matrix file ({exc})") from exc
    coeffs = inter[..., 0].astype(np.float64) + 1j * inter[..., 1].astype(np.float64)
    return TfMatrix(coeffs, lattice, sample_rate=sidecar.get("sample_rate"))
