"""2D blurring kernels on the time-frequency grid and position-dependent
kernel fields.

Kernels are small real tap grids with odd extents, anchored at the center
tap. The frequency axis of every grid operation is circular (DFT bins are
cyclic); the time axis is circular or zero-extended per call.
"""

from dataclasses import dataclass

import numpy as np
from scipy.signal import convolve2d

from . import backend
from .gabor import Lattice, TfMatrix

CONV_MODES = ("circular", "zeropad-time")

# Above this tap count, circular-mode convolution goes through the FFT
# (mathematically identical, same-order rounding); small kernels stay on the
# direct tap path so the delta kernel is bit-exact.
_FFT_TAP_THRESHOLD = 257


@dataclass(frozen=True, eq=False)
class Kernel:
    """Real 2D tap grid with odd extents, anchored at the center tap."""

    taps: np.ndarray
    mass: float = None
    anchor: tuple = None

    def __post_init__(self):
        taps = np.ascontiguousarray(self.taps, dtype=np.float64)
        if taps.ndim != 2:
            raise ValueError("kernel taps must be 2-D")
        if taps.shape[0] % 2 == 0 or taps.shape[1] % 2 == 0:
            raise ValueError(f"kernel extents must be odd, got {taps.shape}")
        if not np.all(np.isfinite(taps)):
            raise ValueError("kernel taps must be finite")
        object.__setattr__(self, "taps", taps)
        object.__setattr__(self, "mass", float(np.sum(taps)))
        object.__setattr__(self, "anchor",
                           ((taps.shape[0] - 1) // 2, (taps.shape[1] - 1) // 2))

    @property
    def shape(self):
        return self.taps.shape

    def l1_norm(self) -> float:
        return float(np.sum(np.abs(self.taps)))

    def scaled(self, factor: float) -> "Kernel":
        return custom_kernel(self.taps * float(factor))


@dataclass(eq=False)
class KernelField:
    """Per-bin kernel map: taps[n, m] is the kernel applied at grid bin
    (n, m), shape (n_frames, channels, kt, kf), all extents odd."""

    taps: np.ndarray
    lattice: Lattice

    def __post_init__(self):
        taps = np.ascontiguousarray(self.taps, dtype=np.float64)
        if taps.ndim != 4:
            raise ValueError("field taps must be 4-D")
        expected = (self.lattice.n_frames, self.lattice.channels)
        if taps.shape[:2] != expected:
            raise ValueError(f"field grid {taps.shape[:2]} != lattice grid {expected}")
        if taps.shape[2] % 2 == 0 or taps.shape[3] % 2 == 0:
            raise ValueError(f"field kernel extents must be odd, got {taps.shape[2:]}")
        if not np.all(np.isfinite(taps)):
            raise ValueError("field taps must be finite")
        self.taps = taps

    @property
    def anchor(self):
        return ((self.taps.shape[2] - 1) // 2, (self.taps.shape[3] - 1) // 2)


def custom_kernel(taps) -> Kernel:
    return Kernel(np.asarray(taps, dtype=np.float64))


def kernel_from_config(data: dict) -> Kernel:
    """Build a kernel from its config literal:
    {"kind": "gaussian", "sigma_t": .., "sigma_f": .., "truncation": ..} |
    {"kind": "delta"} | {"kind": "custom", "taps": [[..], ..]}."""
    data = dict(data)
    kind = data.pop("kind", "gaussian")
    if kind == "delta":
        kernel = delta_kernel()
    elif kind == "gaussian":
        kernel = gaussian_kernel(data.pop("sigma_t", 1.0),
                                 data.pop("sigma_f", 1.0),
                                 data.pop("truncation", 4.0),
                                 normalize=data.pop("normalize", True))
    elif kind == "custom":
        if "taps" not in data:
            raise ValueError("custom kernel literal needs taps")
        kernel = custom_kernel(np.asarray(data.pop("taps"), dtype=np.float64))
    else:
        raise ValueError(f"unknown kernel kind {kind!r}")
    if data:
        raise ValueError(f"kernel literal: unknown keys {sorted(data)}")
    return kernel


def delta_kernel() -> Kernel:
    """1x1 unit kernel; convolving with it is the identity."""
    return custom_kernel(np.ones((1, 1)))


def gaussian_kernel(sigma_t: float, sigma_f: float, truncation: float = 4.0,
                    normalize: bool = True) -> Kernel:
    """Sampled 2D Gaussian, truncated at `truncation` multiples of sigma per
    axis (sigma 0 collapses that axis to a single tap), mass-normalized by
    default.

    The truncation edge puts a floor on the embedded DFT: around -2e-5 at
    truncation 4, below -1e-9 only from truncation ~6. Use truncation >= 6
    (or an autocorrelation, compose(g, g)) when a certified-nonnegative DFT
    is needed."""
    if sigma_t < 0 or sigma_f < 0:
        raise ValueError("sigma must be nonnegative")
    if truncation <= 0:
        raise ValueError("truncation must be positive")

    def axis(sigma):
        if sigma == 0:
            return np.zeros(1), 1
        half = int(np.ceil(truncation * sigma))
        return np.arange(-half, half + 1, dtype=np.float64), 2 * half + 1

    it, _ = axis(sigma_t)
    jf, _ = axis(sigma_f)
    qt = (it ** 2) / (2.0 * sigma_t ** 2) if sigma_t else np.zeros(1)
    qf = (jf ** 2) / (2.0 * sigma_f ** 2) if sigma_f else np.zeros(1)
    taps = np.exp(-(qt[:, None] + qf[None, :]))
    if normalize:
        taps = taps / np.sum(taps)
    return custom_kernel(taps)


def compose(k1: Kernel, k2: Kernel) -> Kernel:
    """Full linear convolution of tap grids; masses multiply."""
    return custom_kernel(convolve2d(k1.taps, k2.taps, mode="full"))


def embed_kernel(kernel: Kernel, n_frames: int, channels: int) -> np.ndarray:
    """Place the kernel on an (n_frames, channels) circular grid with its
    anchor at the origin."""
    kt, kf = kernel.shape
    if kt > n_frames or kf > channels:
        raise ValueError(f"kernel {kernel.shape} larger than grid "
                         f"({n_frames}, {channels})")
    at, af = kernel.anchor
    grid = np.zeros((n_frames, channels))
    rows = (np.arange(kt) - at) % n_frames
    cols = (np.arange(kf) - af) % channels
    grid[np.ix_(rows, cols)] = kernel.taps
    return grid


def kernel_dft(kernel: Kernel, n_frames: int, channels: int) -> np.ndarray:
    """2D DFT of the kernel embedded at the origin of the circular grid."""
    return np.fft.fft2(embed_kernel(kernel, n_frames, channels))


def kernel_dft_min(kernel: Kernel, n_frames: int, channels: int) -> float:
    """Minimum real part of the embedded kernel's 2D DFT. Nonnegative DFT
    certifies the blurring operator built from this kernel is positive."""
    return float(kernel_dft(kernel, n_frames, channels).real.min())


def convolve_tf(tf: TfMatrix, kernel: Kernel, mode: str = "circular") -> TfMatrix:
    """Convolve a coefficient grid with a kernel, tap-wise on the complex
    values (phase retained). Frequency axis always circular; time axis
    circular or zero-extended per mode."""
    if mode not in CONV_MODES:
        raise ValueError(f"unknown convolution mode {mode!r}")
    circular_time = mode == "circular"
    N, M = tf.coeffs.shape
    if circular_time and kernel.taps.size >= _FFT_TAP_THRESHOLD \
            and kernel.shape[0] <= N and kernel.shape[1] <= M:
        out = np.fft.ifft2(np.fft.fft2(tf.coeffs) * kernel_dft(kernel, N, M))
    else:
        out = backend.conv2d_taps(tf.coeffs, kernel.taps, kernel.anchor[0],
                                  kernel.anchor[1], circular_time)
    return TfMatrix(out, tf.lattice, sample_rate=tf.sample_rate)


def constant_field(kernel: Kernel, lattice: Lattice) -> KernelField:
    """Broadcast one kernel to every grid bin."""
    shape = (lattice.n_frames, lattice.channels) + kernel.shape
    return KernelField(np.broadcast_to(kernel.taps, shape).copy(), lattice)


def mask_field(mask, lattice: Lattice) -> KernelField:
    """Field of scaled delta kernels: applying it multiplies pointwise by
    the mask."""
    mask = np.asarray(mask, dtype=np.float64)
    expected = (lattice.n_frames, lattice.channels)
    if mask.shape != expected:
        raise ValueError(f"mask shape {mask.shape} != lattice grid {expected}")
    return KernelField(mask[:, :, None, None].copy(), lattice)


def apply_field(tf: TfMatrix, field: KernelField, mode: str = "circular"
                ) -> TfMatrix:
    """Position-dependent correlation: the output at bin z is
    sum_w field[z][w] * tf[z - w]. Reduces exactly to convolve_tf for
    constant fields and to pointwise masking for mask fields."""
    if mode not in CONV_MODES:
        raise ValueError(f"unknown convolution mode {mode!r}")
    if field.lattice != tf.lattice:
        raise ValueError("field lattice does not match tf lattice")
    at, af = field.anchor
    out = backend.field_apply(tf.coeffs, field.taps, at, af, mode == "circular")
    return TfMatrix(out, tf.lattice, sample_rate=tf.sample_rate)
