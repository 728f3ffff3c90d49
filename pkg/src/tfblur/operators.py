"""Time-frequency blurring operators and their verified properties.

The core map is analysis -> 2D kernel convolution on the coefficient grid ->
synthesis with a dual (or tight) window. Variants cover separate analysis/
synthesis windows, weighted multi-window sums, pointwise masks (localization
operators), and position-dependent kernel fields. Numerical probes for the
analytic properties live here too: weak action in signal and Fourier form,
power-iteration operator norms, and the explicit zero-operator pair.
"""

from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import UnsupportedError
from .gabor import (Lattice, TfMatrix, Window, dual_window, is_tight, stft,
                    synthesize, tight_window)
from .kernels import (Kernel, KernelField, apply_field, convolve_tf,
                      custom_kernel, kernel_dft)
from .signal_io import Signal

SYNTHESIS_CHOICES = ("dual", "tight")

# Imaginary residue below this relative level on a real input is treated as
# rounding noise and dropped.
_REALNESS_TOL = 1e-10


@dataclass(eq=False)
class BlurSpec:
    """Everything needed to apply one blurring operator."""

    window: Window
    kernel: Kernel
    lattice: Lattice
    synthesis: object = "dual"  # "dual" | "tight" | explicit Window
    conv_mode: str = "circular"
    renormalize_energy: bool = False

    def resolve_windows(self):
        """Return the (analysis, synthesis) window pair."""
        if isinstance(self.synthesis, Window):
            return self.window, self.synthesis
        if self.synthesis == "dual":
            return self.window, dual_window(self.window, self.lattice)
        if self.synthesis == "tight":
            w = tight_window(self.window, self.lattice)
            return w, w
        raise ValueError(f"unknown synthesis choice {self.synthesis!r}")


@dataclass(eq=False)
class OperatorWindowSpec:
    """Finite-rank operator window: weighted (analysis, synthesis) pairs."""

    terms: list = dc_field(default_factory=list)

    def __post_init__(self):
        if not self.terms:
            raise ValueError("operator window needs at least one term")
        for weight, w1, w2 in self.terms:
            if not np.isfinite(weight):
                raise ValueError("term weights must be finite")
            if not isinstance(w1, Window) or not isinstance(w2, Window):
                raise ValueError("terms must be (weight, Window, Window)")


def _wrap_output(samples: np.ndarray, template: Signal) -> Signal:
    if not template.is_complex:
        real_norm = np.linalg.norm(samples.real)
        imag_norm = np.linalg.norm(samples.imag)
        if imag_norm <= _REALNESS_TOL * max(real_norm, 1e-300):
            return Signal(samples.real, template.sample_rate)
    return Signal(samples, template.sample_rate)


def blur(signal: Signal, spec: BlurSpec) -> Signal:
    """Apply the blurring operator: synthesize(kernel * stft(signal)).

    With the delta kernel and dual/tight synthesis this is the identity.
    renormalize_energy rescales the output back to the input l2 norm
    (blurring typically loses energy because the coefficient phase varies
    quickly)."""
    analysis, synthesis = spec.resolve_windows()
    coeffs = stft(signal, analysis, spec.lattice)
    blurred = convolve_tf(coeffs, spec.kernel, mode=spec.conv_mode)
    out = synthesize(blurred, synthesis, spec.lattice)
    if spec.renormalize_energy:
        out_norm = np.linalg.norm(out)
        in_norm = np.linalg.norm(signal.samples)
        if out_norm > 0:
            out = out * (in_norm / out_norm)
    return _wrap_output(out, signal)


def blur_two_window(signal: Signal, analysis: Window, synthesis: Window,
                    kernel: Kernel, lattice: Lattice,
                    conv_mode: str = "circular") -> Signal:
    """Blurring with separate analysis and synthesis windows."""
    spec = BlurSpec(analysis, kernel, lattice, synthesis=synthesis,
                    conv_mode=conv_mode)
    return blur(signal, spec)


def blur_multi_window(signal: Signal, op_window: OperatorWindowSpec,
                      kernel: Kernel, lattice: Lattice,
                      conv_mode: str = "circular") -> Signal:
    """Weighted sum of two-window blurring operators (finite-rank operator
    window)."""
    acc = np.zeros(lattice.num_samples, dtype=np.complex128)
    for weight, w1, w2 in op_window.terms:
        term = blur_two_window(signal, w1, w2, kernel, lattice, conv_mode)
        acc = acc + weight * term.samples
    return _wrap_output(acc, signal)


def localize(signal: Signal, mask, window: Window, lattice: Lattice) -> Signal:
    """Localization operator: synthesize(mask * stft(signal), dual)."""
    mask = np.asarray(mask)
    coeffs = stft(signal, window, lattice)
    if mask.shape != coeffs.shape:
        raise ValueError(f"mask shape {mask.shape} != grid {coeffs.shape}")
    masked = TfMatrix(mask * coeffs.coeffs, lattice,
                      sample_rate=coeffs.sample_rate)
    out = synthesize(masked, dual_window(window, lattice), lattice)
    return _wrap_output(out, signal)


def blur_position_dependent(signal: Signal, field: KernelField,
                            window: Window, lattice: Lattice,
                            conv_mode: str = "circular") -> Signal:
    """Blurring with a per-bin kernel field; constant fields reduce to blur,
    delta-mask fields reduce to localize."""
    coeffs = stft(signal, window, lattice)
    blurred = apply_field(coeffs, field, mode=conv_mode)
    out = synthesize(blurred, dual_window(window, lattice), lattice)
    return _wrap_output(out, signal)


def weak_action(signal: Signal, window: Window, kernel: Kernel,
                lattice: Lattice, method: str = "signal") -> complex:
    """<B psi, psi> for the single-(tight-)window blurring operator.

    method="signal" applies the operator and takes the inner product in the
    signal domain; method="fourier" evaluates the equivalent grid-Fourier
    form sum(kernel_dft * |fft2(stft)|^2) / grid_size. The two agree to
    rounding and the Fourier form makes positivity manifest when the kernel
    DFT is nonnegative.
    """
    if not lattice.is_circular:
        raise UnsupportedError("weak_action requires circular mode")
    if not is_tight(window, lattice):
        raise UnsupportedError("weak_action requires a tight window "
                               "(same window on both sides)")
    coeffs = stft(signal, window, lattice)
    if method == "fourier":
        grid_ft = np.fft.fft2(coeffs.coeffs)
        k_ft = kernel_dft(kernel, *coeffs.shape)
        return complex(np.sum(k_ft * np.abs(grid_ft) ** 2)
                       / (coeffs.shape[0] * coeffs.shape[1]))
    if method != "signal":
        raise ValueError(f"unknown method {method!r}")
    blurred = convolve_tf(coeffs, kernel, mode="circular")
    out = synthesize(blurred, window, lattice)
    return complex(np.vdot(signal.samples.astype(np.complex128), out))


def operator_norm_estimate(spec: BlurSpec, iterations: int = 200,
                           seed: int = 0, return_history: bool = False):
    """Power iteration on B*B; returns sqrt of the largest-eigenvalue
    estimate (the operator norm of B). The per-iteration estimates are
    monotone nondecreasing up to rounding."""
    if not spec.lattice.is_circular:
        raise UnsupportedError("operator norm estimation requires circular mode")
    analysis, synthesis = spec.resolve_windows()
    lattice = spec.lattice
    flipped = custom_kernel(spec.kernel.taps[::-1, ::-1])

    def apply_b(x):
        coeffs = stft(x, analysis, lattice)
        blurred = convolve_tf(coeffs, spec.kernel, mode=spec.conv_mode)
        return synthesize(blurred, synthesis, lattice)

    def apply_b_adj(x):
        coeffs = stft(x, synthesis, lattice)
        blurred = convolve_tf(coeffs, flipped, mode=spec.conv_mode)
        return synthesize(blurred, analysis, lattice)

    rng = np.random.default_rng(seed)
    x = rng.standard_normal(lattice.num_samples) \
        + 1j * rng.standard_normal(lattice.num_samples)
    while np.linalg.norm(x) == 0.0:
        x = rng.standard_normal(lattice.num_samples) \
            + 1j * rng.standard_normal(lattice.num_samples)

    history = []
    estimate = 0.0
    for _ in range(int(iterations)):
        x = x / np.linalg.norm(x)
        bx = apply_b(x)
        estimate = float(np.linalg.norm(bx))
        history.append(estimate)
        x = apply_b_adj(bx)
        if np.linalg.norm(x) == 0.0:
            break  # B x = 0: the estimate is exactly 0 along this vector
    if return_history:
        return estimate, np.asarray(history)
    return estimate


def zero_operator_demo(lattice: Lattice, seed: int = 0, n_trials: int = 20):
    """Construct a (window, kernel) pair whose blurring operator vanishes.

    Works on the full circular lattice (hop 1, channels == num_samples):
    there the first-axis DFT of every analysis grid carries the factor
    conj(window_dft), so a window whose DFT vanishes on a band E and a
    kernel whose embedded DFT is supported in E x (all columns) yield the
    zero operator. Returns (window, kernel, residual) with residual the
    worst ||B psi|| / ||psi|| over seeded random signals.
    """
    L = lattice.num_samples
    if not lattice.is_circular or lattice.hop != 1 or lattice.channels != L \
            or lattice.win_length != L:
        raise ValueError("zero_operator_demo needs the full lattice: "
                         "hop 1, channels == win_length == num_samples, circular")
    if L < 16 or L % 2:
        raise ValueError("num_samples must be even and >= 16 to carve "
                         "disjoint DFT supports")

    rng = np.random.default_rng(seed)
    band = np.zeros(L, dtype=bool)
    lo, hi = L // 4, L // 4 + L // 8
    band[lo:hi + 1] = True
    band[L - hi:L - lo + 1] = True

    # window: real, with DFT vanishing exactly on the band
    half = rng.standard_normal(L // 2 + 1) + 1j * rng.standard_normal(L // 2 + 1)
    half[0] = half[0].real
    half[L // 2] = half[L // 2].real
    spectrum = np.concatenate([half, np.conj(half[1:L // 2][::-1])])
    spectrum[band] = 0.0
    window = Window(np.fft.ifft(spectrum).real, kind="custom")

    # time profile: real, DFT supported inside the band, vanishing at the
    # single grid point opposite the origin so it fits in L-1 (odd) taps
    profile_ft = np.zeros(L, dtype=np.complex128)
    in_band = [p for p in range(1, L // 2 + 1) if band[p]]
    for p in in_band:
        z = rng.standard_normal() + 1j * rng.standard_normal()
        profile_ft[p] = z
        profile_ft[L - p] = np.conj(z)
    profile = np.fft.ifft(profile_ft).real
    t0 = L // 2
    p0 = in_band[0]
    correction = profile[t0] * L / (2.0 * np.exp(2j * np.pi * p0 * t0 / L))
    profile_ft[p0] -= correction
    profile_ft[L - p0] -= np.conj(correction)
    profile = np.fft.ifft(profile_ft).real

    # taps cover every circular offset except t0; anchor at the center
    anchor = (L - 2) // 2
    offsets = (np.arange(L - 1) - anchor) % L
    taps = profile[offsets][:, None]
    kernel = custom_kernel(taps)

    spec = BlurSpec(window, kernel, lattice, synthesis="dual")
    residual = 0.0
    for trial in range(n_trials):
        x = rng.standard_normal(L) + 1j * rng.standard_normal(L)
        sig = Signal(x, 1)
        out = blur(sig, spec)
        residual = max(residual,
                       float(np.linalg.norm(out.samples) / np.linalg.norm(x)))
    return window, kernel, residual
