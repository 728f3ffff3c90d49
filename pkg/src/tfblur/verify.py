"""Numerical verification suites behind the `tfblur verify` command.

Each suite runs a fixed desk-scale experiment and reports a single residual
against a tolerance; `passed` means residual <= tolerance. Thresholds
derived from one-off oracle measurements (phase contrast) are recorded as
module constants next to the measured values they came from.
"""

import time
from dataclasses import dataclass

import numpy as np

from .gabor import (Lattice, dual_window, make_window, moyal_check,
                    random_trig_window, stft, synthesize, tight_window)
from .kernels import custom_kernel, delta_kernel, gaussian_kernel, kernel_dft_min
from .operators import (BlurSpec, blur, operator_norm_estimate, weak_action,
                        zero_operator_demo)
from .signal_io import Signal, gen_signal

# Oracle-measured phase-contrast margin (hann-1024 lattice, gaussian kernel
# sigma=(2,2)): on-bin 500 Hz sinusoid retains 0.0630 of its energy, seeded
# white noise at most 0.0353. The required margin keeps ~30% cushion.
PHASE_CONTRAST_MIN_MARGIN = 0.02


@dataclass
class SuiteResult:
    suite: str
    residual: float
    tolerance: float
    seconds: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance

    def line(self) -> str:
        status = "pass" if self.passed else "FAIL"
        return (f"{self.suite:<16} {self.residual:<16.6e} "
                f"{self.tolerance:<12.3e} {status}")


def _timed(fn):
    start = time.perf_counter()
    residual = fn()
    return residual, time.perf_counter() - start


def suite_reconstruction(seed: int = 0) -> SuiteResult:
    """Dual-window round trip on the default lattice; relative residual."""
    lattice = Lattice(16384, 256, 1024, 1024, "circular")
    window = make_window("hann", 1024)

    def run():
        rng = np.random.default_rng(seed)
        x = rng.standard_normal(16384)
        rec = synthesize(stft(x, window, lattice), dual_window(window, lattice),
                         lattice)
        return float(np.linalg.norm(rec - x) / np.linalg.norm(x))

    residual, seconds = _timed(run)
    return SuiteResult("reconstruction", residual, 1e-10, seconds)


def suite_moyal(seed: int = 0, n_quadruples: int = 50) -> SuiteResult:
    """Sampled inner-product identity with constant channels/hop over seeded
    quadruples of random signals and random flat-overlap windows."""
    lattice = Lattice(64, 4, 16, 16, "circular")

    def run():
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(n_quadruples):
            w1 = random_trig_window(rng, 16, 1)
            w2 = random_trig_window(rng, 16, 1)
            p1 = rng.standard_normal(64) + 1j * rng.standard_normal(64)
            p2 = rng.standard_normal(64) + 1j * rng.standard_normal(64)
            worst = max(worst, moyal_check(p1, p2, w1, w2, lattice))
        return worst

    residual, seconds = _timed(run)
    return SuiteResult("moyal", residual, 1e-12, seconds)


def suite_norm_bound(seed: int = 0) -> SuiteResult:
    """Tight-window operator norm: mass-1 kernel estimate <= 1, delta kernel
    estimate == 1, scaling the kernel scales the estimate, and the power
    iteration is monotone."""
    lattice = Lattice(2048, 128, 256, 256, "circular")
    window = make_window("hann", 256)
    kernel = gaussian_kernel(1.5, 2.0, 4.0)

    def run():
        est, history = operator_norm_estimate(
            BlurSpec(window, kernel, lattice, synthesis="tight"),
            iterations=200, seed=seed, return_history=True)
        bound_excess = max(0.0, est - 1.0)
        monotone = float(np.max(np.maximum(history[:-1] - history[1:], 0.0)))
        est_delta = operator_norm_estimate(
            BlurSpec(window, delta_kernel(), lattice, synthesis="tight"),
            iterations=50, seed=seed)
        est_scaled = operator_norm_estimate(
            BlurSpec(window, kernel.scaled(2.0), lattice, synthesis="tight"),
            iterations=200, seed=seed)
        return max(bound_excess / 1e-8,
                   monotone / 1e-12,
                   abs(est_delta - 1.0) / 1e-8,
                   abs(est_scaled - 2.0 * est) / (2.0 * est) / 1e-10)

    residual, seconds = _timed(run)
    # residual is the worst sub-check normalized by its own tolerance
    return SuiteResult("norm-bound", residual, 1.0, seconds)


def suite_positivity(seed: int = 0, n_signals: int = 100) -> SuiteResult:
    """Kernel with nonnegative DFT => real part of <B psi, psi> is
    nonnegative, imaginary part vanishes, and the signal-domain and
    Fourier-domain weak actions agree."""
    lattice = Lattice(1024, 16, 64, 64, "circular")
    window = tight_window(make_window("hann", 64), lattice)
    kernel = gaussian_kernel(1.5, 1.5, 4.0)

    def run():
        if kernel_dft_min(kernel, lattice.n_frames, lattice.channels) < 0:
            return float("inf")
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(n_signals):
            x = Signal(rng.standard_normal(1024) + 1j * rng.standard_normal(1024), 1)
            energy = x.energy()
            ws = weak_action(x, window, kernel, lattice, method="signal")
            wf = weak_action(x, window, kernel, lattice, method="fourier")
            worst = max(worst, -ws.real / energy, abs(ws.imag) / energy,
                        abs(ws - wf) / energy)
        return worst

    residual, seconds = _timed(run)
    return SuiteResult("positivity", residual, 1e-10, seconds)


def suite_zero_op(seed: int = 0) -> SuiteResult:
    """Explicit zero-operator pair on the full 256-point lattice, plus the
    delta-kernel sanity counterexample (residual ~ 1)."""
    lattice = Lattice(256, 1, 256, 256, "circular")

    def run():
        window, _, residual = zero_operator_demo(lattice, seed=seed)
        rng = np.random.default_rng(seed)
        x = Signal(rng.standard_normal(256) + 1j * rng.standard_normal(256), 1)
        ident = blur(x, BlurSpec(window, delta_kernel(), lattice))
        sanity = float(np.linalg.norm(ident.samples) / np.linalg.norm(x.samples))
        if abs(sanity - 1.0) > 1e-6:
            return float("inf")
        return residual

    residual, seconds = _timed(run)
    return SuiteResult("zero-op", residual, 1e-8, seconds)


def suite_covariance(seed: int = 0) -> SuiteResult:
    """Modulating by a multiple of num_samples/channels translates the
    coefficient grid along frequency and leaves the blurred norm unchanged."""
    lattice = Lattice(1024, 16, 64, 64, "circular")
    window = make_window("gaussian", 64, width=16.0)
    kernel = gaussian_kernel(1.5, 1.5, 4.0)

    def run():
        rng = np.random.default_rng(seed)
        x = rng.standard_normal(1024) + 1j * rng.standard_normal(1024)
        shift_bins = 5
        mod = np.exp(2j * np.pi * shift_bins * (1024 // 64) *
                     np.arange(1024) / 1024)
        v = stft(x, window, lattice).coeffs
        v_mod = stft(x * mod, window, lattice).coeffs
        translate = float(np.linalg.norm(v_mod - np.roll(v, shift_bins, axis=1))
                          / np.linalg.norm(v))
        spec = BlurSpec(window, kernel, lattice)
        n0 = np.linalg.norm(blur(Signal(x, 1), spec).samples)
        n1 = np.linalg.norm(blur(Signal(x * mod, 1), spec).samples)
        return max(translate, abs(n1 - n0) / n0)

    residual, seconds = _timed(run)
    return SuiteResult("covariance", residual, 1e-10, seconds)


def suite_phase_contrast(seed: int = 0) -> SuiteResult:
    """Energy retention of an on-bin sinusoid strictly exceeds seeded white
    noise under the same Gaussian kernel (phase structure survives blurring,
    unstructured phase does not). Residual is the margin shortfall."""
    lattice = Lattice(16384, 256, 1024, 1024, "circular")
    window = make_window("hann", 1024)
    kernel = gaussian_kernel(2.0, 2.0, 4.0)
    spec = BlurSpec(window, kernel, lattice)

    def run():
        sine = gen_signal("sinusoid", sample_rate=16000, length=16384,
                          frequency=500.0)
        sine_ret = blur(sine, spec).energy() / sine.energy()
        noise_worst = 0.0
        for offset in range(3):
            noise = gen_signal("white_noise", sample_rate=16000, length=16384,
                               seed=seed + offset)
            noise_worst = max(noise_worst,
                              blur(noise, spec).energy() / noise.energy())
        margin = sine_ret - noise_worst
        return max(0.0, PHASE_CONTRAST_MIN_MARGIN - margin)

    residual, seconds = _timed(run)
    return SuiteResult("phase-contrast", residual, 0.0, seconds)


SUITES = {
    "reconstruction": suite_reconstruction,
    "moyal": suite_moyal,
    "norm-bound": suite_norm_bound,
    "positivity": suite_positivity,
    "zero-op": suite_zero_op,
    "covariance": suite_covariance,
    "phase-contrast": suite_phase_contrast,
}


def run_suites(names=None, seed: int = 0, tolerance_override: float | None = None):
    """Run the named suites (all by default); returns a list of SuiteResult."""
    names = list(names) if names else list(SUITES)
    results = []
    for name in names:
        if name not in SUITES:
            raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
        result = SUITES[name](seed=seed)
        if tolerance_override is not None:
            result.tolerance = tolerance_override
        results.append(result)
    return results


def format_report(results) -> str:
    header = f"{'suite':<16} {'residual':<16} {'tolerance':<12} status"
    lines = [header] + [r.line() for r in results]
    total = sum(r.seconds for r in results)
    lines.append(f"# {sum(r.passed for r in results)}/{len(results)} suites "
                 f"passed in {total:.1f}s")
    return "\n".join(lines)
