"""Seeded, declarative augmentation pipeline: white noise and STFT blurring
on the waveform, SpecAugment-style masking and spectrogram blurring on the
log-mel grid.

Every random draw comes from a stream derived from (master_seed, item_id,
step_index), so a batch is reproducible item by item regardless of worker
scheduling. Config files are strict JSON (schema version 1, unknown keys
rejected).
"""

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .features import (DEFAULT_DB_FLOOR, Spectrogram, log_mel, mel_filterbank,
                       normalize_01, spec_blur, spectrogram)
from .gabor import Lattice, make_window, stft
from .kernels import gaussian_kernel, kernel_from_config
from .operators import BlurSpec, blur
from .signal_io import Signal, pad_to_length

CONFIG_VERSION = 1

WAVEFORM_STEPS = ("white_noise", "stft_blur")
FEATURE_STEPS = ("spec_augment", "spec_blur")
FILL_MODES = ("mean", "zero")


@dataclass(frozen=True)
class RngStream:
    """Deterministic random stream keyed by (master_seed, item_id, step)."""

    master_seed: int
    item_id: str
    step_index: int

    def generator(self) -> np.random.Generator:
        key = f"{self.master_seed}/{self.item_id}/{self.step_index}"
        digest = hashlib.blake2b(key.encode(), digest_size=16).digest()
        return np.random.default_rng(int.from_bytes(digest, "little"))


def derive_rng(master_seed: int, item_id: str, step_index: int) -> RngStream:
    """Collision-resistant per-(item, step) stream derivation."""
    return RngStream(int(master_seed), str(item_id), int(step_index))


@dataclass(frozen=True)
class FeatureConfig:
    sample_rate: int = 16000
    pad_to: int = 16000
    window: str = "hann"
    win_length: int = 1024
    hop: int = 256
    channels: int = 1024
    n_mels: int = 256
    fmin: float = 0.0
    fmax: float = 8000.0
    floor: float = DEFAULT_DB_FLOOR
    normalize: bool = False

    def lattice(self) -> Lattice:
        return Lattice(self.pad_to, self.hop, self.channels, self.win_length,
                       mode="zeropad")


@dataclass(frozen=True)
class WhiteNoiseStep:
    kind = "white_noise"
    snr_db: float = 20.0


@dataclass(frozen=True)
class StftBlurStep:
    kind = "stft_blur"
    sigma_t: float = 2.0
    sigma_f: float = 4.0
    truncation: float = 4.0
    kernel: dict | None = None  # full kernel literal; overrides the sigmas
    window: str = "hann"
    win_length: int = 1000
    hop: int = 250
    channels: int = 1000
    conv_mode: str = "zeropad-time"
    renormalize: bool = True

    def build_kernel(self):
        if self.kernel is not None:
            return kernel_from_config(self.kernel)
        return gaussian_kernel(self.sigma_t, self.sigma_f, self.truncation)


@dataclass(frozen=True)
class SpecAugmentStep:
    kind = "spec_augment"
    n_time_masks: int = 2
    max_time_width: int = 8
    n_freq_masks: int = 2
    max_freq_width: int = 32
    fill: str = "mean"


@dataclass(frozen=True)
class SpecBlurStep:
    kind = "spec_blur"
    sigma_t: float = 1.0
    sigma_f: float = 2.0
    truncation: float = 4.0
    kernel: dict | None = None  # full kernel literal; overrides the sigmas

    def build_kernel(self):
        if self.kernel is not None:
            return kernel_from_config(self.kernel)
        return gaussian_kernel(self.sigma_t, self.sigma_f, self.truncation)


_STEP_TYPES = {
    "white_noise": WhiteNoiseStep,
    "stft_blur": StftBlurStep,
    "spec_augment": SpecAugmentStep,
    "spec_blur": SpecBlurStep,
}


@dataclass(frozen=True)
class AugmentConfig:
    steps: tuple = field(default_factory=tuple)
    master_seed: int = 0
    feature: FeatureConfig = field(default_factory=FeatureConfig)

    def __post_init__(self):
        seen_feature_step = False
        for step in self.steps:
            if step.kind in FEATURE_STEPS:
                seen_feature_step = True
            elif seen_feature_step:
                raise ConfigError(f"waveform step {step.kind!r} after a "
                                  "feature-domain step")
        object.__setattr__(self, "steps", tuple(self.steps))


def _build(cls, payload: dict, where: str):
    allowed = {f for f in cls.__dataclass_fields__}
    unknown = set(payload) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    try:
        return cls(**payload)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def config_from_dict(data: dict) -> AugmentConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be an object")
    unknown = set(data) - {"version", "master_seed", "feature", "steps"}
    if unknown:
        raise ConfigError(f"config: unknown keys {sorted(unknown)}")
    version = data.get("version", CONFIG_VERSION)
    if version != CONFIG_VERSION:
        raise ConfigError(f"unsupported config version {version}")
    feature = _build(FeatureConfig, data.get("feature", {}), "feature")
    steps = []
    for idx, raw in enumerate(data.get("steps", [])):
        raw = dict(raw)
        kind = raw.pop("kind", None)
        if kind not in _STEP_TYPES:
            raise ConfigError(f"steps[{idx}]: unknown kind {kind!r}")
        step = _build(_STEP_TYPES[kind], raw, f"steps[{idx}]")
        if step.kind == "spec_augment" and step.fill not in FILL_MODES:
            raise ConfigError(f"steps[{idx}]: fill must be one of {FILL_MODES}")
        if getattr(step, "kernel", None) is not None:
            try:
                step.build_kernel()
            except ValueError as exc:
                raise ConfigError(f"steps[{idx}]: {exc}") from exc
        steps.append(step)
    return AugmentConfig(tuple(steps), int(data.get("master_seed", 0)), feature)


def load_config(path) -> AugmentConfig:
    from pathlib import Path

    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return config_from_dict(data)


def add_white_noise(signal: Signal, snr_db: float, rng: RngStream) -> Signal:
    """Add i.i.d. Gaussian noise scaled to the exact requested SNR in dB.
    snr_db=inf returns the signal unchanged."""
    if math.isinf(snr_db) and snr_db > 0:
        return signal
    sig_energy = signal.energy()
    if sig_energy == 0.0:
        raise ValueError("SNR is undefined for an all-zero signal")
    gen = rng.generator()
    noise = gen.standard_normal(len(signal))
    noise_energy = float(np.sum(noise ** 2))
    target = sig_energy * 10.0 ** (-snr_db / 10.0)
    noise *= np.sqrt(target / noise_energy)
    return Signal(signal.samples + noise, signal.sample_rate)


def spec_augment(logmel: Spectrogram, step: SpecAugmentStep,
                 rng: RngStream) -> Spectrogram:
    """Mask random time and mel bands. Widths are drawn uniformly from
    [0, max_width], starts uniformly over valid positions; masks may
    overlap. fill='mean' writes the band's own pre-mask mean (which leaves
    the grid mean unchanged for non-overlapping masks), fill='zero' writes
    zeros."""
    n_frames, n_mels = logmel.shape
    if step.max_time_width > n_frames or step.max_freq_width > n_mels:
        raise ValueError("mask width exceeds grid extent")
    vals = logmel.values.copy()
    gen = rng.generator()

    def cut(n_masks, max_width, axis_len, apply):
        for _ in range(n_masks):
            width = int(gen.integers(0, max_width + 1))
            if width == 0:
                continue
            start = int(gen.integers(0, axis_len - width + 1))
            apply(start, width)

    def time_mask(start, width):
        band = vals[start:start + width, :]
        band[:] = band.mean() if step.fill == "mean" else 0.0

    def freq_mask(start, width):
        band = vals[:, start:start + width]
        band[:] = band.mean() if step.fill == "mean" else 0.0

    cut(step.n_time_masks, step.max_time_width, n_frames, time_mask)
    cut(step.n_freq_masks, step.max_freq_width, n_mels, freq_mask)
    return Spectrogram._unchecked(vals, logmel.scale,
                                  dict(logmel.meta, masked=True))


def _blur_step(signal: Signal, step: StftBlurStep) -> Signal:
    length = len(signal)
    if length % step.hop or length % step.channels:
        raise ConfigError(f"stft_blur lattice (hop {step.hop}, channels "
                          f"{step.channels}) does not divide padded length {length}")
    lattice = Lattice(length, step.hop, step.channels, step.win_length,
                      mode="circular")
    window = make_window(step.window, step.win_length)
    spec = BlurSpec(window, step.build_kernel(), lattice, synthesis="dual",
                    conv_mode=step.conv_mode,
                    renormalize_energy=step.renormalize)
    return blur(signal, spec)


def run_pipeline(signal: Signal, config: AugmentConfig, item_id: str
                 ) -> Spectrogram:
    """pad -> waveform steps -> stft -> power spectrogram -> log-mel ->
    feature steps -> optional 0-1 normalization. Deterministic given
    (config, item_id)."""
    fc = config.feature
    if signal.sample_rate != fc.sample_rate:
        raise ConfigError(f"item {item_id!r}: sample rate {signal.sample_rate}"
                          f" != configured {fc.sample_rate}")
    out = pad_to_length(signal, fc.pad_to)

    for idx, step in enumerate(config.steps):
        if step.kind == "white_noise":
            rng = derive_rng(config.master_seed, item_id, idx)
            out = add_white_noise(out, step.snr_db, rng)
        elif step.kind == "stft_blur":
            out = _blur_step(out, step)

    window = make_window(fc.window, fc.win_length)
    tf = stft(out, window, fc.lattice())
    fb = mel_filterbank(fc.sample_rate, fc.channels, fc.n_mels, fc.fmin, fc.fmax)
    feat = log_mel(spectrogram(tf), fb, floor=fc.floor)

    for idx, step in enumerate(config.steps):
        if step.kind == "spec_augment":
            rng = derive_rng(config.master_seed, item_id, idx)
            feat = spec_augment(feat, step, rng)
        elif step.kind == "spec_blur":
            feat = spec_blur(feat, step.build_kernel(), mode="circular")

    if fc.normalize:
        feat = normalize_01(feat)
    return feat
