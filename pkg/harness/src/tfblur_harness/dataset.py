"""Dataset sampling and manifests.

Expects a SpeechCommands-style layout: one subfolder per class containing
WAV files. Sampling is deterministic per seed; the test set is drawn first
and is disjoint from train/validation by construction.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, HarnessConfigError


@dataclass(frozen=True)
class SplitManifests:
    """Per-split lists of (item_id, path, label); item ids are
    class-relative (`class/stem`)."""

    train: tuple
    val: tuple
    test: tuple

    def labels(self):
        return sorted({label for _, _, label in self.train})


def _class_files(source_dir: Path, cls: str):
    folder = source_dir / cls
    if not folder.is_dir():
        raise HarnessConfigError(f"class folder missing: {folder}")
    files = sorted(folder.glob("*.wav"))
    if not files:
        raise HarnessConfigError(f"class folder has no WAVs: {folder}")
    return files


def prepare_dataset(config: ExperimentConfig, repeat: int) -> SplitManifests:
    """Sample train/val/test manifests for one repeat.

    Each repeat uses its own derived seed, so repeats see different random
    subsets (the spread across repeats is what the standard error reports).
    """
    # resolve so manifest rows stay valid wherever the manifest file lands
    source = Path(config.source_dir).resolve()
    rng = np.random.default_rng(config.seed * 100_003 + repeat)
    train, val, test = [], [], []
    n_val = config.examples_per_class - config.n_train
    for cls in config.classes:
        files = _class_files(source, cls)
        needed = config.examples_per_class + config.test_per_class
        if len(files) < needed:
            raise HarnessConfigError(
                f"class {cls!r} has {len(files)} files; need {needed}")
        picked = rng.choice(len(files), size=needed, replace=False)
        chosen = [files[i] for i in picked]
        test_files = chosen[:config.test_per_class]
        train_files = chosen[config.test_per_class:
                             config.test_per_class + config.n_train]
        val_files = chosen[config.test_per_class + config.n_train:]
        assert len(val_files) == n_val
        for bucket, split_files in ((test, test_files), (train, train_files),
                                    (val, val_files)):
            for path in split_files:
                bucket.append((f"{cls}/{path.stem}", str(path), cls))
    return SplitManifests(tuple(train), tuple(val), tuple(test))


def write_manifest(items, path) -> Path:
    """Two-column manifest consumed by `tfblur augment`."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"{item_id}\t{wav_path}" for item_id, wav_path, _ in items]
    path.write_text("\n".join(lines) + "\n")
    return path


def make_synthetic_dataset(root, classes=("alpha", "bravo", "charlie"),
                           per_class=40, sample_rate=16000, seed=0) -> Path:
    """Generate a small synthetic keyword-style dataset for harness tests.

    Each class is a distinct harmonic stack with per-example jitter in
    pitch, onset, envelope, and additive noise; recordings are shorter than
    1 s so the pipeline's padding path is exercised.
    """
    from scipy.io import wavfile

    root = Path(root)
    rng = np.random.default_rng(seed)
    for c_idx, cls in enumerate(classes):
        folder = root / cls
        folder.mkdir(parents=True, exist_ok=True)
        base_freq = 220.0 * (1.35 ** c_idx)
        n_harmonics = 2 + (c_idx % 3)
        for i in range(per_class):
            length = int(sample_rate * rng.uniform(0.6, 0.95))
            t = np.arange(length) / sample_rate
            freq = base_freq * rng.uniform(0.94, 1.06)
            sig = np.zeros(length)
            for h in range(1, n_harmonics + 1):
                sig += np.sin(2 * np.pi * freq * h * t
                              + rng.uniform(0, 2 * np.pi)) / h
            onset = rng.uniform(0.05, 0.25)
            env = np.exp(-0.5 * ((t - onset - 0.2) / 0.15) ** 2)
            sig = sig * env + 0.05 * rng.standard_normal(length)
            sig = 0.8 * sig / np.max(np.abs(sig))
            wavfile.write(folder / f"{cls}_{i:04d}.wav", sample_rate,
                          sig.astype(np.float32))
    return root
