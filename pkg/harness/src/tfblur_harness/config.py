"""Experiment configuration for the augmentation-comparison harness.

The harness never computes features itself: every set of named augmentation
steps is handed to the `tfblur augment` CLI as a JSON config, and the
resulting feature files are consumed byte for byte.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path


class HarnessConfigError(Exception):
    """Invalid experiment configuration or dataset layout."""


# Named step sets mirroring the evaluated augmentation setups. Only the
# training split is augmented; validation and test always use "none".
DEFAULT_AUGMENT_SETS = {
    "none": [],
    "white_noise": [{"kind": "white_noise", "snr_db": 10.0}],
    "spec_augment": [{"kind": "spec_augment", "n_time_masks": 2,
                      "max_time_width": 8, "n_freq_masks": 2,
                      "max_freq_width": 32}],
    "stft_blur": [{"kind": "stft_blur", "sigma_t": 2.0, "sigma_f": 4.0}],
    "spec_blur": [{"kind": "spec_blur", "sigma_t": 1.0, "sigma_f": 2.0}],
    "noise+specaug": [{"kind": "white_noise", "snr_db": 10.0},
                      {"kind": "spec_augment", "n_time_masks": 2,
                       "max_time_width": 8, "n_freq_masks": 2,
                       "max_freq_width": 32}],
    "blur+specblur": [{"kind": "stft_blur", "sigma_t": 2.0, "sigma_f": 4.0},
                      {"kind": "spec_blur", "sigma_t": 1.0, "sigma_f": 2.0}],
    "all": [{"kind": "white_noise", "snr_db": 10.0},
            {"kind": "stft_blur", "sigma_t": 2.0, "sigma_f": 4.0},
            {"kind": "spec_augment", "n_time_masks": 2, "max_time_width": 8,
             "n_freq_masks": 2, "max_freq_width": 32},
            {"kind": "spec_blur", "sigma_t": 1.0, "sigma_f": 2.0}],
}


@dataclass(frozen=True)
class TrainParams:
    batch_size: int = 32
    max_epochs: int = 40
    patience: int = 5        # early stop on stalled validation accuracy
    learning_rate: float = 1e-3
    augment_mode: str = "fixed"  # "fixed" | "per_epoch"


@dataclass(frozen=True)
class ExperimentConfig:
    source_dir: str
    work_dir: str
    classes: tuple
    examples_per_class: int = 100
    test_per_class: int = 200
    val_fraction: float = 0.2    # 80/20 train/validation split
    repeats: int = 5
    seed: int = 0
    augment_sets: dict = field(default_factory=lambda: dict(DEFAULT_AUGMENT_SETS))
    train: TrainParams = field(default_factory=TrainParams)
    tfblur_cmd: tuple = ("tfblur",)

    def __post_init__(self):
        if not self.classes:
            raise HarnessConfigError("need at least one class")
        if len(set(self.classes)) != len(self.classes):
            raise HarnessConfigError("duplicate class names")
        if not 0.0 < self.val_fraction < 1.0:
            raise HarnessConfigError("val_fraction must be in (0, 1)")
        if self.repeats < 1:
            raise HarnessConfigError("repeats must be >= 1")
        if self.test_per_class < 1:
            raise HarnessConfigError("test_per_class must be >= 1")
        n_val = self.examples_per_class - self.n_train
        if self.n_train < 1 or n_val < 1:
            raise HarnessConfigError(
                f"examples_per_class {self.examples_per_class} with "
                f"val_fraction {self.val_fraction} leaves an empty split")
        if self.train.augment_mode not in ("fixed", "per_epoch"):
            raise HarnessConfigError("augment_mode must be fixed or per_epoch")
        for name in self.augment_sets:
            if not name or "/" in name or name.startswith("_"):
                raise HarnessConfigError(f"bad augment set name {name!r}")

    @property
    def n_train(self) -> int:
        return round(self.examples_per_class * (1.0 - self.val_fraction))


def load_experiment(path) -> ExperimentConfig:
    """Load an experiment description from strict JSON."""
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise HarnessConfigError(f"{path}: invalid JSON ({exc})") from exc
    known = {"source_dir", "work_dir", "classes", "examples_per_class",
             "test_per_class", "val_fraction", "repeats", "seed",
             "augment_sets", "train", "tfblur_cmd"}
    unknown = set(data) - known
    if unknown:
        raise HarnessConfigError(f"unknown keys {sorted(unknown)}")
    train_payload = data.pop("train", {})
    t_unknown = set(train_payload) - {f for f in TrainParams.__dataclass_fields__}
    if t_unknown:
        raise HarnessConfigError(f"train: unknown keys {sorted(t_unknown)}")
    data["train"] = TrainParams(**train_payload)
    data["classes"] = tuple(data.get("classes", ()))
    if "tfblur_cmd" in data:
        data["tfblur_cmd"] = tuple(data["tfblur_cmd"])
    try:
        return ExperimentConfig(**data)
    except TypeError as exc:
        raise HarnessConfigError(str(exc)) from exc
