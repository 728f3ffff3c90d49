"""Experiment runner: features via the tfblur CLI, training via torch,
mean +- standard error reporting, CSV and markdown outputs."""

import csv
import logging
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import ExperimentConfig
from .dataset import prepare_dataset
from .features import generate_features, load_features
from .train import FoldData, TrainingDiverged, train_once

log = logging.getLogger("tfblur_harness")


@dataclass
class RunResult:
    """Per-config accuracies over repeats; excluded repeats are recorded but
    ignored by the statistics."""

    name: str
    accuracies: list = field(default_factory=list)   # (repeat, accuracy)
    excluded: list = field(default_factory=list)     # (repeat, reason)

    @property
    def values(self) -> np.ndarray:
        return np.array([acc for _, acc in self.accuracies], dtype=float)

    @property
    def mean(self) -> float:
        return float(self.values.mean()) if self.accuracies else float("nan")

    @property
    def stderr(self):
        """sigma / sqrt(n) with sigma the sample standard deviation;
        undefined (None) for fewer than two repeats."""
        if len(self.accuracies) < 2:
            return None
        vals = self.values
        return float(vals.std(ddof=1) / np.sqrt(len(vals)))

    def format_mean(self) -> str:
        if not self.accuracies:
            return "n/a"
        se = self.stderr
        se_text = f"{100 * se:.2f}" if se is not None else "n/a"
        return f"{100 * self.mean:.2f} +- {se_text}"


def exceeds_by_2se(better: RunResult, baseline: RunResult) -> bool:
    """Directional check: better.mean - baseline.mean > 2 * combined SE."""
    if better.stderr is None or baseline.stderr is None:
        return False
    combined = float(np.hypot(better.stderr, baseline.stderr))
    return better.mean - baseline.mean > 2.0 * combined


def _repeat_master_seed(config: ExperimentConfig, repeat: int) -> int:
    return config.seed * 7919 + repeat


def _train_feature_dirs(config: ExperimentConfig, name: str, steps,
                        items, repeat: int, rep_dir: Path, clean_dir: Path):
    """Feature dirs for the training split: one dir (fixed mode) or one per
    epoch (per_epoch mode re-derives the augmentation each epoch)."""
    master = _repeat_master_seed(config, repeat)
    if not steps:
        return [clean_dir]
    if config.train.augment_mode == "fixed":
        out = generate_features(items, steps, master, rep_dir / name,
                                tfblur_cmd=config.tfblur_cmd)
        return [out]
    dirs = []
    for epoch in range(config.train.max_epochs):
        out = generate_features(items, steps, master + 1_000_003 * (epoch + 1),
                                rep_dir / name / f"epoch{epoch:03d}",
                                tfblur_cmd=config.tfblur_cmd)
        dirs.append(out)
    return dirs


def run_experiment(config: ExperimentConfig, progress=None) -> dict:
    """Train every (augment set, repeat) pair and return name -> RunResult.

    Writes accuracies.csv and summary.md under work_dir. Feature files are
    cached per (repeat, augment set), so reruns and shared baselines are
    cheap.
    """
    work = Path(config.work_dir)
    work.mkdir(parents=True, exist_ok=True)
    results = {name: RunResult(name) for name in config.augment_sets}

    for repeat in range(config.repeats):
        splits = prepare_dataset(config, repeat)
        rep_dir = work / "features" / f"rep{repeat:02d}"
        master = _repeat_master_seed(config, repeat)
        clean_items = splits.train + splits.val + splits.test
        clean_dir = generate_features(clean_items, [], master,
                                      rep_dir / "_clean",
                                      tfblur_cmd=config.tfblur_cmd)
        val_x, val_y, _ = load_features(splits.val, clean_dir)
        test_x, test_y, _ = load_features(splits.test, clean_dir)

        for name, steps in config.augment_sets.items():
            train_dirs = _train_feature_dirs(config, name, steps,
                                             splits.train, repeat, rep_dir,
                                             clean_dir)
            loaded = [load_features(splits.train, d) for d in train_dirs]
            train_y = loaded[0][1]
            train_x = loaded[0][0] if len(loaded) == 1 \
                else [x for x, _, _ in loaded]
            fold = FoldData(train_x, train_y, val_x, val_y, test_x, test_y)
            try:
                acc = train_once(fold, config.train,
                                 seed=master * 31 + zlib.crc32(name.encode()) % 1000)
                results[name].accuracies.append((repeat, acc))
                log.info("repeat %d, %s: accuracy %.4f", repeat, name, acc)
            except TrainingDiverged as exc:
                results[name].excluded.append((repeat, str(exc)))
                log.warning("repeat %d, %s: excluded (%s)", repeat, name, exc)
            if progress:
                progress(repeat, name, results[name])

    write_csv(results, work / "accuracies.csv")
    (work / "summary.md").write_text(markdown_table(results, config))
    return results


def write_csv(results: dict, path) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["config", "repeat", "accuracy"])
        for name, result in results.items():
            for repeat, acc in result.accuracies:
                writer.writerow([name, repeat, f"{acc:.6f}"])
            for repeat, reason in result.excluded:
                writer.writerow([name, repeat, f"excluded: {reason}"])


def markdown_table(results: dict, config: ExperimentConfig) -> str:
    lines = [
        f"Average test accuracies with standard errors (%), "
        f"{len(config.classes)} classes, {config.examples_per_class} "
        f"examples/class, {config.repeats} repeats.",
        "",
        f"| Augmentation | Acc-{config.examples_per_class} |",
        "|---|---|",
    ]
    for name, result in results.items():
        lines.append(f"| {name} | {result.format_mean()} |")
    return "\n".join(lines) + "\n"
