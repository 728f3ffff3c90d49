"""Feature generation and loading.

All DSP goes through the `tfblur` CLI; this module only writes augment
configs, invokes the subprocess, and memory-maps the float32 feature files
it produced (the bytes are used as-is, nothing is recomputed).
"""

import json
import subprocess
from pathlib import Path

import numpy as np

from .dataset import write_manifest

FEATURE_SHAPE = (63, 256)


class FeatureGenerationError(Exception):
    """`tfblur augment` failed."""


def write_augment_config(steps, master_seed, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {"version": 1, "master_seed": int(master_seed),
               "feature": {}, "steps": list(steps)}
    path.write_text(json.dumps(payload, indent=1))
    return path


def generate_features(items, steps, master_seed, out_dir, tfblur_cmd=("tfblur",),
                      workers=0) -> Path:
    """Run `tfblur augment` over the items; returns the feature directory.

    Skips the subprocess when every expected output already exists (feature
    files are deterministic in (config, item), so presence is sufficient).
    """
    out_dir = Path(out_dir)
    expected = [out_dir / f"{item_id}.f32" for item_id, _, _ in items]
    if expected and all(p.exists() for p in expected):
        return out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = write_manifest(items, out_dir / "_manifest.txt")
    config = write_augment_config(steps, master_seed, out_dir / "_config.json")
    cmd = list(tfblur_cmd) + ["augment", "--manifest", str(manifest),
                              "--config", str(config), "--out", str(out_dir),
                              "--workers", str(workers)]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        raise FeatureGenerationError(
            f"{' '.join(cmd)} exited {proc.returncode}:\n{proc.stderr}")
    return out_dir


def load_features(items, feature_dir):
    """Load feature matrices for the items into (X, y) arrays.

    X is float32 (n, 1, frames, mels) read directly from the CLI's little-
    endian files; y is int64 label indices ordered by sorted label name.
    """
    feature_dir = Path(feature_dir)
    labels = sorted({label for _, _, label in items})
    label_index = {label: i for i, label in enumerate(labels)}
    xs = np.empty((len(items), 1) + FEATURE_SHAPE, dtype=np.float32)
    ys = np.empty(len(items), dtype=np.int64)
    for row, (item_id, _, label) in enumerate(items):
        raw = (feature_dir / f"{item_id}.f32").read_bytes()
        grid = np.frombuffer(raw, dtype="<f4").reshape(FEATURE_SHAPE)
        xs[row, 0] = grid
        ys[row] = label_index[label]
    return xs, ys, labels
