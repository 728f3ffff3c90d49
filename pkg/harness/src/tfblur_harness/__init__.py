"""Desk-scale augmentation-comparison harness.

Samples a per-class WAV dataset, generates features exclusively through
the `tfblur` CLI, trains a small CNN per (augmentation setup, repeat), and
reports mean test accuracy with standard errors.
"""

from .config import (DEFAULT_AUGMENT_SETS, ExperimentConfig,
                     HarnessConfigError, TrainParams, load_experiment)
from .dataset import (SplitManifests, make_synthetic_dataset, prepare_dataset,
                      write_manifest)
from .features import generate_features, load_features
from .runner import RunResult, exceeds_by_2se, markdown_table, run_experiment
from .train import FoldData, TrainingDiverged, train_once

__version__ = "0.1.0"
