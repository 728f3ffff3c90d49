"""Training loop: early stopping on validation accuracy, best-weights
restore, divergence detection."""

import copy
import math
from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from .config import TrainParams
from .model import SmallCnn, normalize_batch


class TrainingDiverged(Exception):
    """Loss went non-finite; the repeat is excluded upstream."""


@dataclass
class FoldData:
    """One repeat's tensors. train_x is either a single array (fixed
    augmentation) or a list with one array per epoch."""

    train_x: object
    train_y: np.ndarray
    val_x: np.ndarray
    val_y: np.ndarray
    test_x: np.ndarray
    test_y: np.ndarray


def _accuracy(model, x, y, batch_size=256) -> float:
    model.eval()
    correct = 0
    with torch.no_grad():
        for start in range(0, len(y), batch_size):
            xb = normalize_batch(torch.from_numpy(x[start:start + batch_size]))
            pred = model(xb).argmax(dim=1).numpy()
            correct += int(np.sum(pred == y[start:start + batch_size]))
    return correct / len(y)


def train_once(fold: FoldData, params: TrainParams, seed: int) -> float:
    """Train on one fold and return test accuracy (fraction in [0, 1])."""
    torch.manual_seed(seed)
    n_classes = int(fold.train_y.max()) + 1
    model = SmallCnn(n_classes)
    optimizer = torch.optim.Adam(model.parameters(), lr=params.learning_rate)
    loss_fn = nn.CrossEntropyLoss()
    rng = np.random.default_rng(seed)

    best_val, best_state, stale = -1.0, None, 0
    per_epoch = isinstance(fold.train_x, (list, tuple))
    n_train = len(fold.train_y)
    for epoch in range(params.max_epochs):
        x_epoch = fold.train_x[epoch % len(fold.train_x)] if per_epoch \
            else fold.train_x
        order = rng.permutation(n_train)
        model.train()
        for start in range(0, n_train, params.batch_size):
            batch = order[start:start + params.batch_size]
            xb = normalize_batch(torch.from_numpy(x_epoch[batch]))
            yb = torch.from_numpy(fold.train_y[batch])
            optimizer.zero_grad()
            loss = loss_fn(model(xb), yb)
            if not math.isfinite(loss.item()):
                raise TrainingDiverged(f"non-finite loss at epoch {epoch}")
            loss.backward()
            optimizer.step()
        val_acc = _accuracy(model, fold.val_x, fold.val_y)
        if val_acc > best_val:
            best_val, stale = val_acc, 0
            best_state = copy.deepcopy(model.state_dict())
        else:
            stale += 1
            if stale >= params.patience:
                break
    if best_state is not None:
        model.load_state_dict(best_state)
    return _accuracy(model, fold.test_x, fold.test_y)
