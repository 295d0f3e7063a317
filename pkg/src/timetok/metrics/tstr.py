"""Train-synthetic-test-real harness.

Classification: a small 1-D conv classifier trained on synthetic data and
scored on the real test split (accuracy, macro-F1). Forecasting: a
ridge-regularized linear map from an input window to the prediction window
(MSE).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import torch
import torch.nn.functional as F

from ..core.series import DomainError
from .features import ConvBackbone


def macro_f1(y_true: np.ndarray, y_pred: np.ndarray, n_classes: int) -> float:
    scores = []
    for c in range(n_classes):
        tp = np.sum((y_pred == c) & (y_true == c))
        fp = np.sum((y_pred == c) & (y_true != c))
        fn = np.sum((y_pred != c) & (y_true == c))
        denom = 2 * tp + fp + fn
        scores.append(2 * tp / denom if denom > 0 else 0.0)
    return float(np.mean(scores))


def train_classifier(
    values: np.ndarray, labels: np.ndarray, n_classes: int,
    steps: int = 400, lr: float = 1e-3, seed: int = 0,
) -> ConvBackbone:
    torch.manual_seed(seed)
    model = ConvBackbone(feature_dim=64, n_classes=n_classes)
    optimizer = torch.optim.Adam(model.parameters(), lr=lr)
    generator = torch.Generator().manual_seed(seed + 1)
    x_all = torch.from_numpy(np.asarray(values, dtype=np.float64)).float()
    y_all = torch.from_numpy(np.asarray(labels, dtype=np.int64))
    model.train()
    for _ in range(steps):
        idx = torch.randint(0, x_all.shape[0], (min(64, x_all.shape[0]),), generator=generator)
        loss = F.cross_entropy(model(x_all[idx]), y_all[idx])
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()
    model.eval()
    return model


def classify(model: ConvBackbone, values: np.ndarray) -> np.ndarray:
    with torch.no_grad():
        logits = model(torch.from_numpy(np.asarray(values, dtype=np.float64)).float())
    return logits.argmax(dim=-1).numpy()


def tstr_classification(
    synth_values: np.ndarray,
    synth_labels: np.ndarray,
    real_test_values: np.ndarray,
    real_test_labels: np.ndarray,
    n_classes: int,
    steps: int = 400,
    seed: int = 0,
) -> dict:
    synth_labels = np.asarray(synth_labels, dtype=np.int64)
    present = np.unique(synth_labels)
    if present.size < n_classes:
        warnings.warn(
            f"synthetic data covers {present.size}/{n_classes} classes; "
            "absent classes score zero support in macro-F1",
            RuntimeWarning,
        )
    model = train_classifier(synth_values, synth_labels, n_classes, steps=steps, seed=seed)
    pred = classify(model, real_test_values)
    real_test_labels = np.asarray(real_test_labels, dtype=np.int64)
    return {
        "accuracy": float(np.mean(pred == real_test_labels)),
        "macro_f1": macro_f1(real_test_labels, pred, n_classes),
    }


def tstr_forecasting(
    synth_values: np.ndarray,
    real_test_values: np.ndarray,
    input_len: int,
    pred_len: int,
    ridge: float = 1.0,
) -> dict:
    """Linear-on-window forecaster with ridge regularization."""
    synth_values = np.asarray(synth_values, dtype=np.float64)
    real_test_values = np.asarray(real_test_values, dtype=np.float64)
    t_len = synth_values.shape[1]
    if input_len + pred_len > t_len:
        raise DomainError("input_len + pred_len exceeds the series length")
    xs, ys = synth_values[:, :input_len], synth_values[:, input_len : input_len + pred_len]
    xs1 = np.hstack([xs, np.ones((xs.shape[0], 1))])
    w = np.linalg.solve(xs1.T @ xs1 + ridge * np.eye(xs1.shape[1]), xs1.T @ ys)
    xt = real_test_values[:, :input_len]
    yt = real_test_values[:, input_len : input_len + pred_len]
    pred = np.hstack([xt, np.ones((xt.shape[0], 1))]) @ w
    return {"mse": float(np.mean((pred - yt) ** 2))}
