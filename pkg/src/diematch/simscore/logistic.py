"""Logistic regression over distance histograms: same die or not.

Deterministic full-batch gradient descent with a backtracking (Armijo) line
search; the 70-dim problem is tiny, so exact reproducibility beats
stochastic speed. L2 regularization applies to the weights, not the bias.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from ..errors import DimensionMismatch, SingleClassTraining
from .histogram import DistanceHistogram

MODEL_MAGIC = "diematch-logistic v1"


@dataclass(frozen=True)
class TrainingConfig:
    l2: float = 1e-4
    max_iterations: int = 5000
    grad_tol: float = 1e-6
    init_step: float = 4.0
    backtrack: float = 0.5
    armijo_c: float = 1e-4


@dataclass(frozen=True)
class TrainingMeta:
    n_positive: int = 0
    n_negative: int = 0
    iterations: int = 0
    final_loss: float = float("nan")
    training_accuracy: float = float("nan")
    loss_trace: tuple = ()


@dataclass(frozen=True)
class LogisticModel:
    weights: NDArray[np.float64]
    bias: float
    training_meta: TrainingMeta = field(default_factory=TrainingMeta)

    def __post_init__(self):
        w = np.ascontiguousarray(np.asarray(self.weights, dtype=np.float64)).ravel()
        if not np.all(np.isfinite(w)) or not np.isfinite(self.bias):
            raise ValueError("model parameters must be finite")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def dimension(self) -> int:
        return len(self.weights)


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _features_matrix(features) -> np.ndarray:
    rows = []
    for f in features:
        rows.append(f.bins if isinstance(f, DistanceHistogram) else np.asarray(f, dtype=float))
    X = np.asarray(rows, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionMismatch("features must share one dimension")
    return X


def _as_binary_labels(labels) -> np.ndarray:
    out = []
    for label in labels:
        if isinstance(label, str):
            if label not in ("same_die", "different_die"):
                raise ValueError(f"unknown label {label!r}")
            out.append(label == "same_die")
        else:
            out.append(bool(label))
    return np.asarray(out, dtype=np.float64)


def loss_and_gradient(X, y, w, b, l2):
    """Mean binary cross-entropy with L2 on weights, and its exact gradient."""
    z = X @ w + b
    p = _sigmoid(z)
    # numerically stable BCE: log(1+e^-|z|) + max(z,0) - z*y
    bce = np.mean(np.logaddexp(0.0, z) - z * y)
    loss = bce + 0.5 * l2 * float(w @ w)
    resid = p - y
    grad_w = X.T @ resid / len(y) + l2 * w
    grad_b = float(np.mean(resid))
    return loss, grad_w, grad_b


def train_logistic(features, labels, hyper: TrainingConfig = TrainingConfig()) -> LogisticModel:
    """Fit from labeled histograms; deterministic given the config.

    Descends the full-batch gradient with backtracking until the gradient
    norm drops under `grad_tol` or the iteration cap; the line search
    guarantees the recorded loss trace is strictly non-increasing.
    """
    X = _features_matrix(features)
    y = _as_binary_labels(labels)
    if len(X) != len(y):
        raise DimensionMismatch(f"{len(X)} feature rows vs {len(y)} labels")
    n_pos = int(y.sum())
    if n_pos == 0 or n_pos == len(y):
        raise SingleClassTraining("training needs at least one example of each class")

    w = np.zeros(X.shape[1])
    b = 0.0
    loss, grad_w, grad_b = loss_and_gradient(X, y, w, b, hyper.l2)
    trace = [loss]
    iterations = 0
    for iterations in range(1, hyper.max_iterations + 1):
        grad_norm_sq = float(grad_w @ grad_w) + grad_b * grad_b
        if np.sqrt(grad_norm_sq) < hyper.grad_tol:
            iterations -= 1
            break
        step = hyper.init_step
        while True:
            w_new = w - step * grad_w
            b_new = b - step * grad_b
            new_loss, new_gw, new_gb = loss_and_gradient(X, y, w_new, b_new, hyper.l2)
            if new_loss <= loss - hyper.armijo_c * step * grad_norm_sq:
                break
            step *= hyper.backtrack
            if step < 1e-18:
                break
        if new_loss > loss:
            break
        w, b, loss, grad_w, grad_b = w_new, b_new, new_loss, new_gw, new_gb
        trace.append(loss)

    accuracy = float(np.mean((_sigmoid(X @ w + b) >= 0.5) == (y == 1.0)))
    thin = max(1, len(trace) // 200)
    meta = TrainingMeta(
        n_positive=n_pos,
        n_negative=len(y) - n_pos,
        iterations=iterations,
        final_loss=loss,
        training_accuracy=accuracy,
        loss_trace=tuple(trace[::thin]),
    )
    return LogisticModel(w, float(b), meta)


def predict(model: LogisticModel, h) -> float:
    """Same-die probability of a histogram; strictly inside (0, 1)."""
    x = h.bins if isinstance(h, DistanceHistogram) else np.asarray(h, dtype=float)
    if len(x) != model.dimension:
        raise DimensionMismatch(f"histogram has {len(x)} bins, model expects {model.dimension}")
    p = float(_sigmoid(np.asarray([x @ model.weights + model.bias]))[0])
    return float(np.clip(p, 1e-12, 1.0 - 1e-12))


def save_model(model: LogisticModel, path) -> None:
    lines = [MODEL_MAGIC, f"bias {float(model.bias)!r}"]
    lines += [f"w{i} {float(v)!r}" for i, v in enumerate(model.weights)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def load_model(path) -> LogisticModel:
    lines = Path(path).read_text(encoding="ascii").splitlines()
    if not lines or lines[0].strip() != MODEL_MAGIC:
        raise ValueError(f"{path}: not a {MODEL_MAGIC!r} file")
    if len(lines) < 2 or not lines[1].startswith("bias "):
        raise ValueError(f"{path}: missing bias line")
    bias = float(lines[1].split()[1])
    weights = []
    for i, line in enumerate(lines[2:]):
        if not line.strip():
            continue
        tag, value = line.split()
        if tag != f"w{i}":
            raise ValueError(f"{path}: expected w{i}, found {tag}")
        weights.append(float(value))
    return LogisticModel(np.asarray(weights), bias)
