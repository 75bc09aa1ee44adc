"""Single-hidden-layer perceptron trained by online momentum descent."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError, TrainingError
from .base import Model, sorted_labels


@dataclass(frozen=True)
class MlpParams:
    hidden: int = 13
    learning_rate: float = 0.3
    momentum: float = 0.2
    alpha: float = 1e-5
    max_iter: int = 500
    shuffle: bool = True
    patience: int = 10
    max_plateaus: int = 3
    loss_tol: float = 1e-6

    def __post_init__(self):
        if self.hidden < 1:
            raise ParameterError("hidden must be >= 1")
        if not 0.0 < self.learning_rate:
            raise ParameterError("learning_rate must be positive")
        if not 0.0 <= self.momentum < 1.0:
            raise ParameterError("momentum must be in [0, 1)")
        if self.alpha < 0.0:
            raise ParameterError("alpha must be non-negative")
        if self.max_iter < 1 or self.patience < 1 or self.max_plateaus < 1:
            raise ParameterError("iteration limits must be >= 1")


def _logistic(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=1, keepdims=True)
    ez = np.exp(shifted)
    return ez / ez.sum(axis=1, keepdims=True)


def glorot_init(dim: int, hidden: int, n_out: int, seed: int):
    """Uniform +-sqrt(6/(fan_in+fan_out)) weights, zero biases."""
    rng = np.random.default_rng(seed)
    lim1 = np.sqrt(6.0 / (dim + hidden))
    lim2 = np.sqrt(6.0 / (hidden + n_out))
    W1 = rng.uniform(-lim1, lim1, size=(dim, hidden))
    W2 = rng.uniform(-lim2, lim2, size=(hidden, n_out))
    return W1, np.zeros(hidden), W2, np.zeros(n_out)


def zeros_init(dim: int, hidden: int, n_out: int):
    return (np.zeros((dim, hidden)), np.zeros(hidden),
            np.zeros((hidden, n_out)), np.zeros(n_out))


def mlp_loss_and_grads(params, X, Y, alpha: float):
    """Mean cross-entropy plus alpha/(2n) * sum of squared weights.

    params is (W1, b1, W2, b2); Y is one-hot (n, n_out). Returns
    (loss, grads) with grads in the same tuple layout. Biases are not
    penalized.
    """
    W1, b1, W2, b2 = params
    n = X.shape[0]
    H = _logistic(X @ W1 + b1)
    P = _softmax(H @ W2 + b2)
    eps = 1e-12
    ce = -np.sum(Y * np.log(P + eps)) / n
    penalty = alpha / (2.0 * n) * (np.sum(W1 * W1) + np.sum(W2 * W2))
    loss = ce + penalty

    dZ2 = (P - Y) / n
    gW2 = H.T @ dZ2 + alpha / n * W2
    gb2 = dZ2.sum(axis=0)
    dH = dZ2 @ W2.T
    dZ1 = dH * H * (1.0 - H)
    gW1 = X.T @ dZ1 + alpha / n * W1
    gb1 = dZ1.sum(axis=0)
    return loss, (gW1, gb1, gW2, gb2)


class MlpClassifier(Model):
    def __init__(self, W1, b1, W2, b2, labels):
        self.W1, self.b1, self.W2, self.b2 = W1, b1, W2, b2
        self.labels_ = tuple(labels)
        self.dim_ = W1.shape[0]
        self.n_iter_ = 0
        self.loss_curve_ = []

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = self._check(X)
        H = _logistic(X @ self.W1 + self.b1)
        return _softmax(H @ self.W2 + self.b2)


def fit_mlp(
    X,
    y,
    params: MlpParams = MlpParams(),
    seed: int = 0,
    init: str = "glorot",
) -> MlpClassifier:
    """Per-sample momentum descent over shuffled epochs.

    Every epoch visits each row once (seeded reshuffle when
    params.shuffle) and applies a momentum step on that row's
    cross-entropy plus its 1/n share of the L2 penalty, so rare labels
    push with full gradient strength when their turn comes. The epoch
    loss over the whole set drives the schedule: the learning rate is
    halved whenever it fails to improve for `patience` consecutive
    epochs; training stops after `max_plateaus` such halvings or at
    `max_iter` epochs. A non-finite epoch loss raises TrainingError.
    """
    X = np.asarray(X, dtype=np.float64)
    labels = sorted_labels(y)
    if len(labels) < 2:
        raise ParameterError("need at least two labels")
    index = {lab: j for j, lab in enumerate(labels)}
    n = X.shape[0]
    Y = np.zeros((n, len(labels)))
    for i, lab in enumerate(y):
        Y[i, index[lab]] = 1.0

    if init == "glorot":
        weights = glorot_init(X.shape[1], params.hidden, len(labels), seed)
    elif init == "zeros":
        weights = zeros_init(X.shape[1], params.hidden, len(labels))
    else:
        raise ParameterError(f"unknown init {init!r}")
    W1, b1, W2, b2 = (w.copy() for w in weights)
    vW1, vb1, vW2, vb2 = (np.zeros_like(w) for w in (W1, b1, W2, b2))

    rng = np.random.default_rng(seed)
    decay = params.alpha / n
    lr = params.learning_rate
    best = np.inf
    stall = 0
    plateaus = 0
    curve = []
    epoch = 0
    order = np.arange(n)
    for epoch in range(1, params.max_iter + 1):
        if params.shuffle:
            rng.shuffle(order)
        for i in order:
            x = X[i]
            h = _logistic(x @ W1 + b1)
            z = h @ W2 + b2
            ez = np.exp(z - z.max())
            p = ez / ez.sum()
            d2 = p - Y[i]
            dh = (W2 @ d2) * h * (1.0 - h)
            vW2 *= params.momentum
            vW2 -= lr * (np.outer(h, d2) + decay * W2)
            vb2 *= params.momentum
            vb2 -= lr * d2
            vW1 *= params.momentum
            vW1 -= lr * (np.outer(x, dh) + decay * W1)
            vb1 *= params.momentum
            vb1 -= lr * dh
            W2 += vW2
            b2 += vb2
            W1 += vW1
            b1 += vb1
        loss, _ = mlp_loss_and_grads((W1, b1, W2, b2), X, Y, params.alpha)
        if not np.isfinite(loss):
            raise TrainingError("loss diverged", epoch=epoch)
        curve.append(loss)
        if loss < best - params.loss_tol:
            best = loss
            stall = 0
        else:
            stall += 1
            if stall >= params.patience:
                plateaus += 1
                stall = 0
                if plateaus >= params.max_plateaus:
                    break
                lr /= 2.0

    model = MlpClassifier(W1, b1, W2, b2, labels)
    model.n_iter_ = epoch
    model.loss_curve_ = curve
    return model
