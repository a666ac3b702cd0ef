"""Multinomial logistic regression: the model every simulated client trains.

Weights are a (classes, features+1) matrix, bias in the last column;
the wire format is the row-major flattening of that matrix. Convex, cheap,
and the analytic gradient can be checked against finite differences.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .errors import NonFiniteError


def augment(X: np.ndarray) -> np.ndarray:
    """Append the bias column of ones."""
    return np.hstack([X, np.ones((X.shape[0], 1))])


def init_weights(n_classes: int, n_features: int) -> np.ndarray:
    return np.zeros((n_classes, n_features + 1))


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def loss(W: np.ndarray, Xa: np.ndarray, y: np.ndarray) -> float:
    probs = softmax(Xa @ W.T)
    # a confidently-wrong sample drives this to +inf, which is exactly the
    # divergence signal train() checks for
    with np.errstate(divide="ignore"):
        return float(-np.mean(np.log(probs[np.arange(len(y)), y])))


def gradient(W: np.ndarray, Xa: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Mean cross-entropy gradient, shape (classes, features+1)."""
    probs = softmax(Xa @ W.T)
    probs[np.arange(len(y)), y] -= 1.0
    return probs.T @ Xa / len(y)


def train(W: np.ndarray, X: np.ndarray, y: np.ndarray, epochs: int, lr: float,
          batch_size: Optional[int] = None,
          shuffle_rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Gradient descent on the local dataset.

    Full batch when `batch_size` is None; otherwise seeded-shuffle
    minibatch SGD (the caller owns the shuffle stream).
    """
    Xa = augment(X)
    W = W.copy()
    n = len(y)
    for _ in range(epochs):
        if batch_size is None or batch_size >= n:
            W -= lr * gradient(W, Xa, y)
        else:
            if shuffle_rng is None:
                raise ValueError("minibatch training needs a shuffle stream")
            order = shuffle_rng.permutation(n)
            for start in range(0, n, batch_size):
                idx = order[start:start + batch_size]
                W -= lr * gradient(W, Xa[idx], y[idx])
    if not np.all(np.isfinite(W)) or not np.isfinite(loss(W, Xa, y)):
        raise NonFiniteError("training diverged; lower the learning rate")
    return W


def accuracy(W: np.ndarray, X: np.ndarray, y: np.ndarray) -> float:
    pred = (augment(X) @ W.T).argmax(axis=1)
    return float(np.mean(pred == y))


def flatten(W: np.ndarray) -> np.ndarray:
    return W.ravel().copy()


def unflatten(w: np.ndarray, n_classes: int, n_features: int) -> np.ndarray:
    return w.reshape(n_classes, n_features + 1).copy()
