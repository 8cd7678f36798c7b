"""Small numpy classifiers with closed-form gradients and Nesterov SGD."""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ShapeError, StateError

ARCHS = ("linear", "mlp")


@dataclass
class OptimizerConfig:
    lr0: float = 0.1
    momentum: float = 0.9
    weight_decay: float = 5e-4
    batch_size: int = 128

    def __post_init__(self):
        if not (self.lr0 > 0 and math.isfinite(self.lr0)):
            raise ConfigError("must be a positive finite number", "opt.lr0")
        if not 0 <= self.momentum < 1:
            raise ConfigError("must lie in [0, 1)", "opt.momentum")
        if not self.weight_decay >= 0:
            raise ConfigError("must be nonnegative", "opt.weight_decay")
        if int(self.batch_size) != self.batch_size or self.batch_size < 1:
            raise ConfigError("must be a positive integer", "opt.batch_size")
        self.batch_size = int(self.batch_size)


@dataclass
class ModelState:
    """Parameters of a softmax-linear or one-hidden-layer ReLU classifier.

    Weight matrices are stored as (fan_out, fan_in), so a layer computes
    ``h @ W.T + b``. ``velocity`` holds one momentum buffer per entry of
    ``params()``, in the same order.
    """

    arch: str
    d: int
    K: int
    weights: list
    biases: list
    velocity: list = field(default_factory=list)
    hidden: int = None

    def params(self):
        out = []
        for W, b in zip(self.weights, self.biases):
            out.extend((W, b))
        return out

    def copy(self):
        return ModelState(
            arch=self.arch,
            d=self.d,
            K=self.K,
            weights=[W.copy() for W in self.weights],
            biases=[b.copy() for b in self.biases],
            velocity=[v.copy() for v in self.velocity],
            hidden=self.hidden,
        )


def init_model(arch, d, K, seed, hidden=None):
    """Glorot-uniform weights, zero biases, zero momentum; deterministic in ``seed``."""
    if arch not in ARCHS:
        raise ConfigError(f"unknown architecture {arch!r}; expected one of {ARCHS}", "run.arch")
    if int(d) != d or d < 1:
        raise ConfigError("input dimension must be >= 1", "d")
    if int(K) != K or K < 2:
        raise ConfigError("class count must be >= 2", "K")
    if arch == "mlp":
        if hidden is None or int(hidden) != hidden or hidden < 1:
            raise ConfigError("mlp needs a positive hidden width", "run.hidden")
        dims = [int(d), int(hidden), int(K)]
    else:
        hidden = None
        dims = [int(d), int(K)]

    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    model = ModelState(arch, int(d), int(K), weights, biases, hidden=hidden)
    model.velocity = [np.zeros_like(p) for p in model.params()]
    return model


def _check_features(model, X):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.d:
        raise ShapeError(f"expected features of shape (n, {model.d}), got {X.shape}")
    return X


def _forward(model, X):
    # returns logits and the hidden activations (None for the linear model)
    if model.arch == "linear":
        return X @ model.weights[0].T + model.biases[0], None
    H = np.maximum(X @ model.weights[0].T + model.biases[0], 0.0)
    return H @ model.weights[1].T + model.biases[1], H


def forward_logits(model, X):
    return _forward(model, _check_features(model, X))[0]


def log_softmax(logits):
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def cross_entropy(logits, y):
    """Per-row cross-entropy of integer labels ``y`` under ``logits``."""
    y = np.asarray(y, dtype=np.int64)
    return -log_softmax(logits)[np.arange(len(y)), y]


def per_sample_loss(model, ds, indices, labels=None):
    """Cross-entropy of each training sample in ``indices`` against its noisy label.

    Pure: the model is not touched. ``labels`` overrides the label vector and
    exists only for the clean-label oracle.
    """
    indices = np.asarray(indices, dtype=np.int64)
    if indices.size == 0:
        return np.zeros(0)
    y = ds.y_noisy if labels is None else labels
    logits = forward_logits(model, ds.X_train[indices])
    return cross_entropy(logits, y[indices])


def loss_and_grads(model, X, y, loss_cap=None):
    """Mean (optionally capped) cross-entropy over a batch and its gradient.

    With ``loss_cap`` the per-sample loss is min(loss, cap): samples above the
    cap still count in the batch size but contribute no gradient.
    Gradients are returned in ``model.params()`` order, without weight decay.
    """
    X = _check_features(model, X)
    y = np.asarray(y, dtype=np.int64)
    m = len(y)
    logits, H = _forward(model, X)
    logp = log_softmax(logits)
    losses = -logp[np.arange(m), y]

    delta = np.exp(logp)
    delta[np.arange(m), y] -= 1.0
    if loss_cap is not None:
        clipped = losses > loss_cap
        losses = np.minimum(losses, loss_cap)
        delta[clipped] = 0.0
    delta /= m

    if model.arch == "linear":
        grads = [delta.T @ X, delta.sum(axis=0)]
    else:
        dH = (delta @ model.weights[1]) * (H > 0)
        grads = [dH.T @ X, dH.sum(axis=0), delta.T @ H, delta.sum(axis=0)]
    return float(losses.mean()), grads


def nesterov_step(model, grads, lr, opt):
    """In-place update: v <- mu*v + g;  theta <- theta - lr*(g + mu*v), g including L2 decay."""
    mu, wd = opt.momentum, opt.weight_decay
    for p, v, g in zip(model.params(), model.velocity, grads):
        g = g + wd * p
        v *= mu
        v += g
        p -= lr * (g + mu * v)


def sgd_epoch(model, ds, kept, opt, lr, seed, labels=None, loss_cap=None):
    """One pass of mini-batch Nesterov SGD over the kept subset.

    The kept indices are shuffled with ``seed`` and cut into batches of
    ``opt.batch_size`` (the last may be short). Samples outside ``kept``
    are never touched. Returns the updated copy of the model and the mean
    training loss over all processed samples.
    """
    kept = np.asarray(kept, dtype=np.int64)
    if kept.size == 0:
        raise StateError("empty kept set")
    if not lr >= 0:
        raise ConfigError("learning rate must be nonnegative", "lr")
    y = ds.y_noisy if labels is None else labels
    model = model.copy()
    order = np.random.default_rng(seed).permutation(kept)
    total = 0.0
    for start in range(0, len(order), opt.batch_size):
        batch = order[start:start + opt.batch_size]
        loss, grads = loss_and_grads(model, ds.X_train[batch], y[batch], loss_cap)
        nesterov_step(model, grads, lr, opt)
        total += loss * len(batch)
    for p in model.params():
        if not np.all(np.isfinite(p)):
            raise FloatingPointError("non-finite parameter after SGD epoch; lower the learning rate")
    return model, total / len(order)


def cosine_lr(t, T_total, lr0):
    if not 0 <= t < T_total:
        raise ConfigError(f"epoch {t} outside [0, {T_total})", "t")
    return lr0 * 0.5 * (1.0 + math.cos(math.pi * t / T_total))

