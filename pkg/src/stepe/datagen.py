"""Synthetic Gaussian-blob datasets, noise injectors and a CSV loader.

Ground truth (``y_clean`` and ``noise_flag``) lives on the dataset so the
metrics and the clean-label oracle can read it; nothing on the training
path of the other methods does.
"""

import csv
import hashlib
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, DataError, StateError
from .utils import round_half_away

NOISE_KINDS = ("symmetric", "class_conditional", "feature_outlier")


@dataclass(frozen=True)
class LabeledDataset:
    X_train: np.ndarray
    y_noisy: np.ndarray
    y_clean: np.ndarray
    noise_flag: np.ndarray
    X_test: np.ndarray
    y_test: np.ndarray
    K: int
    meta: dict = field(default_factory=dict)
    # False for CSV data whose clean labels are unknown
    has_ground_truth: bool = True

    @property
    def n(self):
        return len(self.y_noisy)

    @property
    def d(self):
        return self.X_train.shape[1]


@dataclass(frozen=True)
class NoiseSpec:
    kind: str
    rate: float
    seed: int = 0
    confusion: np.ndarray = None

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ConfigError(f"unknown noise kind {self.kind!r}; expected one of {NOISE_KINDS}", "dataset.noise")
        if not 0.0 <= self.rate <= 1.0:
            raise ConfigError("noise rate must lie in [0, 1]", "dataset.noise_rate")
        if self.kind == "class_conditional":
            C = np.asarray(self.confusion, dtype=float) if self.confusion is not None else None
            if C is None or C.ndim != 2 or C.shape[0] != C.shape[1]:
                raise ConfigError("class_conditional noise needs a square confusion matrix", "dataset.confusion")
            if np.any(C < 0) or not np.allclose(C.sum(axis=1), 1.0):
                raise ConfigError("confusion rows must be nonnegative and sum to 1", "dataset.confusion")


def _balanced_labels(rng, n, K):
    return rng.permutation(np.arange(n) % K)


def make_blobs(K, d, n_train, n_test, separation, seed):
    """Isotropic unit-variance Gaussian classes around centroids on a sphere of radius ``separation``."""
    if K < 2 or d < 2:
        raise ConfigError("make_blobs needs K >= 2 and d >= 2")
    if n_train < K or n_test < K:
        raise ConfigError("n_train and n_test must each be at least K")
    if separation < 0:
        raise ConfigError("separation must be nonnegative", "dataset.separation")
    rng = np.random.default_rng(seed)
    directions = rng.standard_normal((K, d))
    centroids = separation * directions / np.linalg.norm(directions, axis=1, keepdims=True)

    y_train = _balanced_labels(rng, n_train, K)
    X_train = centroids[y_train] + rng.standard_normal((n_train, d))
    y_test = _balanced_labels(rng, n_test, K)
    X_test = centroids[y_test] + rng.standard_normal((n_test, d))
    meta = {"generator": "blobs", "K": K, "d": d, "n_train": n_train, "n_test": n_test,
            "separation": separation, "seed": seed}
    return LabeledDataset(
        X_train=X_train,
        y_noisy=y_train.copy(),
        y_clean=y_train,
        noise_flag=np.zeros(n_train, dtype=bool),
        X_test=X_test,
        y_test=y_test,
        K=K,
        meta=meta,
    )


def inject_noise(ds, spec):
    """Corrupt exactly round(rate * n) training samples chosen uniformly without replacement."""
    if "noise" in ds.meta or ds.noise_flag.any():
        raise StateError("noise has already been injected into this dataset")
    n, K = ds.n, ds.K
    rng = np.random.default_rng(spec.seed)
    count = round_half_away(spec.rate * n)
    chosen = np.sort(rng.choice(n, size=count, replace=False))

    y_noisy = ds.y_noisy.copy()
    X_train = ds.X_train
    flags = np.zeros(n, dtype=bool)
    if spec.kind == "symmetric":
        # shift by 1..K-1 so the new label is uniform over the other classes
        y_noisy[chosen] = (y_noisy[chosen] + rng.integers(1, K, size=count)) % K
        flags[chosen] = True
    elif spec.kind == "class_conditional":
        C = np.asarray(spec.confusion, dtype=float)
        if C.shape != (K, K):
            raise ConfigError(f"confusion matrix must be {K}x{K}", "dataset.confusion")
        cdf = np.cumsum(C, axis=1)
        u = rng.random(count)
        rows = cdf[ds.y_clean[chosen]]
        drawn = np.minimum((u[:, None] >= rows).sum(axis=1), K - 1)
        y_noisy[chosen] = drawn
        flags[chosen] = drawn != ds.y_clean[chosen]
    else:
        lo, hi = ds.X_train.min(axis=0), ds.X_train.max(axis=0)
        X_train = ds.X_train.copy()
        X_train[chosen] = rng.uniform(lo, hi, size=(count, ds.d))
        flags[chosen] = True

    meta = dict(ds.meta, noise={"kind": spec.kind, "rate": spec.rate, "seed": spec.seed, "count": count})
    return replace(ds, X_train=X_train, y_noisy=y_noisy, noise_flag=flags, meta=meta)


def nearest_class_confusion(ds, rate=1.0, temperature=1.0):
    """Confusion matrix that flips each class toward its nearest class means.

    Row i keeps ``1 - rate`` on the diagonal and spreads ``rate`` over the
    other classes with weights softmax(-distance / temperature). A stand-in
    for structured human label noise, nothing more.
    """
    K = ds.K
    means = np.stack([ds.X_train[ds.y_clean == k].mean(axis=0) for k in range(K)])
    dist = np.linalg.norm(means[:, None, :] - means[None, :, :], axis=2)
    logits = -dist / temperature
    np.fill_diagonal(logits, -np.inf)
    w = np.exp(logits - logits.max(axis=1, keepdims=True))
    w /= w.sum(axis=1, keepdims=True)
    C = rate * w
    C[np.diag_indices(K)] = 1.0 - rate
    return C


def standardize(ds):
    """Scale every feature to zero mean and unit variance using training-split statistics."""
    mu = ds.X_train.mean(axis=0)
    sd = ds.X_train.std(axis=0)
    sd[sd == 0] = 1.0
    return replace(ds, X_train=(ds.X_train - mu) / sd, X_test=(ds.X_test - mu) / sd,
                   meta=dict(ds.meta, standardized=True))


def empirical_noise_rate(ds):
    """Fraction of flagged training samples. Offline use only (choosing rho_max)."""
    return float(np.mean(ds.noise_flag)) if ds.n else 0.0


def _split_rank(n, seed):
    keys = [hashlib.blake2b(f"{seed}:{i}".encode(), digest_size=8).digest() for i in range(n)]
    return np.argsort(np.array([int.from_bytes(k, "big") for k in keys], dtype=np.uint64), kind="stable")


def load_csv(path, K, d, split=0.8, seed=0, header=False):
    """Read ``d`` feature columns plus an integer label per row.

    Rows go to the training split when their hash rank (keyed on ``seed``
    and row index) falls in the first round(split * n); both splits keep
    file order. Clean labels are unknown, so they mirror the given labels
    and ``has_ground_truth`` is False.
    """
    if not 0.0 <= split <= 1.0:
        raise ConfigError("split must lie in [0, 1]", "dataset.split")
    X, y = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if header and lineno == 1:
                continue
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != d + 1:
                raise DataError(f"expected {d + 1} columns, got {len(row)}", line=lineno)
            try:
                feats = [float(c) for c in row[:d]]
                label = int(row[d])
            except ValueError as exc:
                raise DataError(f"cannot parse row: {exc}", line=lineno) from None
            if not 0 <= label < K:
                raise DataError(f"label {label} outside [0, {K})", line=lineno)
            X.append(feats)
            y.append(label)
    if not X:
        raise DataError(f"{path}: no data rows")
    X = np.array(X, dtype=float)
    y = np.array(y, dtype=np.int64)
    n = len(y)
    in_train = np.zeros(n, dtype=bool)
    in_train[_split_rank(n, seed)[:round_half_away(split * n)]] = True
    y_train = y[in_train]
    return LabeledDataset(
        X_train=X[in_train],
        y_noisy=y_train,
        y_clean=y_train.copy(),
        noise_flag=np.zeros(len(y_train), dtype=bool),
        X_test=X[~in_train],
        y_test=y[~in_train],
        K=K,
        meta={"generator": "csv", "path": str(path), "split": split, "seed": seed},
        has_ground_truth=False,
    )


def save_csv(path, X, y, header=False):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header:
            w.writerow([f"x{j}" for j in range(X.shape[1])] + ["label"])
        for row, label in zip(X, y):
            w.writerow([repr(float(v)) for v in row] + [int(label)])
