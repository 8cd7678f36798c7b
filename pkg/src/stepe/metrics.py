"""Accuracy, noise-detection quality and timing helpers."""

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.stats import rankdata

from .errors import DataError
from .model import forward_logits


@dataclass
class NoiseReport:
    precision: float = None
    recall: float = None
    f1: float = None
    auroc: float = None
    dropped_count: int = 0
    defined: bool = False

    def as_dict(self):
        return asdict(self)


@dataclass
class TimingRecord:
    epoch_seconds: float
    probe_seconds: float = 0.0

    def overhead_pct(self, reference_seconds):
        return overhead(self.epoch_seconds, reference_seconds)


def test_accuracy(model, ds):
    """Fraction of clean test labels matched by argmax (ties resolve to the lowest class)."""
    if len(ds.y_test) == 0:
        raise DataError("empty test split")
    pred = np.argmax(forward_logits(model, ds.X_test), axis=1)
    return float(np.mean(pred == ds.y_test))


test_accuracy.__test__ = False  # keep pytest from collecting it


def noise_prf(dropped, flags):
    """Precision, recall and F1 of the dropped set as a detector of flagged samples.

    An empty dropped set scores precision 0 and F1 0. Recall is 1 only in the
    degenerate case where nothing is flagged and nothing is dropped.
    """
    flags = np.asarray(flags, dtype=bool)
    dropped = np.unique(np.asarray(dropped, dtype=np.int64))
    if dropped.size and (dropped.min() < 0 or dropped.max() >= len(flags)):
        raise DataError(f"dropped index outside [0, {len(flags)})")
    n_flagged = int(flags.sum())
    hits = int(flags[dropped].sum())
    precision = hits / len(dropped) if len(dropped) else 0.0
    if n_flagged:
        recall = hits / n_flagged
    else:
        recall = 1.0 if len(dropped) == 0 else 0.0
    denom = precision + recall
    f1 = 2 * precision * recall / denom if denom else 0.0
    return precision, recall, f1


def auroc(scores, flags):
    """Probability that a flagged sample scores above an unflagged one, ties counted as one half.

    Computed from midranks (Mann-Whitney U / (n_pos * n_neg)).
    """
    scores = np.asarray(scores, dtype=float)
    flags = np.asarray(flags, dtype=bool)
    n_pos = int(flags.sum())
    n_neg = len(flags) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DataError("AUROC is undefined unless both flagged and unflagged samples are present")
    ranks = rankdata(scores, method="average")
    u = ranks[flags].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def noise_report(dropped, scores, flags):
    precision, recall, f1 = noise_prf(dropped, flags)
    flags = np.asarray(flags, dtype=bool)
    auc = auroc(scores, flags) if 0 < flags.sum() < len(flags) else None
    return NoiseReport(precision, recall, f1, auc, int(len(dropped)), True)


def overhead(t_method, t_ref):
    """Extra time of ``t_method`` relative to ``t_ref``, in percent."""
    if not t_ref > 0:
        raise ValueError("reference time must be positive")
    return 100.0 * (t_method - t_ref) / t_ref


def aggregate_runs(per_seed):
    """Mean and sample standard deviation (n - 1 denominator; 0 for a single value)."""
    values = [float(v) for v in per_seed]
    if not values:
        raise ValueError("aggregate_runs needs at least one value")
    mean = math.fsum(values) / len(values)
    if len(values) == 1:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in values) / (len(values) - 1)
    return mean, math.sqrt(var)
