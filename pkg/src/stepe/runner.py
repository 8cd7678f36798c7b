"""Epoch loop, suite orchestration and result persistence."""

import csv
import json
import logging
import time
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import datagen
from .errors import ConfigError
from .metrics import NoiseReport, aggregate_runs, noise_report, overhead, test_accuracy
from .model import cosine_lr, init_model, per_sample_loss, sgd_epoch
from .selection import FILTERING_METHODS, ScheduleConfig, SelectionState, objective_J, policy_epoch, rho_max_from_estimate
from .utils import derive_seed

log = logging.getLogger(__name__)


@dataclass
class EpochRecord:
    epoch: int
    lr: float
    keep_ratio: float
    drop_ratio: float
    kept_count: int
    mean_kept_loss: float
    test_acc: float
    precision: float = None
    recall: float = None
    f1: float = None
    auroc: float = None
    # wall-clock values go to the timing sidecar, not the epochs CSV
    epoch_seconds: float = 0.0
    probe_seconds: float = 0.0


EPOCH_COLUMNS = [f.name for f in fields(EpochRecord) if f.name not in ("epoch_seconds", "probe_seconds")]
TIMING_COLUMNS = ["epoch", "epoch_seconds", "probe_seconds"]


def build_dataset(cfg):
    dc = cfg.dataset
    if dc.kind == "csv":
        ds = datagen.load_csv(dc.path, dc.K, dc.d, split=dc.split, seed=dc.seed, header=dc.header)
    else:
        ds = datagen.make_blobs(dc.K, dc.d, dc.n_train, dc.n_test, dc.separation, derive_seed(dc.seed, "blobs"))
        if dc.noise != "none" and dc.noise_rate > 0:
            noise_seed = dc.noise_seed if dc.noise_seed is not None else derive_seed(dc.seed, "noise")
            confusion = None
            if dc.noise == "class_conditional":
                confusion = datagen.nearest_class_confusion(ds, rate=1.0, temperature=dc.confusion_temperature)
            ds = datagen.inject_noise(ds, datagen.NoiseSpec(dc.noise, dc.noise_rate, noise_seed, confusion))
    # standardized after injection so feature outliers share the clean data's scaling
    return datagen.standardize(ds) if dc.standardize else ds


def resolve_schedule(cfg, ds):
    sch = cfg.schedule
    rho_max = sch.rho_max
    if rho_max is None:
        if not ds.has_ground_truth:
            raise ConfigError("no ground-truth noise flags to estimate from; set it explicitly", "schedule.rho_max")
        rho_max = rho_max_from_estimate(datagen.empirical_noise_rate(ds))
    return ScheduleConfig(sch.T_warm, sch.T_total, rho_max)


def run_single(cfg, seed, method, ds=None, schedule=None):
    """Train one (method, seed) cell. Returns ``(cell_summary, records)``."""
    ds = build_dataset(cfg) if ds is None else ds
    schedule = resolve_schedule(cfg, ds) if schedule is None else schedule
    opt = cfg.opt
    n = ds.n
    model = init_model(cfg.run.arch, ds.d, ds.K, derive_seed(seed, "init"), hidden=cfg.run.hidden)
    state = SelectionState.initial(method, n)
    labels = ds.y_clean if method == "oracle" else ds.y_noisy
    track_noise = method in FILTERING_METHODS and ds.has_ground_truth

    records = []
    final_report = NoiseReport()
    for t in range(schedule.T_total):
        lr = cosine_lr(t, schedule.T_total, opt.lr0)
        start = time.perf_counter()
        state, kept, cap = policy_epoch(state, model, ds, t, schedule, permanent_drop=cfg.run.permanent_drop)
        probe_seconds = time.perf_counter() - start

        report = NoiseReport()
        if track_noise:
            if state.probe_epoch == t:
                scores = state.probe_losses
            else:
                # evaluation-only probe, kept out of the timed region
                scores = per_sample_loss(model, ds, np.arange(n))
            report = noise_report(state.dropped(), scores, ds.noise_flag)

        start = time.perf_counter()
        model, mean_loss = sgd_epoch(model, ds, kept, opt, lr, derive_seed(seed, "shuffle", t), labels=labels, loss_cap=cap)
        epoch_seconds = probe_seconds + time.perf_counter() - start

        keep_ratio = len(kept) / n
        records.append(EpochRecord(
            epoch=t,
            lr=lr,
            keep_ratio=keep_ratio,
            drop_ratio=(n - len(kept)) / n,
            kept_count=len(kept),
            mean_kept_loss=mean_loss,
            test_acc=test_accuracy(model, ds),
            precision=report.precision,
            recall=report.recall,
            f1=report.f1,
            auroc=report.auroc,
            epoch_seconds=epoch_seconds,
            probe_seconds=probe_seconds,
        ))
        final_report = report
        log.debug("%s seed=%d epoch=%d acc=%.4f kept=%d", method, seed, t, records[-1].test_acc, len(kept))

    accs = [r.test_acc for r in records]
    best = int(np.argmax(accs))
    total = sum(r.epoch_seconds for r in records)
    cell = {
        "method": method,
        "seed": seed,
        "final_acc": accs[-1],
        "best_acc": accs[best],
        "best_epoch": best,
        "total_seconds": total,
        "seconds_per_epoch": total / len(records),
        "probe_seconds_per_epoch": sum(r.probe_seconds for r in records) / len(records),
        "noise": final_report.as_dict(),
        "objective": objective_J(model, ds, state.gamma, cfg.run.lam),
    }
    return cell, records


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_epochs_csv(path, records):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EPOCH_COLUMNS)
        for r in records:
            w.writerow([_fmt(getattr(r, c)) for c in EPOCH_COLUMNS])


def write_timing_csv(path, records):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TIMING_COLUMNS)
        for r in records:
            w.writerow([_fmt(getattr(r, c)) for c in TIMING_COLUMNS])


def read_epochs_csv(path):
    """Rows of an epochs CSV as dicts of floats (None for empty cells)."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    out = []
    for row in rows:
        out.append({k: (float(v) if v != "" else None) for k, v in row.items()})
    return out


def _mean_of(cells, key, sub=None):
    vals = [(c[sub] if sub else c)[key] for c in cells]
    vals = [v for v in vals if v is not None]
    return aggregate_runs(vals)[0] if vals else None


def suite_tables(cells):
    """Accuracy table (mean/std in percent) and noise/timing table, one row per method in first-seen order."""
    if not cells:
        raise ValueError("empty suite")
    methods = list(dict.fromkeys(c["method"] for c in cells))
    by_method = {m: [c for c in cells if c["method"] == m] for m in methods}
    ref = None
    if "baseline" in by_method:
        ref = _mean_of(by_method["baseline"], "seconds_per_epoch")

    table1, table2 = [], []
    for m in methods:
        group = by_method[m]
        mean, std = aggregate_runs([100.0 * c["final_acc"] for c in group])
        best = aggregate_runs([100.0 * c.get("best_acc", c["final_acc"]) for c in group])[0]
        table1.append({"method": m, "seeds": [c["seed"] for c in group], "acc_mean": mean, "acc_std": std, "best_acc_mean": best})

        defined = [c for c in group if c.get("noise", {}).get("defined")]
        f1 = _mean_of([c["noise"] for c in defined], "f1") if defined else None
        auc = _mean_of([c["noise"] for c in defined], "auroc") if defined else None
        spe = _mean_of(group, "seconds_per_epoch")
        table2.append({
            "method": m,
            "f1": None if f1 is None else 100.0 * f1,
            "auroc": None if auc is None else 100.0 * auc,
            "seconds_per_epoch": spe,
            "overhead_pct": overhead(spe, ref) if ref and spe is not None else None,
        })
    return table1, table2


def run_suite(cfg, out=None, methods=None, seeds=None, ds=None):
    """Run every (method, seed) cell, persist logs, and return the summary tree.

    A failing cell is logged and listed under ``failures``; the others still run.
    """
    methods = list(methods or cfg.run.methods)
    seeds = list(seeds or cfg.run.seeds)
    out = Path(out or cfg.run.out)
    out.mkdir(parents=True, exist_ok=True)
    ds = build_dataset(cfg) if ds is None else ds
    schedule = resolve_schedule(cfg, ds)

    cells, failures = [], []
    for method in methods:
        for seed in seeds:
            try:
                cell, records = run_single(cfg, seed, method, ds=ds, schedule=schedule)
            except Exception as exc:  # noqa: BLE001 - one bad cell must not sink the suite
                log.error("cell %s/%d failed: %s", method, seed, exc)
                failures.append({"method": method, "seed": seed, "error": f"{type(exc).__name__}: {exc}"})
                continue
            write_epochs_csv(out / f"{method}_{seed}_epochs.csv", records)
            write_timing_csv(out / f"{method}_{seed}_timing.csv", records)
            cells.append(cell)
            log.info("%s seed=%d final_acc=%.4f", method, seed, cell["final_acc"])

    table1, table2 = suite_tables(cells) if cells else ([], [])
    summary = {
        "config": cfg.as_dict(),
        "config_text": cfg.source,
        "dataset": {"n_train": ds.n, "d": ds.d, "K": ds.K, "meta": ds.meta,
                    "empirical_noise_rate": datagen.empirical_noise_rate(ds) if ds.has_ground_truth else None},
        "schedule": asdict(schedule),
        "methods": methods,
        "seeds": seeds,
        "cells": cells,
        "table1": table1,
        "table2": table2,
        "failures": failures,
    }
    with open(out / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, default=_json_default)
        fh.write("\n")
    return summary


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")
