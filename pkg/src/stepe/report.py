"""Figures and markdown tables rendered from persisted run logs."""

import json
import logging
import re
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

import numpy as np

from .errors import DataError
from .runner import read_epochs_csv, suite_tables
from .svg import HEIGHT, MARGIN, WIDTH, Canvas, Panel, color_for, padded_range

log = logging.getLogger(__name__)

DISPLAY_NAMES = {
    "baseline": "Baseline",
    "truncation": "Truncation",
    "self_paced": "Self-Paced",
    "one_shot": "One-Shot",
    "step_e": "Step-E",
    "oracle": "Oracle (clean labels)",
}
_LOG_NAME = re.compile(r"^(?P<method>.+)_(?P<seed>\d+)_epochs\.csv$")


def display_name(method):
    return DISPLAY_NAMES.get(method, method)


def round1(x):
    """One decimal, halves away from zero."""
    return str(Decimal(repr(float(x))).quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


def _column(rows, key):
    return [r[key] for r in rows]


def _check_lengths(logs):
    lengths = {len(rows) for rows in logs}
    if len(lengths) != 1:
        raise DataError(f"logs disagree on epoch count: {sorted(lengths)}")
    if 0 in lengths:
        raise DataError("empty run log")


def _full_panel(xlim, ylim):
    return Panel(WIDTH * MARGIN, HEIGHT * MARGIN, WIDTH * (1 - 2 * MARGIN), HEIGHT * (1 - 2 * MARGIN), xlim, ylim)


def render_convergence(logs, path, title="Test accuracy across epochs"):
    """One accuracy-vs-epoch polyline per method; ``logs`` maps method -> rows."""
    if not logs:
        raise DataError("render_convergence needs at least one log")
    methods = sorted(logs)
    _check_lengths([logs[m] for m in methods])
    epochs = _column(logs[methods[0]], "epoch")
    accs = [100 * a for m in methods for a in _column(logs[m], "test_acc")]
    panel = _full_panel((min(epochs), max(epochs)), padded_range(accs, floor=0.0, ceil=100.0))
    canvas = Canvas()
    canvas.axes(panel, "Epoch", "Test accuracy (%)", title)
    for m in methods:
        canvas.polyline(panel, epochs, [100 * a for a in _column(logs[m], "test_acc")], color_for(m), m)
    canvas.legend(panel, [(display_name(m), color_for(m)) for m in methods])
    canvas.save(path)
    return path


def render_dynamics(rows, path, title="Step-E dynamics"):
    """Keep/drop ratios on the left; precision/recall/F1 on the right when ground truth exists.

    Returns True when both panels were drawn.
    """
    if not rows:
        raise DataError("empty run log")
    epochs = _column(rows, "epoch")
    has_noise = any(r.get("f1") is not None for r in rows)
    canvas = Canvas()
    gap = WIDTH * MARGIN
    left_w = (WIDTH * (1 - 2 * MARGIN) - gap) / 2 if has_noise else WIDTH * (1 - 2 * MARGIN)
    top, height = HEIGHT * MARGIN, HEIGHT * (1 - 2 * MARGIN)
    xlim = (min(epochs), max(epochs))

    left = Panel(WIDTH * MARGIN, top, left_w, height, xlim, (0.0, 1.0))
    canvas.axes(left, "Epoch", "Ratio", "Keep / drop ratio")
    canvas.polyline(left, epochs, _column(rows, "keep_ratio"), color_for("keep"), "keep")
    canvas.polyline(left, epochs, _column(rows, "drop_ratio"), color_for("drop"), "drop")
    canvas.legend(left, [("keep", color_for("keep")), ("drop", color_for("drop"))])

    if has_noise:
        right = Panel(WIDTH * MARGIN + left_w + gap, top, left_w, height, xlim, (0.0, 1.0))
        canvas.axes(right, "Epoch", "Score", "Noise detection")
        for key in ("precision", "recall", "f1"):
            ys = [v if v is not None else 0.0 for v in _column(rows, key)]
            canvas.polyline(right, epochs, ys, color_for(key), key)
        canvas.legend(right, [(k, color_for(k)) for k in ("precision", "recall", "f1")])
    else:
        log.warning("%s: no ground-truth noise metrics; drawing the ratio panel only", path)
    canvas.text(WIDTH / 2, top / 2, title, size=15, cls="title")
    canvas.save(path)
    return has_noise


def seed_band_stats(logs):
    """Per-epoch mean and sample std of test accuracy (percent) across seed logs."""
    acc = 100 * np.array([_column(rows, "test_acc") for rows in logs], dtype=float)
    return acc.mean(axis=0), acc.std(axis=0, ddof=1)


def render_seed_band(groups, path, title="Test accuracy, mean and std over seeds"):
    """Mean accuracy curve with a +/-1 sample-std band per method; ``groups`` maps method -> list of logs."""
    if not groups:
        raise DataError("render_seed_band needs at least one method")
    methods = sorted(groups)
    for m in methods:
        if len(groups[m]) < 2:
            raise DataError(f"{m}: a seed band needs at least two seeds; use render_convergence for one")
    _check_lengths([rows for m in methods for rows in groups[m]])
    epochs = _column(groups[methods[0]][0], "epoch")

    stats = {m: seed_band_stats(groups[m]) for m in methods}
    lo_all = [v for mean, std in stats.values() for v in mean - std]
    hi_all = [v for mean, std in stats.values() for v in mean + std]
    panel = _full_panel((min(epochs), max(epochs)), padded_range(lo_all + hi_all, floor=0.0, ceil=100.0))
    canvas = Canvas()
    canvas.axes(panel, "Epoch", "Test accuracy (%)", title)
    for m in methods:
        mean, std = stats[m]
        canvas.band(panel, epochs, list(mean - std), list(mean + std), color_for(m), m)
    for m in methods:
        canvas.polyline(panel, epochs, list(stats[m][0]), color_for(m), m)
    canvas.legend(panel, [(display_name(m), color_for(m)) for m in methods])
    canvas.save(path)
    return path


def render_tables(summary, path=None):
    """Accuracy and noise/overhead markdown tables built from a suite summary's cells."""
    cells = summary.get("cells") or []
    if not cells:
        raise DataError("suite summary has no cells")
    table1, table2 = suite_tables(cells)
    lines = ["## Test accuracy", "", "| Method | Test Acc. (%) | Best Acc. (%) | Seeds |", "|---|---|---|---|"]
    for row in table1:
        lines.append(f"| {display_name(row['method'])} | {round1(row['acc_mean'])} ± {round1(row['acc_std'])} "
                     f"| {round1(row['best_acc_mean'])} | {', '.join(str(s) for s in row['seeds'])} |")
    lines += ["", "## Noise detection and training time", "",
              "| Method | Noise F1 (%) | Noise AUROC (%) | Time / epoch (ms) | Overhead (%) |", "|---|---|---|---|---|"]
    for row in table2:
        def cell(v, scale=1.0):
            return "N/A" if v is None else round1(v * scale)
        lines.append(f"| {display_name(row['method'])} | {cell(row['f1'])} | {cell(row['auroc'])} "
                     f"| {cell(row['seconds_per_epoch'], 1000.0)} | {cell(row['overhead_pct'])} |")
    text = "\n".join(lines) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return text


def discover_logs(in_dir):
    """{method: {seed: rows}} for every ``<method>_<seed>_epochs.csv`` in ``in_dir``."""
    found = {}
    for p in sorted(Path(in_dir).iterdir()):
        m = _LOG_NAME.match(p.name)
        if m:
            found.setdefault(m["method"], {})[int(m["seed"])] = read_epochs_csv(p)
    return found


def report_dir(in_dir, figs=("conv", "dyn", "band"), tables=True, out_dir=None):
    """Render the requested figures (and tables) for a run directory; returns written paths."""
    in_dir = Path(in_dir)
    out_dir = Path(out_dir) if out_dir else in_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    logs = discover_logs(in_dir)
    written = []
    seeds = sorted({s for per_seed in logs.values() for s in per_seed})

    if "conv" in figs:
        for seed in seeds:
            group = {m: per_seed[seed] for m, per_seed in logs.items() if seed in per_seed}
            written.append(render_convergence(group, out_dir / f"convergence_seed{seed}.svg",
                                              title=f"Test accuracy across epochs (seed {seed})"))
    if "dyn" in figs:
        for seed, rows in sorted(logs.get("step_e", {}).items()):
            p = out_dir / f"dynamics_step_e_seed{seed}.svg"
            render_dynamics(rows, p, title=f"Step-E dynamics (seed {seed})")
            written.append(p)
    if "band" in figs:
        groups = {m: [logs[m][s] for s in sorted(logs[m])] for m in ("baseline", "step_e")
                  if m in logs and len(logs[m]) >= 2}
        if groups:
            written.append(render_seed_band(groups, out_dir / "seed_band.svg"))
        else:
            log.warning("seed band skipped: needs baseline or step_e logs for two or more seeds")
    if tables:
        summary_path = in_dir / "summary.json"
        if not summary_path.exists():
            raise DataError(f"{summary_path} not found")
        with open(summary_path, encoding="utf-8") as fh:
            summary = json.load(fh)
        render_tables(summary, out_dir / "tables.md")
        written.append(out_dir / "tables.md")
    return written
