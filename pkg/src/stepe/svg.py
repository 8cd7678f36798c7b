"""Minimal deterministic SVG line-chart writer (no plotting dependency)."""

import math
import zlib
from xml.sax.saxutils import escape, quoteattr

WIDTH, HEIGHT = 800, 500
MARGIN = 0.10

_PALETTE = {
    "baseline": "#4c72b0",
    "truncation": "#8c8c8c",
    "self_paced": "#dd8452",
    "one_shot": "#937860",
    "step_e": "#c44e52",
    "oracle": "#55a868",
    "keep": "#4c72b0",
    "drop": "#c44e52",
    "precision": "#55a868",
    "recall": "#dd8452",
    "f1": "#8172b3",
}
_FALLBACK = ["#64b5cd", "#da8bc3", "#ccb974", "#8172b3", "#2f4b7c", "#a05195"]


def color_for(name):
    if name in _PALETTE:
        return _PALETTE[name]
    return _FALLBACK[zlib.crc32(name.encode("utf-8")) % len(_FALLBACK)]


def fmt(x):
    """Coordinates with two decimals, no negative zero."""
    s = f"{x:.2f}"
    return "0.00" if s == "-0.00" else s


def nice_number(x, round_=True):
    if x <= 0:
        return 1.0
    exp = math.floor(math.log10(x))
    f = x / 10 ** exp
    if round_:
        nf = 1 if f < 1.5 else 2 if f < 3 else 5 if f < 7 else 10
    else:
        nf = 1 if f <= 1 else 2 if f <= 2 else 5 if f <= 5 else 10
    return nf * 10 ** exp


def nice_ticks(lo, hi, max_ticks=6):
    """Loose tick positions covering [lo, hi] at 1/2/5 x 10^k spacing."""
    if hi <= lo:
        hi = lo + 1.0
    span = nice_number(hi - lo, round_=False)
    step = nice_number(span / (max_ticks - 1), round_=True)
    start = math.floor(lo / step) * step
    stop = math.ceil(hi / step) * step
    count = int(round((stop - start) / step))
    return [start + i * step for i in range(count + 1)], step


def tick_label(v, step):
    decimals = max(0, -int(math.floor(math.log10(step)))) if step < 1 else 0
    s = f"{v:.{decimals}f}"
    return s[1:] if s.startswith("-") and float(s) == 0 else s


class Panel:
    """A plotting rectangle mapping data coordinates to canvas pixels."""

    def __init__(self, x0, y0, width, height, xlim, ylim):
        self.x0, self.y0, self.w, self.h = x0, y0, width, height
        self.xticks, self.xstep = nice_ticks(*xlim)
        self.yticks, self.ystep = nice_ticks(*ylim)
        self.xlim = (self.xticks[0], self.xticks[-1])
        self.ylim = (self.yticks[0], self.yticks[-1])

    def px(self, x):
        lo, hi = self.xlim
        return self.x0 + (x - lo) / (hi - lo) * self.w

    def py(self, y):
        lo, hi = self.ylim
        return self.y0 + self.h - (y - lo) / (hi - lo) * self.h


class Canvas:
    def __init__(self, width=WIDTH, height=HEIGHT):
        self.width, self.height = width, height
        self.parts = []

    def add(self, element):
        self.parts.append(element)

    def text(self, x, y, s, anchor="middle", size=12, rotate=None, cls=None):
        attrs = f'x="{fmt(x)}" y="{fmt(y)}" font-size="{size}" text-anchor="{anchor}"'
        if rotate is not None:
            attrs += f' transform="rotate({rotate} {fmt(x)} {fmt(y)})"'
        if cls:
            attrs += f' class="{cls}"'
        self.add(f"<text {attrs}>{escape(str(s))}</text>")

    def line(self, x1, y1, x2, y2, stroke="#000", width=1, cls=None, dash=None):
        extra = f' class="{cls}"' if cls else ""
        if dash:
            extra += f' stroke-dasharray="{dash}"'
        self.add(f'<line x1="{fmt(x1)}" y1="{fmt(y1)}" x2="{fmt(x2)}" y2="{fmt(y2)}" '
                 f'stroke="{stroke}" stroke-width="{width}"{extra}/>')

    def axes(self, panel, xlabel, ylabel, title=None):
        p = panel
        self.add(f'<rect x="{fmt(p.x0)}" y="{fmt(p.y0)}" width="{fmt(p.w)}" height="{fmt(p.h)}" '
                 f'fill="none" stroke="#000" stroke-width="1" class="frame"/>')
        for v in p.xticks:
            x = p.px(v)
            self.line(x, p.y0 + p.h, x, p.y0 + p.h + 5, cls="tick")
            self.text(x, p.y0 + p.h + 18, tick_label(v, p.xstep), cls="tick-label")
        for v in p.yticks:
            y = p.py(v)
            self.line(p.x0 - 5, y, p.x0, y, cls="tick")
            self.line(p.x0, y, p.x0 + p.w, y, stroke="#dddddd", cls="grid")
            self.text(p.x0 - 8, y + 4, tick_label(v, p.ystep), anchor="end", cls="tick-label")
        self.text(p.x0 + p.w / 2, p.y0 + p.h + 38, xlabel, size=13, cls="axis-label")
        self.text(p.x0 - 45, p.y0 + p.h / 2, ylabel, size=13, rotate=-90, cls="axis-label")
        if title:
            self.text(p.x0 + p.w / 2, p.y0 - 10, title, size=14, cls="title")

    def polyline(self, panel, xs, ys, color, name, width=2):
        pts = " ".join(f"{fmt(panel.px(x))},{fmt(panel.py(y))}" for x, y in zip(xs, ys))
        self.add(f'<polyline class="series" data-name={quoteattr(name)} points="{pts}" '
                 f'fill="none" stroke="{color}" stroke-width="{width}"/>')

    def band(self, panel, xs, lo, hi, color, name):
        upper = [f"{fmt(panel.px(x))},{fmt(panel.py(y))}" for x, y in zip(xs, hi)]
        lower = [f"{fmt(panel.px(x))},{fmt(panel.py(y))}" for x, y in zip(reversed(xs), reversed(lo))]
        self.add(f'<polygon class="band" data-name={quoteattr(name)} points="{" ".join(upper + lower)}" '
                 f'fill="{color}" fill-opacity="0.2" stroke="none"/>')

    def legend(self, panel, entries):
        """Swatch + label per (label, color), stacked in the panel's top-right corner."""
        x = panel.x0 + panel.w - 150
        y = panel.y0 + 12
        for i, (label, color) in enumerate(entries):
            yy = y + 18 * i
            self.add(f'<rect class="legend-swatch" x="{fmt(x)}" y="{fmt(yy - 5)}" width="18" height="4" fill="{color}"/>')
            self.text(x + 24, yy + 1, label, anchor="start", size=12, cls="legend-label")

    def to_string(self):
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
                f'viewBox="0 0 {self.width} {self.height}" font-family="sans-serif">')
        body = [f'<rect width="{self.width}" height="{self.height}" fill="#ffffff"/>'] + self.parts
        return "\n".join([head] + body + ["</svg>", ""])

    def save(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_string())


def padded_range(values, pad=0.05, floor=None, ceil=None):
    vals = [v for v in values if v is not None]
    lo, hi = (min(vals), max(vals)) if vals else (0.0, 1.0)
    span = hi - lo if hi > lo else max(abs(hi), 1.0) * 0.1
    lo, hi = lo - pad * span, hi + pad * span
    if floor is not None:
        lo = max(lo, floor)
    if ceil is not None:
        hi = min(hi, ceil)
    return lo, hi
