"""Standalone SVG rendering of condition number plots.

The SVG is written by hand (rect, line, polyline, text) so output is small,
byte-for-byte deterministic, and diffable.
"""

import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

import numpy as np

from ..errors import InvalidInput

#: Named colors for vertical markers.
MARK_COLORS = {
    "selected": "#d62728",  # red: the cross-validated optimum
    "proposed": "#2ca02c",  # green: any other proposed penalty
    "knee": "#7f7f7f",
}

_MARGIN = dict(left=72, right=18, top=44, bottom=52)


@dataclass
class PlotConfig:
    title: str = "Spectral condition number plot"
    width: int = 900
    height: int = 600
    vertical_marks: list = field(default_factory=list)
    show_aids: bool = False
    y_clip: float = None

    def validate(self, grid):
        if self.width <= 0 or self.height <= 0:
            raise InvalidInput("plot width and height must be positive")
        for lam, _ in self.vertical_marks:
            if not grid.lambda_min <= lam <= grid.lambda_max:
                raise InvalidInput(
                    f"mark {lam!r} outside the plotted domain [{grid.lambda_min!r}, {grid.lambda_max!r}]"
                )


def nice_ticks(lo, hi, target=6):
    """Round tick positions covering ``[lo, hi]``."""
    if not hi > lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(target - 1, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    first = math.ceil(lo / step - 1e-9) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t = first + len(ticks) * step
    return ticks


def _fmt(v):
    return f"{v:.2f}"


def _label(v):
    return f"{v:.4g}"


class _Panel:
    def __init__(self, x0, width, height, xlim, ylim):
        self.x0 = x0
        self.left = x0 + _MARGIN["left"]
        self.right = x0 + width - _MARGIN["right"]
        self.top = _MARGIN["top"]
        self.bottom = height - _MARGIN["bottom"]
        self.xlim = xlim
        lo, hi = ylim
        if not hi > lo:
            pad = max(abs(lo) * 0.05, 0.5)
            lo, hi = lo - pad, hi + pad
        self.ylim = (lo, hi)

    def sx(self, x):
        lo, hi = self.xlim
        return self.left + (x - lo) / (hi - lo) * (self.right - self.left)

    def sy(self, y):
        lo, hi = self.ylim
        return self.bottom - (y - lo) / (hi - lo) * (self.bottom - self.top)

    def frame(self, title, xlabel, ylabel):
        out = [
            f'<rect x="{_fmt(self.left)}" y="{_fmt(self.top)}" width="{_fmt(self.right - self.left)}" '
            f'height="{_fmt(self.bottom - self.top)}" fill="none" stroke="#000"/>'
        ]
        for t in nice_ticks(*self.xlim):
            if self.xlim[0] - 1e-12 <= t <= self.xlim[1] + 1e-12:
                x = _fmt(self.sx(t))
                out.append(f'<line x1="{x}" y1="{_fmt(self.bottom)}" x2="{x}" y2="{_fmt(self.bottom + 5)}" stroke="#000"/>')
                out.append(f'<text x="{x}" y="{_fmt(self.bottom + 18)}" text-anchor="middle">{_label(t)}</text>')
        for t in nice_ticks(*self.ylim):
            if self.ylim[0] - 1e-12 <= t <= self.ylim[1] + 1e-12:
                y = _fmt(self.sy(t))
                out.append(f'<line x1="{_fmt(self.left - 5)}" y1="{y}" x2="{_fmt(self.left)}" y2="{y}" stroke="#000"/>')
                out.append(f'<text x="{_fmt(self.left - 8)}" y="{y}" text-anchor="end" dominant-baseline="middle">{_label(t)}</text>')
        cx = _fmt(0.5 * (self.left + self.right))
        out.append(f'<text x="{cx}" y="{_fmt(self.bottom + 40)}" text-anchor="middle">{escape(xlabel)}</text>')
        cy = _fmt(0.5 * (self.top + self.bottom))
        lx = _fmt(self.x0 + 16)
        out.append(
            f'<text x="{lx}" y="{cy}" text-anchor="middle" transform="rotate(-90 {lx} {cy})">{escape(ylabel)}</text>'
        )
        out.append(f'<text x="{cx}" y="{_fmt(self.top - 14)}" text-anchor="middle" font-weight="bold">{escape(title)}</text>')
        return out

    def polyline(self, xs, ys, ident, color):
        pts = " ".join(f"{_fmt(self.sx(x))},{_fmt(self.sy(y))}" for x, y in zip(xs, ys))
        return f'<polyline id="{ident}" points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'

    def vline(self, x, color, css, dashed=False):
        sx = _fmt(self.sx(x))
        dash = ' stroke-dasharray="6,4"' if dashed else ""
        return (
            f'<line class="{css}" x1="{sx}" y1="{_fmt(self.top)}" x2="{sx}" y2="{_fmt(self.bottom)}" '
            f'stroke="{color}" stroke-width="1.5"{dash}/>'
        )


def _finite_range(values):
    v = np.asarray(values, dtype=float)
    v = v[np.isfinite(v)]
    if v.size == 0:
        return 0.0, 1.0
    return float(v.min()), float(v.max())


def render_svg(path, config=None):
    """Render a :class:`~ridgecond.condpath.ConditionPath` as an SVG document string.

    The condition number curve is the polyline with id ``cond-path`` and holds one
    point per finite grid value. Infinite values are drawn as ``circle`` elements of
    class ``clipped`` at ``y_clip`` (default: ten times the largest finite value).
    With ``show_aids`` two further panels show digit loss (``digits-path``) and
    acceleration (``accel-path``).
    """
    config = config or PlotConfig()
    grid = path.grid
    config.validate(grid)
    cond = np.asarray(path.cond, dtype=float)
    lnl = np.log(grid.values)
    xlim = (float(lnl[0]), float(lnl[-1]))
    aids = config.show_aids and path.digits_lost is not None and path.acceleration is not None
    npanel = 3 if aids else 1
    pw = config.width / npanel

    finite = np.isfinite(cond)
    lo, hi = _finite_range(cond)
    y_clip = config.y_clip
    if y_clip is None:
        y_clip = 10.0 * hi
    top = y_clip if (not finite.all() or hi > y_clip) else hi
    ylabel = "spectral condition number" if path.norm.value == 2 else "l1 condition number"

    body = []
    marks = []
    if path.knee is not None:
        marks.append((path.knee[0], MARK_COLORS["knee"], "knee", True))
    for lam, color in config.vertical_marks:
        marks.append((lam, MARK_COLORS.get(color, color), "mark", False))

    panel = _Panel(0.0, pw, config.height, xlim, (min(lo, top), top))
    body += panel.frame(config.title, "ln(penalty)", ylabel)
    body.append(panel.polyline(lnl[finite], np.minimum(cond[finite], top), "cond-path", "#1f77b4"))
    for x in lnl[~finite]:
        body.append(
            f'<circle class="clipped" cx="{_fmt(panel.sx(x))}" cy="{_fmt(panel.sy(top))}" r="3" '
            'fill="none" stroke="#d62728"/>'
        )
    body += [panel.vline(math.log(lam), color, css, dashed) for lam, color, css, dashed in marks]

    if aids:
        digits = np.asarray(path.digits_lost, dtype=float)
        ok = digits >= 0
        dpanel = _Panel(pw, pw, config.height, xlim, _finite_range(digits[ok]))
        body += dpanel.frame("Digit loss", "ln(penalty)", "floor(log10 condition)")
        body.append(dpanel.polyline(lnl[ok], digits[ok], "digits-path", "#ff7f0e"))
        body += [dpanel.vline(math.log(lam), color, css, dashed) for lam, color, css, dashed in marks]
        acc = np.asarray(path.acceleration, dtype=float)
        ok = np.isfinite(acc)
        apanel = _Panel(2 * pw, pw, config.height, xlim, _finite_range(acc[ok]))
        body += apanel.frame("Acceleration", "ln(penalty)", "second derivative")
        body.append(apanel.polyline(lnl[1:-1][ok], acc[ok], "accel-path", "#9467bd"))
        body += [apanel.vline(math.log(lam), color, css, dashed) for lam, color, css, dashed in marks]

    head = (
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{config.width}" '
        f'height="{config.height}" viewBox="0 0 {config.width} {config.height}" '
        'font-family="sans-serif" font-size="12">\n'
        f"<title>{escape(config.title)}</title>\n"
        f'<rect width="{config.width}" height="{config.height}" fill="#fff"/>\n'
    )
    return head + "\n".join(body) + "\n</svg>\n"


def write_svg(filename, path, config=None):
    text = render_svg(path, config)
    with open(filename, "w", encoding="utf-8") as fh:
        fh.write(text)
    return filename


