"""Minimal static SVG line charts (no plotting dependency)."""
from __future__ import annotations

import math
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 800, 600
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 80, 150, 50, 70


def nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    """Round tick positions covering ``[lo, hi]``."""
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / target
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    first = math.ceil(lo / step - 1e-9) * step
    ticks = []
    k = 0
    while first + k * step <= hi + 1e-9 * step:
        ticks.append(round(first + k * step, 12))
        k += 1
    return ticks


def _color(k: int, n: int) -> str:
    # blue for the first curve to red for the last
    s = 0.0 if n <= 1 else k / (n - 1)
    r, g, b = int(30 + 200 * s), int(80 - 40 * s), int(200 - 170 * s)
    return f"#{r:02x}{g:02x}{b:02x}"


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def line_chart(curves, title: str = "", x_label: str = "", y_label: str = "",
               reference_y: float | None = None, curve_attr: str = "label") -> str:
    """Render ``curves`` (an iterable of ``(label, xs, ys)``) as one polyline each.

    Axes are linear; the y-range is widened to include ``reference_y``, which
    is drawn as a dashed horizontal line. Each polyline carries its label in
    a ``data-<curve_attr>`` attribute.
    """
    curves = [(label, list(map(float, xs)), list(map(float, ys))) for label, xs, ys in curves]
    all_x = [x for _, xs, _ in curves for x in xs]
    all_y = [y for _, _, ys in curves for y in ys]
    if reference_y is not None:
        all_y.append(reference_y)
    x_lo, x_hi = (min(all_x), max(all_x)) if all_x else (0.0, 1.0)
    y_lo, y_hi = (min(all_y), max(all_y)) if all_y else (0.0, 1.0)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi == y_lo:
        pad = 0.05 * abs(y_lo) or 0.5
        y_lo, y_hi = y_lo - pad, y_hi + pad
    else:
        pad = 0.05 * (y_hi - y_lo)
        y_lo, y_hi = y_lo - pad, y_hi + pad

    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def sx(x):
        return MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w

    def sy(y):
        return MARGIN_TOP + (y_hi - y) / (y_hi - y_lo) * plot_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{WIDTH / 2}" y="25" text-anchor="middle" font-size="16">'
                   f'{escape(title)}</text>')

    x0, x1 = MARGIN_LEFT, MARGIN_LEFT + plot_w
    y0, y1 = MARGIN_TOP + plot_h, MARGIN_TOP
    out.append(f'<g class="axes" stroke="black" stroke-width="1">'
               f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}"/>'
               f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/></g>')
    for t in nice_ticks(x_lo, x_hi):
        px = sx(t)
        out.append(f'<line class="xtick" x1="{px:.2f}" y1="{y0}" x2="{px:.2f}" y2="{y0 + 5}" stroke="black"/>'
                   f'<text x="{px:.2f}" y="{y0 + 20}" text-anchor="middle">{_fmt(t)}</text>')
    for t in nice_ticks(y_lo, y_hi):
        py = sy(t)
        out.append(f'<line class="ytick" x1="{x0 - 5}" y1="{py:.2f}" x2="{x0}" y2="{py:.2f}" stroke="black"/>'
                   f'<text x="{x0 - 8}" y="{py + 4:.2f}" text-anchor="end">{_fmt(t)}</text>')
    if x_label:
        out.append(f'<text x="{MARGIN_LEFT + plot_w / 2}" y="{HEIGHT - 25}" '
                   f'text-anchor="middle">{escape(x_label)}</text>')
    if y_label:
        cy = MARGIN_TOP + plot_h / 2
        out.append(f'<text x="20" y="{cy}" text-anchor="middle" '
                   f'transform="rotate(-90 20 {cy})">{escape(y_label)}</text>')

    if reference_y is not None:
        py = sy(reference_y)
        out.append(f'<line class="reference" x1="{x0}" y1="{py:.2f}" x2="{x1}" y2="{py:.2f}" '
                   f'stroke="gray" stroke-dasharray="6,4" data-y="{_fmt(reference_y)}"/>')

    n = len(curves)
    for k, (label, xs, ys) in enumerate(curves):
        pts = " ".join(f"{sx(x):.3f},{sy(y):.3f}" for x, y in zip(xs, ys))
        color = _color(k, n)
        out.append(f'<polyline class="curve" data-{curve_attr}="{escape(str(label))}" '
                   f'fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = MARGIN_TOP + 10 + 16 * k
        if ly < HEIGHT - MARGIN_BOTTOM:
            lx = WIDTH - MARGIN_RIGHT + 15
            out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{color}" stroke-width="2"/>'
                       f'<text x="{lx + 26}" y="{ly + 4}">{escape(curve_attr)}={escape(str(label))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
