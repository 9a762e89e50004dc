"""Deterministic SVG figures: projection scatter and residual heatmap.

Hand-rolled markup so identical inputs always produce byte-identical
files (golden-file friendly). Marker fill encodes the cluster via a
fixed 14-color palette; marker shape encodes the zone via a fixed
8-shape set.
"""

from __future__ import annotations

import math

# 14 cluster colors; clusters beyond 14 wrap around
PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#aec7e8", "#ffbb78",
    "#98df8a", "#ff9896",
)

# 8 marker shapes, aligned with the zone enumeration order
SHAPES = ("circle", "square", "diamond", "triangle_up", "triangle_down", "plus", "cross", "star")

_NEG = (0x21, 0x66, 0xAC)
_MID = (0xF7, 0xF7, 0xF7)
_POS = (0xB2, 0x18, 0x2B)


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _lerp(a, b, t):
    return tuple(round(x + (y - x) * t) for x, y in zip(a, b))


def diverging_color(value: float, vmax: float) -> str:
    """Blue-white-red scale centred at zero, saturating at +-vmax."""
    t = max(-1.0, min(1.0, value / vmax))
    rgb = _lerp(_MID, _NEG, -t) if t < 0 else _lerp(_MID, _POS, t)
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def marker_path(shape: str, cx: float, cy: float, r: float, fill: str, title: str = "",
                css_class: str = "marker") -> str:
    """One scatter marker as SVG markup; data markers carry class="marker"."""
    t = f"<title>{title}</title>" if title else ""
    common = f'class="{css_class}" fill="{fill}" stroke="#333333" stroke-width="0.8"'
    if shape == "circle":
        return f'<circle {common} cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(r)}">{t}</circle>'
    if shape == "square":
        return (
            f'<rect {common} x="{_fmt(cx - r)}" y="{_fmt(cy - r)}" '
            f'width="{_fmt(2 * r)}" height="{_fmt(2 * r)}">{t}</rect>'
        )
    if shape == "diamond":
        pts = [(cx, cy - r), (cx + r, cy), (cx, cy + r), (cx - r, cy)]
    elif shape == "triangle_up":
        pts = [(cx, cy - r), (cx + r, cy + r), (cx - r, cy + r)]
    elif shape == "triangle_down":
        pts = [(cx - r, cy - r), (cx + r, cy - r), (cx, cy + r)]
    elif shape == "plus":
        h = r / 2.6
        pts = [
            (cx - h, cy - r), (cx + h, cy - r), (cx + h, cy - h), (cx + r, cy - h),
            (cx + r, cy + h), (cx + h, cy + h), (cx + h, cy + r), (cx - h, cy + r),
            (cx - h, cy + h), (cx - r, cy + h), (cx - r, cy - h), (cx - h, cy - h),
        ]
    elif shape == "cross":
        h = r / 2.6
        d = r / math.sqrt(2.0)
        pts = []
        for angle in range(8):
            theta = math.pi / 4 * angle + math.pi / 8
            radius = d if angle % 2 == 0 else h
            pts.append((cx + radius * math.cos(theta), cy + radius * math.sin(theta)))
    elif shape == "star":
        pts = []
        for i in range(10):
            radius = r if i % 2 == 0 else r * 0.45
            theta = -math.pi / 2 + i * math.pi / 5
            pts.append((cx + radius * math.cos(theta), cy + radius * math.sin(theta)))
    else:
        raise ValueError(f"unknown marker shape: {shape!r}")
    path = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in pts)
    return f'<polygon {common} points="{path}">{t}</polygon>'


def _svg_open(width: int, height: int) -> str:
    return (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="Helvetica, Arial, sans-serif">\n'
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>\n'
    )


def scatter_svg(rows, zone_names, cluster_names=None) -> str:
    """Scatter of projected countries.

    ``rows`` holds (country, x, y, cluster, zone_index) tuples; a zone
    index of None (a row without a zone, e.g. GLOBAL) falls back to the
    first shape and stays out of the zone legend. ``zone_names`` maps
    zone index to display name; ``cluster_names`` optionally attaches a
    free-text label per cluster in the legend.
    """
    rows = list(rows)
    if not rows:
        raise ValueError("no rows to plot")
    plot_w, plot_h, pad = 520, 460, 40
    clusters = sorted({r[3] for r in rows})
    present_zones = sorted({r[4] for r in rows if r[4] is not None})
    legend_h = 18 * (len(clusters) + len(present_zones)) + 110
    width = plot_w + 260
    height = max(plot_h + 2 * pad, legend_h)

    xs = [r[1] for r in rows]
    ys = [r[2] for r in rows]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    x_span = (x_hi - x_lo) or 1.0
    y_span = (y_hi - y_lo) or 1.0

    def to_canvas(x, y):
        cx = pad + (x - x_lo) / x_span * plot_w
        cy = pad + (y_hi - y) / y_span * plot_h
        return cx, cy

    parts = [_svg_open(width, height)]
    parts.append(
        f'<rect x="{pad}" y="{pad}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="#cccccc" stroke-width="1"/>\n'
    )
    for country, x, y, cluster, zone_idx in rows:
        cx, cy = to_canvas(x, y)
        fill = PALETTE[cluster % len(PALETTE)]
        shape = SHAPES[zone_idx % len(SHAPES)] if zone_idx is not None else SHAPES[0]
        parts.append(marker_path(shape, cx, cy, 6.0, fill, title=country) + "\n")

    lx = plot_w + 2 * pad
    ly = pad
    parts.append(f'<text x="{lx}" y="{ly}" font-size="12" font-weight="bold">Clusters</text>\n')
    ly += 8
    for cluster in clusters:
        ly += 18
        fill = PALETTE[cluster % len(PALETTE)]
        parts.append(f'<rect x="{lx}" y="{ly - 9}" width="11" height="11" fill="{fill}"/>\n')
        name = f"cluster {cluster}"
        if cluster_names and cluster in cluster_names:
            name += f": {cluster_names[cluster]}"
        parts.append(f'<text x="{lx + 17}" y="{ly}" font-size="11">{name}</text>\n')
    ly += 30
    parts.append(f'<text x="{lx}" y="{ly}" font-size="12" font-weight="bold">Zones</text>\n')
    ly += 8
    for zone_idx in present_zones:
        ly += 18
        shape = SHAPES[zone_idx % len(SHAPES)]
        parts.append(marker_path(shape, lx + 5.5, ly - 4, 5.5, "#bbbbbb", css_class="legend-marker"))
        parts.append(f'\n<text x="{lx + 17}" y="{ly}" font-size="11">{zone_names[zone_idx]}</text>\n')
    parts.append("</svg>\n")
    return "".join(parts)


def residual_heatmap_svg(residuals, row_labels, col_labels, threshold: float) -> str:
    """Grid of standardized residuals, outlined where |value| > threshold."""
    rows = len(row_labels)
    cols = len(col_labels)
    if rows == 0 or cols == 0:
        raise ValueError("empty residual matrix")
    cell_w, cell_h = 104, 36
    left, top = 110, 70
    width = left + cols * cell_w + 30
    height = top + rows * cell_h + 30
    flat = [abs(residuals[i][j]) for i in range(rows) for j in range(cols)]
    vmax = max(max(flat), threshold, 1e-12)

    parts = [_svg_open(width, height)]
    for j, label in enumerate(col_labels):
        x = left + j * cell_w + cell_w / 2
        parts.append(
            f'<text x="{_fmt(x)}" y="{top - 12}" font-size="11" text-anchor="middle">{label}</text>\n'
        )
    for i, label in enumerate(row_labels):
        y = top + i * cell_h + cell_h / 2 + 4
        parts.append(
            f'<text x="{left - 10}" y="{_fmt(y)}" font-size="11" text-anchor="end">{label}</text>\n'
        )
    for i in range(rows):
        for j in range(cols):
            value = residuals[i][j]
            x = left + j * cell_w
            y = top + i * cell_h
            fill = diverging_color(value, vmax)
            parts.append(
                f'<rect class="cell" x="{x}" y="{y}" width="{cell_w}" height="{cell_h}" '
                f'fill="{fill}" stroke="#dddddd" stroke-width="0.5"/>\n'
            )
            if abs(value) > threshold:
                parts.append(
                    f'<rect class="outline" x="{x + 1.5}" y="{y + 1.5}" '
                    f'width="{cell_w - 3}" height="{cell_h - 3}" '
                    'fill="none" stroke="#000000" stroke-width="2"/>\n'
                )
            luminance = 0.0 if abs(value) < 0.62 * vmax else 1.0
            color = "#000000" if luminance == 0.0 else "#ffffff"
            parts.append(
                f'<text x="{_fmt(x + cell_w / 2)}" y="{_fmt(y + cell_h / 2 + 4)}" '
                f'font-size="11" text-anchor="middle" fill="{color}">{_fmt(value)}</text>\n'
            )
    parts.append("</svg>\n")
    return "".join(parts)
