"""Static heatmap rendering of per-cell results: SVG plus the raw CSV grid.

One rectangle per grid cell; occupied cells get a distinct mask color. No
interactive plotting: these maps are result displays, not controls.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

from .drf import apply_strategy
from .errors import ValidationError
from .scenario import ReportDocument

METRICS = ("baseline", "opt1", "opt2", "opt3", "gain_nlos", "gain_los", "min_nlos")

# Handful of viridis anchor colors, linearly interpolated.
_PALETTE = (
    (68, 1, 84), (72, 36, 117), (65, 68, 135), (53, 95, 141), (42, 120, 142),
    (33, 144, 141), (34, 168, 132), (66, 190, 113), (122, 209, 81),
    (189, 223, 38), (253, 231, 37),
)
_MASK_COLOR = "#9e9e9e"


@dataclass(frozen=True)
class HeatmapData:
    nx: int
    ny: int
    cell_dx: float
    cell_dy: float
    values: dict[int, float]  # cell index -> metric value (free cells only)
    occupied: frozenset[int]
    vmin: float
    vmax: float
    metric: str


def heatmap_from_report(doc: ReportDocument, rx_id: str, metric: str) -> HeatmapData:
    """Per-cell scalar for one receiver: a strategy's selected PL or a gain."""
    if metric not in METRICS:
        raise ValidationError(f"unknown metric {metric!r} (choices: {METRICS})")
    evaluation = next(
        (ev for ev in doc.report.evaluations if ev.rx_id == rx_id), None
    )
    if evaluation is None:
        raise ValidationError(f"report has no receiver {rx_id!r}", kind="reference")
    records = list(evaluation.records)

    values: dict[int, float] = {}
    if metric in ("baseline", "opt1", "opt2", "opt3"):
        for sel in apply_strategy(records, metric):
            if sel.pl_db is not None:
                values[sel.cell_index] = sel.pl_db
    elif metric == "min_nlos":
        for r in records:
            if r.min_nlos is not None:
                values[r.cell_index] = r.min_nlos
    else:
        gains = "snr_gain_nlos" if metric == "gain_nlos" else "snr_gain_los"
        for r in records:
            if r.best_ris is not None:
                g = getattr(r, gains)[r.best_ris]
                if g is not None:
                    values[r.cell_index] = g

    finite = [v for v in values.values() if math.isfinite(v)]
    vmin = min(finite) if finite else 0.0
    vmax = max(finite) if finite else 1.0
    return HeatmapData(
        nx=doc.grid["nx"],
        ny=doc.grid["ny"],
        cell_dx=doc.grid["cell_dx"],
        cell_dy=doc.grid["cell_dy"],
        values=values,
        occupied=frozenset(doc.grid["occupied"]),
        vmin=vmin,
        vmax=vmax,
        metric=metric,
    )


def _color(t: float) -> str:
    t = min(max(t, 0.0), 1.0)
    pos = t * (len(_PALETTE) - 1)
    i = min(int(pos), len(_PALETTE) - 2)
    frac = pos - i
    r, g, b = (
        round(a + (b_ - a) * frac) for a, b_ in zip(_PALETTE[i], _PALETTE[i + 1])
    )
    return f"#{r:02x}{g:02x}{b:02x}"


def render_svg(data: HeatmapData, cell_px: float = 12.0) -> str:
    """Room-plan SVG; y axis points up, so grid row 0 is drawn at the bottom."""
    aspect = data.cell_dy / data.cell_dx
    w_px, h_px = cell_px, cell_px * aspect
    width = data.nx * w_px
    height = data.ny * h_px
    legend_h = 28.0
    span = data.vmax - data.vmin
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" '
        f'height="{height + legend_h:.0f}" viewBox="0 0 {width:.0f} {height + legend_h:.0f}">',
        f'<rect width="{width:.0f}" height="{height:.0f}" fill="#ffffff"/>',
    ]
    for iy in range(data.ny):
        for ix in range(data.nx):
            i = iy * data.nx + ix
            x = ix * w_px
            y = (data.ny - 1 - iy) * h_px
            if i in data.occupied:
                fill = _MASK_COLOR
            elif i in data.values and math.isfinite(data.values[i]):
                t = 0.5 if span == 0 else (data.values[i] - data.vmin) / span
                fill = _color(t)
            else:
                continue
            parts.append(
                f'<rect x="{x:.1f}" y="{y:.1f}" width="{w_px:.1f}" height="{h_px:.1f}" '
                f'fill="{fill}"/>'
            )
    parts.append(
        f'<text x="2" y="{height + 18:.0f}" font-family="monospace" font-size="12">'
        f"{data.metric}: {data.vmin:.2f} .. {data.vmax:.2f} dB "
        f"(mask = occupied)</text>"
    )
    parts.append("</svg>")
    return "\n".join(parts)


def grid_csv(data: HeatmapData) -> str:
    """Underlying per-cell grid: one row per cell with the metric value."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["i", "ix", "iy", "x", "y", "occupied", "value"])
    for iy in range(data.ny):
        for ix in range(data.nx):
            i = iy * data.nx + ix
            occupied = i in data.occupied
            value = data.values.get(i)
            writer.writerow(
                [
                    i,
                    ix,
                    iy,
                    f"{(ix + 0.5) * data.cell_dx:.3f}",
                    f"{(iy + 0.5) * data.cell_dy:.3f}",
                    "1" if occupied else "0",
                    "" if value is None else f"{value:.6f}",
                ]
            )
    return buf.getvalue()
