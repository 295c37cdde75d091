"""Self-contained SVG rendering of a momentum trace.

No plotting dependency: the chart is assembled as an SVG string with one
polyline for the normalized momentum, one vertical marker line per true
change point (class "truth") and per detection event (class "event").
"""

from __future__ import annotations

from typing import Sequence

from .engine import DetectionEvent, TraceRecord
from .errors import ValidationError


def render_trace_svg(
    records: Sequence[TraceRecord],
    change_points: Sequence[int] = (),
    events: Sequence[DetectionEvent] = (),
    *,
    width: int = 1000,
    height: int = 320,
) -> str:
    """Render the alpha_bar trace with truth/detection markers as SVG."""
    if not records:
        raise ValidationError("cannot plot an empty trace")
    t_max = records[-1].t
    for e in events:
        if e.t < records[0].t or e.t > t_max:
            raise ValidationError(f"event at t={e.t} lies outside the trace range [0, {t_max}]")

    margin_l, margin_r, margin_t, margin_b = 56, 16, 16, 40
    plot_w = width - margin_l - margin_r
    plot_h = height - margin_t - margin_b
    span = max(t_max - records[0].t, 1)

    def x(t: float) -> float:
        return margin_l + plot_w * (t - records[0].t) / span

    def y(v: float) -> float:
        return margin_t + plot_h * (1.0 - min(max(v, 0.0), 1.0))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}"'
        f' viewBox="0 0 {width} {height}">',
        '<style>.alpha{fill:none;stroke:#1f77b4;stroke-width:1}'
        ".truth{stroke:#888;stroke-width:1;stroke-dasharray:4 3}"
        ".event{stroke:#d62728;stroke-width:1.5}"
        ".axis{stroke:#000;stroke-width:1}"
        "text{font-family:sans-serif;font-size:11px;fill:#333}</style>",
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    y0, y1 = y(0.0), y(1.0)
    for cp in change_points:
        cx = x(cp)
        parts.append(f'<line class="truth" x1="{cx:.2f}" y1="{y1:.2f}" x2="{cx:.2f}" y2="{y0:.2f}"/>')
    for e in events:
        ex = x(e.t)
        parts.append(f'<line class="event" x1="{ex:.2f}" y1="{y1:.2f}" x2="{ex:.2f}" y2="{y0:.2f}"/>')
    points = " ".join(f"{x(r.t):.2f},{y(r.alpha_bar):.2f}" for r in records)
    parts.append(f'<polyline class="alpha" points="{points}"/>')
    parts.append(
        f'<line class="axis" x1="{margin_l}" y1="{y0:.2f}" x2="{width - margin_r}" y2="{y0:.2f}"/>'
    )
    parts.append(f'<line class="axis" x1="{margin_l}" y1="{y1:.2f}" x2="{margin_l}" y2="{y0:.2f}"/>')
    for v in (0.0, 0.5, 1.0):
        parts.append(f'<text x="{margin_l - 34}" y="{y(v) + 4:.2f}">{v:.1f}</text>')
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        t = records[0].t + round(frac * span)
        parts.append(f'<text x="{x(t) - 8:.2f}" y="{height - 14}">{t}</text>')
    parts.append(
        f'<text x="{margin_l}" y="{height - 2}">normalized momentum vs batch index'
        f" ({len(change_points)} true changes, {len(events)} detections)</text>"
    )
    parts.append("</svg>")
    return "\n".join(parts)
