"""Deterministic SVG rendering of a scenario and a trajectory."""
from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

WORKSPACE = 15.0
SCALE = 40.0  # pixels per metre

COLORS = {
    "obstacle": "#9e9e9e",
    "goal": "#4caf50",
    "target": "#2196f3",
    "key": "#2196f3",
    "door": "#e53935",
}
# many-target groups get one colour each
GROUP_COLORS = ["#e53935", "#4caf50", "#2196f3", "#fb8c00", "#8e24aa"]


def _px(v: float) -> str:
    return f"{v * SCALE:.2f}"


def _py(v: float) -> str:
    return f"{(WORKSPACE - v) * SCALE:.2f}"


def _color(name: str, kind: str) -> str:
    if kind == "target" and "_" in name:
        group = name[1:].split("_")[0]
        if group.isdigit():
            return GROUP_COLORS[(int(group) - 1) % len(GROUP_COLORS)]
    return COLORS.get(kind, "#607d8b")


def svg_text(scenario, trajectory=None) -> str:
    size = WORKSPACE * SCALE
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size:.0f}" height="{size:.0f}" '
        f'viewBox="0 0 {size:.0f} {size:.0f}">',
        f'<rect x="0" y="0" width="{size:.0f}" height="{size:.0f}" fill="white" stroke="black"/>',
    ]
    for name in sorted(scenario.regions):
        (x0, x1), (y0, y1) = scenario.regions[name].bounds[:2]
        kind = scenario.kinds.get(name, "region")
        out.append(
            f'<rect x="{_px(x0)}" y="{_py(y1)}" width="{_px(x1 - x0)}" height="{_px(y1 - y0)}" '
            f'fill="{_color(name, kind)}" fill-opacity="0.5" stroke="black" stroke-width="1">'
            f'<title>{escape(name)}</title></rect>')
        out.append(f'<text x="{_px((x0 + x1) / 2)}" y="{_py((y0 + y1) / 2)}" font-size="12" '
                   f'text-anchor="middle" dominant-baseline="middle">{escape(name)}</text>')
    y = None if trajectory is None else np.asarray(trajectory.y, dtype=float)
    if y is not None and y.size:
        pts = " ".join(f"{_px(p[0])},{_py(p[1])}" for p in y)
        out.append(f'<polyline points="{pts}" fill="none" stroke="black" stroke-width="2"/>')
        for p in y:
            out.append(f'<circle cx="{_px(p[0])}" cy="{_py(p[1])}" r="3" fill="black"/>')
        sx, sy = y[0]
        out.append(f'<circle cx="{_px(sx)}" cy="{_py(sy)}" r="7" fill="none" stroke="black" '
                   f'stroke-width="2"><title>start</title></circle>')
        ex, ey = y[-1]
        out.append(f'<rect x="{float(_px(ex)) - 6:.2f}" y="{float(_py(ey)) - 6:.2f}" width="12" '
                   f'height="12" fill="none" stroke="black" stroke-width="2"><title>end</title></rect>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def plot_trajectory(scenario, trajectory, path) -> Path:
    """Write the workspace, its regions and (if given) the trajectory as SVG."""
    path = Path(path)
    path.write_text(svg_text(scenario, trajectory))
    return path
