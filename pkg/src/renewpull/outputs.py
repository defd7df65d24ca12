"""Deterministic result-file writers: CSV with a metadata header line,
GeoJSON feature collections, and a dependency-free SVG bar chart.

Output bytes depend only on the data; timestamps belong in the run log,
never in result files.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Mapping, Sequence


def fmt(value) -> str:
    if isinstance(value, float):
        if value != value:  # NaN
            return ""
        return format(value, ".12g")
    if value is None:
        return ""
    return str(value)


def write_csv(
    path: str | Path,
    columns: Sequence[str],
    rows: Iterable[Sequence],
    meta: Mapping[str, object],
) -> Path:
    """CSV with a leading ``# key=value`` metadata line naming units,
    capital mode, and the run seed."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    meta_line = "# " + " ".join(f"{k}={fmt(v)}" for k, v in meta.items())
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(meta_line + "\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")
    return path


def read_csv(path: str | Path) -> tuple[dict[str, str], list[dict[str, str]]]:
    """Read back a metadata-headed CSV into (meta, row dicts)."""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline().rstrip("\n")
        meta: dict[str, str] = {}
        if first.startswith("#"):
            for token in first.lstrip("#").strip().split():
                key, _, value = token.partition("=")
                meta[key] = value
            header = fh.readline().rstrip("\n").split(",")
        else:
            header = first.split(",")
        rows = []
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            rows.append(dict(zip(header, line.split(","))))
    return meta, rows


def write_geojson(path: str | Path, features: Sequence[dict], meta: Mapping[str, object]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {
        "type": "FeatureCollection",
        "metadata": {k: (fmt(v) if isinstance(v, float) else v) for k, v in meta.items()},
        "features": list(features),
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return path


def point_feature(lon: float | None, lat: float | None, properties: Mapping) -> dict:
    geometry = None
    if lon is not None and lat is not None:
        geometry = {"type": "Point", "coordinates": [round(lon, 6), round(lat, 6)]}
    return {"type": "Feature", "geometry": geometry, "properties": dict(properties)}


def write_svg_bars(
    path: str | Path,
    labels: Sequence[str],
    values: Sequence[float],
    title: str,
    unit: str,
    width: int = 640,
    height: int = 360,
) -> Path:
    """Minimal static bar chart; hand-written so bytes stay reproducible."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n = max(len(values), 1)
    margin = 50
    plot_w = width - 2 * margin
    plot_h = height - 2 * margin
    vmax = max([abs(v) for v in values] + [1e-12])
    bar_w = plot_w / n
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{title}</text>',
        f'<text x="14" y="{height / 2:.1f}" text-anchor="middle" font-size="11" '
        f'transform="rotate(-90 14 {height / 2:.1f})">{unit}</text>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>',
    ]
    for i, (label, value) in enumerate(zip(labels, values)):
        h = plot_h * abs(value) / vmax
        x = margin + i * bar_w + 0.1 * bar_w
        y = height - margin - h
        parts.append(
            f'<rect x="{x:.2f}" y="{y:.2f}" width="{0.8 * bar_w:.2f}" height="{h:.2f}" '
            f'fill="#4477aa"/>'
        )
        parts.append(
            f'<text x="{x + 0.4 * bar_w:.2f}" y="{height - margin + 16}" '
            f'text-anchor="middle" font-size="10">{label}</text>'
        )
        parts.append(
            f'<text x="{x + 0.4 * bar_w:.2f}" y="{y - 4:.2f}" text-anchor="middle" '
            f'font-size="10">{fmt(float(value))}</text>'
        )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(parts) + "\n")
    return path
