"""Deterministic CSV / JSON / SVG writers and config loading."""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import jsonschema

from .errors import ConfigError
from .prob import Channel, Distribution, DistortionMatrix

NUM_FMT = "%.9g"


def fmt(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return NUM_FMT % v
    return str(v)


def rounded(obj):
    """Round floats in nested JSON data to 9 significant digits."""
    if isinstance(obj, float):
        if math.isnan(obj) or math.isinf(obj):
            return str(obj)
        return float(NUM_FMT % obj)
    if isinstance(obj, dict):
        return {k: rounded(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [rounded(v) for v in obj]
    return obj


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def json_text(obj) -> str:
    return json.dumps(rounded(obj), indent=2, sort_keys=True) + "\n"


def rd_curve_csv(points) -> str:
    return csv_text(["slope", "rate", "distortion"], ((p.slope, p.rate, p.distortion) for p in points))


def svg_polyline(series: dict, xlabel: str, ylabel: str, width=480, height=320, ticks=5) -> str:
    """Line plot of ``{name: [(x, y), ...]}``; NaN points break a line."""
    pad = 48
    pts = [(x, y) for s in series.values() for x, y in s if not (math.isnan(x) or math.isnan(y))]
    if pts:
        x0, x1 = min(p[0] for p in pts), max(p[0] for p in pts)
        y0, y1 = min(0.0, min(p[1] for p in pts)), max(p[1] for p in pts)
    else:
        x0, x1, y0, y1 = 0.0, 1.0, 0.0, 1.0
    x1 = x1 if x1 > x0 else x0 + 1.0
    y1 = y1 if y1 > y0 else y0 + 1.0

    def sx(x):
        return pad + (x - x0) / (x1 - x0) * (width - 2 * pad)

    def sy(y):
        return height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
    ]
    for i in range(ticks + 1):
        xv = x0 + (x1 - x0) * i / ticks
        yv = y0 + (y1 - y0) * i / ticks
        out.append(f'<text x="{sx(xv):.2f}" y="{height - pad + 16}" font-size="10" '
                   f'text-anchor="middle">{xv:.3g}</text>')
        out.append(f'<text x="{pad - 6}" y="{sy(yv) + 3:.2f}" font-size="10" '
                   f'text-anchor="end">{yv:.3g}</text>')
    out.append(f'<text x="{width / 2:.1f}" y="{height - 8}" font-size="12" '
               f'text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="14" y="{height / 2:.1f}" font-size="12" text-anchor="middle" '
               f'transform="rotate(-90 14 {height / 2:.1f})">{ylabel}</text>')
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"]
    for c, (name, s) in enumerate(series.items()):
        seg: list = []
        segs = []
        for x, y in s:
            if math.isnan(x) or math.isnan(y):
                if seg:
                    segs.append(seg)
                seg = []
            else:
                seg.append(f"{sx(x):.2f},{sy(y):.2f}")
        if seg:
            segs.append(seg)
        for sg in segs:
            out.append(f'<polyline fill="none" stroke="{colors[c % len(colors)]}" '
                       f'stroke-width="1.5" points="{" ".join(sg)}"><title>{name}</title></polyline>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


# --- config ------------------------------------------------------------------

DIST_SCHEMA = {
    "type": "object",
    "required": ["mass"],
    "properties": {
        "alphabet": {"type": "integer", "minimum": 1},
        "mass": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1},
    },
}
MATRIX_SCHEMA = {
    "oneOf": [
        {"type": "string", "enum": ["hamming"]},
        {
            "type": "object",
            "required": ["mass"],
            "properties": {
                "rows": {"type": "integer", "minimum": 1},
                "cols": {"type": "integer", "minimum": 1},
                "mass": {"type": "array", "minItems": 1},
            },
        },
    ]
}
SEED = {"type": "integer", "minimum": 0, "maximum": (1 << 64) - 1}
RATE = {"type": "number", "minimum": 0}
GRID = {
    "oneOf": [
        {"type": "array", "items": {"type": "number"}},
        {
            "type": "object",
            "required": ["start", "stop", "num"],
            "properties": {"start": {"type": "number"}, "stop": {"type": "number"},
                           "num": {"type": "integer", "minimum": 1}},
        },
    ]
}


def validate(obj, schema, what="config"):
    try:
        jsonschema.validate(obj, schema)
    except jsonschema.ValidationError as exc:
        loc = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{what}: {loc}: {exc.message}") from None


def load_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None


def parse_distribution(obj) -> Distribution:
    try:
        return Distribution.from_json(obj)
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"bad distribution: {exc}") from None


def parse_distortion(obj, nx: int, nz: int | None = None) -> DistortionMatrix:
    try:
        if obj == "hamming":
            return DistortionMatrix.hamming(nx, nz)
        m = DistortionMatrix.from_json(obj)
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"bad distortion matrix: {exc}") from None
    if m.source_alphabet != nx:
        raise ConfigError("distortion rows must match the source alphabet")
    return m


def parse_channel(obj) -> Channel:
    try:
        if isinstance(obj, dict) and "bsc" in obj:
            return Channel.bsc(float(obj["bsc"]))
        return Channel.from_json(obj)
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"bad channel: {exc}") from None


def expand_grid(g) -> list[float]:
    if isinstance(g, dict):
        num = int(g["num"])
        if num == 1:
            return [float(g["start"])]
        step = (g["stop"] - g["start"]) / (num - 1)
        return [float(g["start"] + i * step) for i in range(num)]
    return [float(v) for v in g]
