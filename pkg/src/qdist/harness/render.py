"""Record CSV format and the log-log SVG plot.

Column order (schema version 1):

``family, param, d_H, alpha, model, algorithm, seed, label, decision,
correct, queries_or_samples, witness_T, cert_ratio, error``

``witness_T`` is the witness objective at the optimal weights,
``cert_ratio`` is ``|G o Delta| / (2 sin alpha)`` of the rotation
certificate (at most 1), and ``error`` is empty unless the row failed.
The file starts with one ``#`` comment carrying the schema version;
comment lines are not CSV records.
"""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path
from typing import Union

SCHEMA_VERSION = 1
SCHEMA_COMMENT = f"# qdist experiment records, schema v{SCHEMA_VERSION}"
COLUMNS = (
    "family", "param", "d_H", "alpha", "model", "algorithm", "seed", "label",
    "decision", "correct", "queries_or_samples", "witness_T", "cert_ratio", "error",
)
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")


def _lines(rows) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def write_header(path: Union[str, Path]) -> None:
    Path(path).write_text(SCHEMA_COMMENT + "\n" + _lines([COLUMNS]))


def append_rows(path: Union[str, Path], rows) -> None:
    with open(path, "a", newline="") as fh:
        fh.write(_lines(rows))
        fh.flush()


def records_to_csv(records) -> str:
    records = list(records)
    if not records:
        raise ValueError("no records to render")
    return SCHEMA_COMMENT + "\n" + _lines([COLUMNS, *([r.get(c, "") for c in COLUMNS] for r in records)])


def write_csv(records, path: Union[str, Path]) -> None:
    Path(path).write_text(records_to_csv(records))


def parse_csv(text: str) -> list:
    lines = text.splitlines()
    if not lines or lines[0] != SCHEMA_COMMENT:
        raise ValueError("missing or unsupported schema comment")
    reader = csv.DictReader(line for line in lines if not line.startswith("#"))
    if tuple(reader.fieldnames or ()) != COLUMNS:
        raise ValueError("unexpected column layout")
    return list(reader)


def read_csv(path: Union[str, Path]) -> list:
    return parse_csv(Path(path).read_text())


# --------------------------------------------------------------------------
# SVG


def _series(records) -> dict:
    """``{label: [(1/d_H, mean cost), ...]}`` over successful rows."""
    acc: dict = {}
    for r in records:
        if r["error"] or not r["queries_or_samples"]:
            continue
        key = f"{r['algorithm']} ({r['model']})"
        acc.setdefault(key, {}).setdefault(float(r["d_H"]), []).append(float(r["queries_or_samples"]))
    return {
        k: [(1 / d, sum(v) / len(v)) for d, v in sorted(pts.items(), reverse=True)]
        for k, pts in sorted(acc.items())
    }


def _decades(values) -> tuple[int, int]:
    lo = math.floor(math.log10(min(values)))
    hi = math.ceil(math.log10(max(values)))
    return lo, max(hi, lo + 1)


def render_svg(csv_text: str, width: int = 640, height: int = 420) -> str:
    """Log-log plot of mean cost against ``1/d_H``, one line per (algorithm, model)."""
    series = _series(parse_csv(csv_text))
    if not series:
        raise ValueError("no successful rows to plot")
    xs = [x for pts in series.values() for x, _ in pts]
    ys = [y for pts in series.values() for _, y in pts]
    xlo, xhi = _decades(xs)
    ylo, yhi = _decades(ys)
    left, right, top, bottom = 70, 190, 20, 50
    pw, ph = width - left - right, height - top - bottom

    def px(x):
        return left + pw * (math.log10(x) - xlo) / (xhi - xlo)

    def py(y):
        return top + ph * (1 - (math.log10(y) - ylo) / (yhi - ylo))

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#000"/>',
    ]
    for e in range(xlo, xhi + 1):
        x = px(10.0**e)
        out.append(f'<line x1="{x:.2f}" y1="{top}" x2="{x:.2f}" y2="{top + ph}" stroke="#ddd"/>')
        out.append(f'<text x="{x:.2f}" y="{top + ph + 15}" text-anchor="middle">1e{e}</text>')
    for e in range(ylo, yhi + 1):
        y = py(10.0**e)
        out.append(f'<line x1="{left}" y1="{y:.2f}" x2="{left + pw}" y2="{y:.2f}" stroke="#ddd"/>')
        out.append(f'<text x="{left - 6}" y="{y + 4:.2f}" text-anchor="end">1e{e}</text>')
    out.append(f'<text x="{left + pw / 2:.2f}" y="{height - 12}" text-anchor="middle">1 / d_H</text>')
    out.append(
        f'<text x="16" y="{top + ph / 2:.2f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {top + ph / 2:.2f})">queries or samples</text>'
    )
    for i, (name, pts) in enumerate(series.items()):
        color = PALETTE[i % len(PALETTE)]
        coords = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in pts)
        out.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        for x, y in pts:
            out.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="3" fill="{color}"/>')
        ly = top + 14 + 18 * i
        out.append(f'<line x1="{left + pw + 12}" y1="{ly - 4}" x2="{left + pw + 32}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 38}" y="{ly}">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render(records, csv_path: Union[str, Path], svg_path: Union[str, Path, None] = None) -> None:
    """Write the CSV and, optionally, the SVG derived from it."""
    text = records_to_csv(records)
    Path(csv_path).write_text(text)
    if svg_path is not None:
        Path(svg_path).write_text(render_svg(text))
