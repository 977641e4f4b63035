"""Canonical result serialization: CSV tables, JSON, and static SVG plots.

Numbers are written with `repr(float(x))` -- the shortest decimal string
that parses back to the same binary64 value -- so reading a file and
re-serializing it reproduces the bytes exactly.  That property is what the
figure-regression workflow diffs against, and the round-trip is covered by
tests rather than promised.

CSV dialect: '.' decimal point, ',' separator, one header row, and
'#'-prefixed comment rows (used for sweep events and status trailers).
JSON documents always carry schema_version = 1.  SVG is produced by a tiny
string emitter (axes, polylines, labels) on purpose: the plots are static
artifacts and a plotting library would be a contract risk, not a saving.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .errors import ValidationError

SCHEMA_VERSION = 1


def format_number(value) -> str:
    """Shortest round-tripping decimal form of a float (canonical)."""
    as_float = float(value)
    if math.isnan(as_float) or math.isinf(as_float):
        raise ValidationError(f"cannot serialize non-finite value {value!r}")
    return repr(as_float)


def format_cell(value) -> str:
    if isinstance(value, str):
        if any(ch in value for ch in ",\n\r#"):
            raise ValidationError(f"cell {value!r} contains CSV structure characters")
        return value
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    return format_number(value)


@dataclass
class Table:
    """A small column-labeled table plus trailing comment lines."""

    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)
    comments: list[str] = field(default_factory=list)

    def add(self, *cells):
        if len(cells) != len(self.columns):
            raise ValidationError(
                f"row has {len(cells)} cells, table has {len(self.columns)} columns"
            )
        self.rows.append(tuple(cells))


def write_csv(table: Table) -> str:
    lines = [",".join(table.columns)]
    for row in table.rows:
        lines.append(",".join(format_cell(cell) for cell in row))
    for comment in table.comments:
        lines.append(f"# {comment}")
    return "\n".join(lines) + "\n"


def read_csv(text: str) -> Table:
    """Parse the dialect written by `write_csv`; cells come back as strings."""
    lines = text.splitlines()
    if not lines:
        raise ValidationError("empty CSV document")
    table = Table(columns=tuple(lines[0].split(",")))
    for line in lines[1:]:
        if not line.strip():
            continue
        if line.startswith("#"):
            table.comments.append(line[1:].strip())
            continue
        cells = tuple(line.split(","))
        if len(cells) != len(table.columns):
            raise ValidationError(
                f"row {line!r} has {len(cells)} cells, expected {len(table.columns)}"
            )
        table.rows.append(cells)
    return table


def write_json(document: dict) -> str:
    """Canonical JSON: schema_version injected first, two-space indent."""
    body = {"schema_version": SCHEMA_VERSION}
    body.update(document)
    return json.dumps(body, indent=2, allow_nan=False) + "\n"


def read_json(text: str) -> dict:
    document = json.loads(text)
    if document.get("schema_version") != SCHEMA_VERSION:
        raise ValidationError(
            f"unsupported schema_version {document.get('schema_version')!r}"
        )
    return document


# ---------------------------------------------------------------------------
# SVG emitter

_PALETTE = (
    "#1f77b4",
    "#d62728",
    "#2ca02c",
    "#9467bd",
    "#ff7f0e",
    "#8c564b",
    "#17becf",
    "#7f7f7f",
)

_WIDTH, _HEIGHT = 720, 480
_MARGIN = 56


def _coord(value: float) -> str:
    return f"{value:.2f}"


class _Scale:
    def __init__(self, lo: float, hi: float, pix_lo: float, pix_hi: float):
        if hi <= lo:
            hi = lo + 1.0
        self.lo, self.hi = lo, hi
        self.pix_lo, self.pix_hi = pix_lo, pix_hi

    def __call__(self, value: float) -> float:
        frac = (value - self.lo) / (self.hi - self.lo)
        return self.pix_lo + frac * (self.pix_hi - self.pix_lo)


def svg_line_plot(
    x_values,
    series: list[tuple[str, list[float]]],
    title: str,
    x_label: str,
    y_label: str,
    markers: list[tuple[float, float]] | None = None,
) -> str:
    """A multi-polyline plot with axes, tick extremes, legend, and markers.

    `series` holds (label, y-values) pairs over the shared x grid; markers
    are (x, y) points drawn as circles (event locations).
    """
    xs = [float(x) for x in x_values]
    if not xs or not series:
        raise ValidationError("plot needs at least one x value and one series")
    all_y = [float(y) for _, ys in series for y in ys if math.isfinite(y)]
    if not all_y:
        raise ValidationError("plot needs at least one finite y value")
    x_scale = _Scale(min(xs), max(xs), _MARGIN, _WIDTH - _MARGIN)
    pad = 0.05 * (max(all_y) - min(all_y) or 1.0)
    y_scale = _Scale(min(all_y) - pad, max(all_y) + pad, _HEIGHT - _MARGIN, _MARGIN)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" '
        f'height="{_HEIGHT}" viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<text x="{_WIDTH // 2}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="16">{title}</text>',
    ]
    # axes
    x0, y0 = _MARGIN, _HEIGHT - _MARGIN
    x1, y1 = _WIDTH - _MARGIN, _MARGIN
    parts.append(
        f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>'
    )
    parts.append(
        f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>'
    )
    parts.append(
        f'<text x="{(x0 + x1) // 2}" y="{_HEIGHT - 12}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">{x_label}</text>'
    )
    parts.append(
        f'<text x="16" y="{(y0 + y1) // 2}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13" '
        f'transform="rotate(-90 16 {(y0 + y1) // 2})">{y_label}</text>'
    )
    # extreme tick labels
    for value, px in ((min(xs), x0), (max(xs), x1)):
        parts.append(
            f'<text x="{px}" y="{y0 + 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{format_number(value)}</text>'
        )
    for value in (min(all_y), max(all_y)):
        py = y_scale(value)
        parts.append(
            f'<text x="{x0 - 6}" y="{_coord(py)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{format_number(value)}</text>'
        )
    # polylines and legend
    for index, (label, ys) in enumerate(series):
        color = _PALETTE[index % len(_PALETTE)]
        points = " ".join(
            f"{_coord(x_scale(x))},{_coord(y_scale(float(y)))}"
            for x, y in zip(xs, ys)
            if math.isfinite(float(y))
        )
        parts.append(
            f'<polyline points="{points}" fill="none" stroke="{color}" '
            f'stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{x1 - 150}" y="{_MARGIN + 16 * index}" '
            f'font-family="sans-serif" font-size="11" fill="{color}">{label}</text>'
        )
    for mx, my in markers or []:
        parts.append(
            f'<circle cx="{_coord(x_scale(mx))}" cy="{_coord(y_scale(my))}" '
            f'r="4" fill="none" stroke="black" stroke-width="1.5"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
