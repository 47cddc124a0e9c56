"""Explanation report format and its SVG rendering.

JSON is the canonical format (schema_version 1, one document per file);
the SVG view mirrors the usual presentation: a horizontal bar chart of
relative feature importances next to tables of the closest same-class and
opposite-class training examples, all in original feature units.
"""
from __future__ import annotations

import json
from xml.sax.saxutils import escape

import numpy as np

from .core import Explanation
from .data import Dataset
from .errors import DataError

__all__ = [
    "SCHEMA_VERSION",
    "build_report",
    "write_report",
    "load_report",
    "render_svg",
]

SCHEMA_VERSION = 1

_TOP_LEVEL_FIELDS = {
    "schema_version": int,
    "dataset": str,
    "model": str,
    "instance": dict,
    "predicted_class": str,
    "importances": list,
    "allies": list,
    "enemies": list,
    "flags": list,
    "seed": int,
}
_IMPORTANCE_FIELDS = {"feature": str, "value": float, "importance": float, "rank": int}
_EXAMPLE_FIELDS = {"features": dict, "dissimilarity": float}


def build_report(
    explanation: Explanation,
    train: Dataset,
    model_descriptor: str,
    seed: int = 0,
) -> dict:
    """Assemble the canonical JSON document for one explanation."""
    names = train.column_names
    importances = explanation.importances
    # Rank 1 = most important; importance ties keep column order.
    order = np.lexsort((np.arange(len(names)), -importances))
    rank = np.empty(len(names), dtype=np.int64)
    rank[order] = np.arange(1, len(names) + 1)

    def example_entry(example) -> dict:
        return {
            "features": {n: float(v) for n, v in zip(names, example.features)},
            "dissimilarity": float(example.dissimilarity),
        }

    return {
        "schema_version": SCHEMA_VERSION,
        "dataset": train.name,
        "model": model_descriptor,
        "instance": {
            n: float(v) for n, v in zip(names, explanation.test_instance)
        },
        "predicted_class": explanation.predicted_class,
        "importances": [
            {
                "feature": names[j],
                "value": float(explanation.test_instance[j]),
                "importance": float(importances[j]),
                "rank": int(rank[j]),
            }
            for j in range(len(names))
        ],
        "allies": [example_entry(e) for e in explanation.allies],
        "enemies": [example_entry(e) for e in explanation.enemies],
        "flags": list(explanation.flags),
        "seed": int(seed),
    }


def _check_fields(obj: dict, spec: dict, where: str) -> None:
    unknown = set(obj) - set(spec)
    if unknown:
        raise DataError(f"{where}: unknown fields {sorted(unknown)}")
    for key, kind in spec.items():
        if key not in obj:
            raise DataError(f"{where}: missing field {key!r}")
        value = obj[key]
        if kind is float:
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise DataError(f"{where}: field {key!r} must be a number")
        elif kind is int:
            if not isinstance(value, int) or isinstance(value, bool):
                raise DataError(f"{where}: field {key!r} must be an integer")
        elif not isinstance(value, kind):
            raise DataError(f"{where}: field {key!r} must be {kind.__name__}")


def validate_report(report: dict) -> dict:
    """Strict schema check; unknown fields are rejected."""
    if not isinstance(report, dict):
        raise DataError("report must be a JSON object")
    _check_fields(report, _TOP_LEVEL_FIELDS, "report")
    if report["schema_version"] != SCHEMA_VERSION:
        raise DataError(
            f"unsupported schema_version {report['schema_version']}, "
            f"expected {SCHEMA_VERSION}"
        )
    d = len(report["instance"])
    if len(report["importances"]) != d:
        raise DataError("importances must cover every instance feature")
    ranks = []
    for entry in report["importances"]:
        _check_fields(entry, _IMPORTANCE_FIELDS, "importances entry")
        ranks.append(entry["rank"])
    if sorted(ranks) != list(range(1, d + 1)):
        raise DataError("importance ranks must be a permutation of 1..d")
    for section in ("allies", "enemies"):
        for entry in report[section]:
            _check_fields(entry, _EXAMPLE_FIELDS, f"{section} entry")
    for flag in report["flags"]:
        if not isinstance(flag, str):
            raise DataError("flags must be strings")
    return report


def write_report(report: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")


def load_report(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            report = json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON: {exc}") from None
    return validate_report(report)


def _fmt(value: float) -> str:
    return f"{value:.4g}"


_BAR_COLOR = "#4878a8"
_ROW_H = 22
_FONT = 'font-family="monospace" font-size="12"'


def _table(
    x: int, y: int, title: str, columns: list[str], rows: list[list[str]]
) -> tuple[list[str], int]:
    col_w = 88
    parts = [
        f'<text x="{x}" y="{y}" {_FONT} font-weight="bold">{escape(title)}</text>'
    ]
    y += 8
    for j, col in enumerate(columns):
        parts.append(
            f'<text x="{x + j * col_w}" y="{y + _ROW_H - 8}" {_FONT} '
            f'font-style="italic">{escape(col)}</text>'
        )
    for i, row in enumerate(rows):
        ry = y + (i + 1) * _ROW_H
        for j, cell in enumerate(row):
            parts.append(
                f'<text x="{x + j * col_w}" y="{ry + _ROW_H - 8}" {_FONT}>'
                f"{escape(cell)}</text>"
            )
    return parts, y + (len(rows) + 1) * _ROW_H + 16


def render_svg(report: dict) -> str:
    """Deterministic SVG view of a validated report."""
    validate_report(report)
    names = list(report["instance"].keys())
    columns = names + ["dissimilarity"]
    table_x = 360
    width = max(720, table_x + 88 * len(columns) + 24)

    parts: list[str] = []
    parts.append(
        f'<text x="16" y="24" font-family="monospace" font-size="15" '
        f'font-weight="bold">'
        f'Prediction: {escape(str(report["predicted_class"]))} '
        f'({escape(str(report["model"]))} on {escape(str(report["dataset"]))})</text>'
    )
    y = 56
    if report["flags"]:
        banner = "flags: " + ", ".join(report["flags"])
        parts.append(
            f'<text x="16" y="{y}" {_FONT} fill="#a84444">{escape(banner)}</text>'
        )
        y += 28

    entries = sorted(report["importances"], key=lambda e: e["rank"])
    max_importance = max((e["importance"] for e in entries), default=0.0)
    parts.append(
        f'<text x="16" y="{y}" {_FONT} font-weight="bold">'
        f"Relative feature importance (standardized units)</text>"
    )
    y += 12
    if max_importance > 0.0:
        for e in entries:
            bar = 220.0 * e["importance"] / max_importance
            label = f'{e["feature"]} = {_fmt(e["value"])}'
            parts.append(
                f'<text x="16" y="{y + _ROW_H - 8}" {_FONT}>{escape(label)}</text>'
            )
            parts.append(
                f'<rect x="140" y="{y + 6}" width="{bar:.1f}" height="12" '
                f'fill="{_BAR_COLOR}"/>'
            )
            parts.append(
                f'<text x="{140 + bar + 6:.1f}" y="{y + _ROW_H - 8}" {_FONT}>'
                f'{_fmt(e["importance"])}</text>'
            )
            y += _ROW_H
    else:
        parts.append(
            f'<text x="16" y="{y + _ROW_H - 8}" {_FONT}>'
            f"(importances unavailable)</text>"
        )
        y += _ROW_H
    left_bottom = y + 16

    def rows_of(section: str) -> list[list[str]]:
        return [
            [_fmt(entry["features"][n]) for n in names]
            + [_fmt(entry["dissimilarity"])]
            for entry in report[section]
        ]

    table_parts, y_allies = _table(
        table_x,
        40,
        f'Most similar cases also predicted {report["predicted_class"]}',
        columns,
        rows_of("allies"),
    )
    parts.extend(table_parts)
    table_parts, right_bottom = _table(
        table_x,
        y_allies + 8,
        "Most similar cases with the opposite prediction",
        columns,
        rows_of("enemies"),
    )
    parts.extend(table_parts)

    height = max(left_bottom, right_bottom) + 8
    body = "\n".join(parts)
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">\n'
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>\n'
        f"{body}\n</svg>\n"
    )
