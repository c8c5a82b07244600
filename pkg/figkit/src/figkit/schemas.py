"""Readers for the documented sweep-bundle formats.

figkit renders numbers, it never recomputes them: each reader returns the
raw text rows alongside parsed floats so a figure can write back exactly
the table it plotted.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path


class SchemaMismatch(Exception):
    """Input exists but does not match the documented schema."""


class MissingColumn(SchemaMismatch):
    """A required column is absent."""


@dataclass(frozen=True)
class Table:
    """A parsed CSV: exact header line, raw rows, and float columns."""

    header: list[str]
    raw_lines: list[str]  # data lines exactly as read, no reformatting
    columns: dict[str, list[float]]

    def __len__(self) -> int:
        return len(self.raw_lines)


def read_table(path, required: tuple[str, ...]) -> Table:
    """Load a CSV and check the required columns are present and numeric."""
    text = Path(path).read_text()
    lines = [ln for ln in text.split("\n") if ln.strip()]
    if not lines:
        raise SchemaMismatch(f"{path}: empty file")
    header = [h.strip() for h in lines[0].split(",")]
    for col in required:
        if col not in header:
            raise MissingColumn(f"{path}: missing column {col!r} in {header}")
    data_lines = lines[1:]
    if not data_lines:
        raise SchemaMismatch(f"{path}: no data rows")
    columns: dict[str, list[float]] = {h: [] for h in header}
    for ln in data_lines:
        parts = ln.split(",")
        if len(parts) != len(header):
            raise SchemaMismatch(f"{path}: row arity {len(parts)} != header {len(header)}")
        for h, val in zip(header, parts):
            try:
                columns[h].append(float(val))
            except ValueError as exc:
                raise SchemaMismatch(f"{path}: non-numeric value {val!r} in {h}") from exc
    return Table(header=header, raw_lines=data_lines, columns=columns)


def read_summary(path) -> dict:
    """Load a bundle summary.json."""
    try:
        with open(path) as f:
            obj = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaMismatch(f"{path}: not readable as JSON ({exc})") from exc
    if not isinstance(obj, dict):
        raise SchemaMismatch(f"{path}: summary must be a JSON object")
    return obj


def require_keys(summary: dict, path, *keys):
    node = summary
    trail = []
    for key in keys:
        trail.append(key)
        if not isinstance(node, dict) or key not in node:
            raise MissingColumn(f"{path}: summary missing {'.'.join(trail)}")
        node = node[key]
    return node
