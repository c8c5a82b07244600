"""Figure rendering for sweep bundles."""

from .render import KINDS, render
from .schemas import MissingColumn, SchemaMismatch, Table, read_summary, read_table

__all__ = ["KINDS", "render", "SchemaMismatch", "MissingColumn", "Table", "read_table", "read_summary"]
