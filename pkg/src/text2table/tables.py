"""Table data model plus the pipe-delimited table grammar and schema JSON grammar.

Wire grammar::

    ### Team
    | Team | Wins | Losses |
    | Thunder | 16 | 17 |

The first header cell labels the row-header column; absent cells are written
as ``None``.
"""

from __future__ import annotations

import json
import re
import unicodedata
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from enum import Enum
from typing import Iterable, Iterator, Optional, Sequence

from .errors import (
    DuplicateRowHeader,
    DuplicateTableName,
    EmptyColumnHeader,
    NoTablesFound,
    RowArityMismatch,
    SchemaNotFound,
    SchemaShapeInvalid,
)

ABSENT_LITERAL = "None"

Cell = Optional[str]  # None is the Absent sentinel


class ParseMode(str, Enum):
    STRICT = "strict"
    LENIENT = "lenient"


def normalize_header(s: str) -> str:
    """Lowercase, NFC, collapse whitespace, and strip edge whitespace/punctuation."""
    s = unicodedata.normalize("NFC", s).lower()
    s = unicodedata.normalize("NFC", s)
    s = " ".join(s.split())
    start, end = 0, len(s)
    while start < end and _is_edge_junk(s[start]):
        start += 1
    while end > start and _is_edge_junk(s[end - 1]):
        end -= 1
    return s[start:end]


def _is_edge_junk(ch: str) -> bool:
    return ch.isspace() or unicodedata.category(ch).startswith("P")


def canonical_cell(value: Cell) -> Cell:
    if value is None:
        return None
    text = " ".join(str(value).split())
    if text.lower() == "none":
        return None
    return text


def canonical_text(value: str) -> str:
    return " ".join(str(value).split())


@dataclass(frozen=True)
class NumericView:
    value: Decimal
    percent: bool = False

    def as_int(self) -> Optional[int]:
        if self.value == self.value.to_integral_value():
            return int(self.value)
        return None


_NUMERIC_RE = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)$")


def numeric_view(cell: Cell) -> Optional[NumericView]:
    """Parse view of a cell: signed integer or decimal, optional trailing %."""
    if cell is None:
        return None
    text = cell.strip()
    percent = False
    if text.endswith("%"):
        percent = True
        text = text[:-1].strip()
    if not _NUMERIC_RE.match(text):
        return None
    try:
        return NumericView(Decimal(text), percent)
    except InvalidOperation:  # pragma: no cover - regex already guards
        return None


@dataclass(frozen=True)
class Row:
    header: str
    cells: tuple[Cell, ...]

    def __post_init__(self):
        object.__setattr__(self, "header", canonical_text(self.header))
        object.__setattr__(self, "cells", tuple(canonical_cell(c) for c in self.cells))


@dataclass(frozen=True)
class Table:
    """A named grid: one row-header column plus ``columns``.

    ``row_label`` is the text of the first header cell ("Team", "Player");
    it defaults to the table name.
    """

    name: str
    columns: tuple[str, ...]
    rows: tuple[Row, ...]
    row_label: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "name", canonical_text(self.name))
        cols = tuple(canonical_text(c) for c in self.columns)
        for c in cols:
            if not c:
                raise EmptyColumnHeader(f"table {self.name!r}: empty column header")
        object.__setattr__(self, "columns", cols)
        rows = tuple(r if isinstance(r, Row) else Row(r[0], tuple(r[1])) for r in self.rows)
        for r in rows:
            if len(r.cells) != len(cols):
                raise RowArityMismatch(
                    f"table {self.name!r}: row {r.header!r} has {len(r.cells)} cells, expected {len(cols)}"
                )
        seen = set()
        for r in rows:
            key = normalize_header(r.header)
            if key in seen:
                raise DuplicateRowHeader(f"table {self.name!r}: duplicate row header {r.header!r}")
            seen.add(key)
        object.__setattr__(self, "rows", rows)
        label = self.name if self.row_label is None else canonical_text(self.row_label)
        object.__setattr__(self, "row_label", label)

    @classmethod
    def from_grid(cls, name: str, columns: Sequence[str], rows: Iterable[tuple[str, Sequence[Cell]]],
                  row_label: Optional[str] = None) -> "Table":
        return cls(name, tuple(columns), tuple(Row(h, tuple(c)) for h, c in rows), row_label)

    @property
    def row_headers(self) -> list[str]:
        return [r.header for r in self.rows]

    def cell(self, row: str, col: str) -> Cell:
        ci = self.columns.index(col)
        for r in self.rows:
            if r.header == row:
                return r.cells[ci]
        raise KeyError(row)

    def column(self, col: str) -> list[Cell]:
        ci = self.columns.index(col)
        return [r.cells[ci] for r in self.rows]


@dataclass(frozen=True)
class TableSet:
    tables: tuple[Table, ...] = ()
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "tables", tuple(self.tables))
        object.__setattr__(self, "warnings", tuple(self.warnings))
        seen = set()
        for t in self.tables:
            key = normalize_header(t.name)
            if key in seen:
                raise DuplicateTableName(f"duplicate table name {t.name!r}")
            seen.add(key)

    def __iter__(self) -> Iterator[Table]:
        return iter(self.tables)

    def __len__(self) -> int:
        return len(self.tables)

    def get(self, name: str) -> Optional[Table]:
        key = normalize_header(name)
        for t in self.tables:
            if normalize_header(t.name) == key:
                return t
        return None

    @property
    def names(self) -> list[str]:
        return [t.name for t in self.tables]


@dataclass(frozen=True)
class ContentTuple:
    row: str
    col: str
    value: str

    def as_string(self) -> str:
        return f"{self.row} | {self.col} | {self.value}"


def extract_tuples(t: Table, include_absent: bool = False) -> list[ContentTuple]:
    out = []
    for r in t.rows:
        for col, cell in zip(t.columns, r.cells):
            if cell is None:
                if include_absent:
                    out.append(ContentTuple(r.header, col, ABSENT_LITERAL))
                continue
            out.append(ContentTuple(r.header, col, cell))
    return out


# ---------------------------------------------------------------------------
# wire grammar

_HEADING_RE = re.compile(r"^\s*#{1,6}\s*(.*?)\s*$")
_ALIGN_CELL_RE = re.compile(r"^:?-+:?$")
_UNESCAPED_PIPE = re.compile(r"(?<!\\)\|")


def _split_row(line: str) -> list[str]:
    s = line.strip()
    if s.startswith("|"):
        s = s[1:]
    if s.endswith("|") and not s.endswith("\\|"):
        s = s[:-1]
    return [c.strip().replace("\\|", "|") for c in _UNESCAPED_PIPE.split(s)]


def _is_pipe_row(line: str) -> bool:
    return _UNESCAPED_PIPE.search(line) is not None


def _is_alignment_row(cells: list[str]) -> bool:
    return bool(cells) and all(_ALIGN_CELL_RE.match(c.replace(" ", "")) for c in cells)


def _is_fence(line: str) -> bool:
    return line.strip().startswith("```")


def _clean_table_name(raw: str) -> str:
    name = raw.strip().strip("*").strip()
    if name.endswith(":"):
        name = name[:-1].strip()
    return name.strip("*").strip()


@dataclass
class _Block:
    name: str
    rows: list[list[str]]


def _scan_blocks(text: str, default_name: Optional[str]) -> list[_Block]:
    blocks: list[_Block] = []
    current: Optional[_Block] = _Block(default_name, []) if default_name else None
    for line in text.splitlines():
        if _is_fence(line) or not line.strip():
            continue
        m = _HEADING_RE.match(line)
        if m and line.lstrip().startswith("#"):
            if current is not None and current.rows:
                blocks.append(current)
            current = _Block(_clean_table_name(m.group(1)), [])
            continue
        if current is not None and _is_pipe_row(line):
            cells = _split_row(line)
            if _is_alignment_row(cells):
                continue
            current.rows.append(cells)
            continue
        # prose ends the current block
        if current is not None and current.rows:
            blocks.append(current)
        current = None
    if current is not None and current.rows:
        blocks.append(current)
    return blocks


def parse_table_blocks(text: str, mode: ParseMode | str = ParseMode.LENIENT,
                       default_name: Optional[str] = None) -> TableSet:
    """Parse every ``### name`` block of pipe rows in ``text``.

    ``default_name`` names pipe rows that appear before any heading; without it
    such rows are treated as prose.
    """
    mode = ParseMode(mode)
    strict = mode is ParseMode.STRICT
    warnings: list[str] = []
    parsed: list[Table] = []
    for block in _scan_blocks(text or "", default_name):
        header, *body = block.rows
        label, columns = header[0], list(header[1:])
        for i, c in enumerate(columns):
            if not c:
                if strict:
                    raise EmptyColumnHeader(f"table {block.name!r}: empty column header at position {i + 1}")
                columns[i] = f"Column {i + 1}"
                warnings.append(f"EmptyHeaderWarning: table {block.name!r} column {i + 1} renamed")
        columns = _dedup(columns, strict, block.name, "column", warnings)
        rows = []
        seen_rows: dict[str, int] = {}
        for cells in body:
            row_header, values = cells[0], cells[1:]
            if len(values) != len(columns):
                if strict:
                    raise RowArityMismatch(
                        f"table {block.name!r}: row {row_header!r} has {len(values)} cells, expected {len(columns)}"
                    )
                if len(values) < len(columns):
                    warnings.append(f"PadWarning: table {block.name!r} row {row_header!r} padded "
                                    f"from {len(values)} to {len(columns)} cells")
                    values = values + [ABSENT_LITERAL] * (len(columns) - len(values))
                else:
                    warnings.append(f"TruncateWarning: table {block.name!r} row {row_header!r} truncated "
                                    f"from {len(values)} to {len(columns)} cells")
                    values = values[: len(columns)]
            key = normalize_header(row_header)
            if key in seen_rows:
                if strict:
                    raise DuplicateRowHeader(f"table {block.name!r}: duplicate row header {row_header!r}")
                seen_rows[key] += 1
                new_header = f"{row_header}#{seen_rows[key]}"
                warnings.append(f"DuplicateRowWarning: table {block.name!r} row {row_header!r} renamed {new_header!r}")
                row_header = new_header
            else:
                seen_rows[key] = 1
            rows.append(Row(row_header, tuple(values)))
        parsed.append(Table(block.name, tuple(columns), tuple(rows), row_label=label))

    tables: list[Table] = []
    for t in parsed:
        key = normalize_header(t.name)
        clash = next((i for i, prev in enumerate(tables) if normalize_header(prev.name) == key), None)
        if clash is None:
            tables.append(t)
            continue
        if strict:
            raise DuplicateTableName(f"duplicate table name {t.name!r}")
        warnings.append(f"DuplicateTableWarning: table {t.name!r} repeated; keeping the last occurrence")
        del tables[clash]
        tables.append(t)

    if not tables:
        if strict:
            raise NoTablesFound("no '### <name>' block with a header row found")
        warnings.append("NoTablesWarning: no table blocks found")
    return TableSet(tuple(tables), tuple(warnings))


def _dedup(headers: list[str], strict: bool, table: str, what: str, warnings: list[str]) -> list[str]:
    seen: dict[str, int] = {}
    out = []
    for h in headers:
        key = normalize_header(h)
        if key in seen:
            if strict:
                raise DuplicateRowHeader(f"table {table!r}: duplicate {what} header {h!r}")
            seen[key] += 1
            renamed = f"{h}#{seen[key]}"
            warnings.append(f"DuplicateColumnWarning: table {table!r} {what} {h!r} renamed {renamed!r}")
            out.append(renamed)
        else:
            seen[key] = 1
            out.append(h)
    return out


def _format_cell(cell: Cell) -> str:
    if cell is None:
        return ABSENT_LITERAL
    return cell.replace("|", "\\|")


def _format_row(cells: Iterable[str]) -> str:
    return "| " + " | ".join(cells) + " |"


def serialize_table(t: Table) -> str:
    lines = [f"### {t.name}", _format_row([_format_cell(t.row_label)] + [_format_cell(c) for c in t.columns])]
    for r in t.rows:
        lines.append(_format_row([_format_cell(r.header)] + [_format_cell(c) for c in r.cells]))
    return "\n".join(lines)


def serialize_table_set(ts: TableSet) -> str:
    if not ts.tables:
        return ""
    return "\n\n".join(serialize_table(t) for t in ts.tables) + "\n"


# ---------------------------------------------------------------------------
# canonical JSON form

def table_set_to_json(ts: TableSet) -> list[dict]:
    out = []
    for t in ts.tables:
        obj = {
            "name": t.name,
            "columns": list(t.columns),
            "rows": [{"header": r.header, "cells": list(r.cells)} for r in t.rows],
        }
        if t.row_label != t.name:
            obj["row_label"] = t.row_label
        out.append(obj)
    return out


def table_set_from_json(tables: list[dict]) -> TableSet:
    built = []
    for obj in tables:
        built.append(Table(
            obj["name"],
            tuple(obj["columns"]),
            tuple(Row(r["header"], tuple(r["cells"])) for r in obj["rows"]),
            row_label=obj.get("row_label"),
        ))
    return TableSet(tuple(built))


# ---------------------------------------------------------------------------
# schema

@dataclass(frozen=True)
class SchemaTable:
    name: str
    row_headers: tuple[str, ...] = ()
    column_headers: tuple[str, ...] = ()


def _dedup_normalized(items: Iterable[str]) -> tuple[str, ...]:
    seen = set()
    out = []
    for item in items:
        item = canonical_text(item)
        key = normalize_header(item)
        if key in seen:
            continue
        seen.add(key)
        out.append(item)
    return tuple(out)


@dataclass(frozen=True)
class Schema:
    tables: tuple[SchemaTable, ...] = ()

    def __post_init__(self):
        cleaned = tuple(
            SchemaTable(canonical_text(t.name), _dedup_normalized(t.row_headers), _dedup_normalized(t.column_headers))
            for t in self.tables
        )
        object.__setattr__(self, "tables", cleaned)

    def __len__(self) -> int:
        return len(self.tables)

    def get(self, name: str) -> Optional[SchemaTable]:
        key = normalize_header(name)
        return next((t for t in self.tables if normalize_header(t.name) == key), None)

    def to_json(self) -> dict:
        return {t.name: {"row_headers": list(t.row_headers), "column_headers": list(t.column_headers)}
                for t in self.tables}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=4, ensure_ascii=False)

    @classmethod
    def from_json(cls, obj: dict) -> "Schema":
        return cls(tuple(SchemaTable(name, tuple(v.get("row_headers", ())),
                                     tuple(v.get("column_headers", v.get("col_headers", ()))))
                         for name, v in obj.items()))


def _json_object_spans(text: str) -> list[str]:
    """Top-level ``{...}`` substrings, brace-matched outside string literals."""
    spans = []
    depth = 0
    start = None
    in_str = False
    escape = False
    for i, ch in enumerate(text):
        if in_str:
            if escape:
                escape = False
            elif ch == "\\":
                escape = True
            elif ch == '"':
                in_str = False
            continue
        if ch == '"':
            in_str = depth > 0
        elif ch == "{":
            if depth == 0:
                start = i
            depth += 1
        elif ch == "}" and depth > 0:
            depth -= 1
            if depth == 0:
                spans.append(text[start:i + 1])
    return spans


_MISSING_COMMA_RE = re.compile(r'([}\]"])(\s*\n\s*)(")')
_TRAILING_COMMA_RE = re.compile(r",(\s*[}\]])")


def _loads_lenient(blob: str):
    try:
        return json.loads(blob)
    except json.JSONDecodeError:
        pass
    repaired = _TRAILING_COMMA_RE.sub(r"\1", blob)
    repaired = _MISSING_COMMA_RE.sub(r"\1,\2\3", repaired)
    try:
        return json.loads(repaired)
    except json.JSONDecodeError:
        return None


def _schema_shaped(obj) -> bool:
    if not isinstance(obj, dict) or not obj:
        return False
    for v in obj.values():
        if not isinstance(v, dict) or "row_headers" not in v:
            return False
        if "column_headers" not in v and "col_headers" not in v:
            return False
    return True


def _string_list(v) -> bool:
    return isinstance(v, list) and all(isinstance(x, str) for x in v)


def parse_schema_json(text: str) -> Schema:
    """Return the last schema-shaped JSON object in ``text``.

    Tolerates code fences, the ``col_headers`` key variant, trailing commas and
    missing commas between sibling entries.
    """
    candidates = [obj for obj in (_loads_lenient(s) for s in _json_object_spans(text or "")) if _schema_shaped(obj)]
    if not candidates:
        raise SchemaNotFound("no JSON object with row_headers/column_headers found")
    obj = candidates[-1]
    for name, v in obj.items():
        cols = v.get("column_headers", v.get("col_headers"))
        if not (_string_list(v["row_headers"]) and _string_list(cols)):
            raise SchemaShapeInvalid(f"table {name!r}: header lists must be lists of strings")
    return Schema.from_json(obj)
