"""Error localisation: align predictions onto gold headers, count extra/missing
structure, diff two versions of a corpus, and report missing columns by table size."""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from .errors import EmptyInput
from .tables import Table, TableSet, normalize_header

DEFAULT_ALIAS_FILE = Path(__file__).parent / "data" / "aliases.txt"


class Matcher(str, Enum):
    DETERMINISTIC = "deterministic"
    LLM_ASSISTED = "llm"


class AliasTable:
    """Symmetric synonym pairs loaded from ``src = dst`` lines (``#`` starts a comment)."""

    def __init__(self, pairs: Iterable[tuple[str, str]] = (), source: str = "<inline>", digest: str = ""):
        self._links: dict[str, set[str]] = {}
        for a, b in pairs:
            a, b = normalize_header(a), normalize_header(b)
            if not a or not b:
                continue
            self._links.setdefault(a, set()).add(b)
            self._links.setdefault(b, set()).add(a)
        self.source = source
        self.digest = digest

    @classmethod
    def load(cls, path: Union[str, Path, None] = None) -> "AliasTable":
        path = Path(path) if path else DEFAULT_ALIAS_FILE
        raw = path.read_bytes()
        pairs = []
        for lineno, line in enumerate(raw.decode("utf-8").splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'src = dst'")
            a, b = line.split("=", 1)
            pairs.append((a, b))
        return cls(pairs, str(path), hashlib.sha256(raw).hexdigest())

    def related(self, a: str, b: str) -> bool:
        return normalize_header(b) in self._links.get(normalize_header(a), ())


_DEFAULT_ALIASES: Optional[AliasTable] = None


def default_aliases() -> AliasTable:
    global _DEFAULT_ALIASES
    if _DEFAULT_ALIASES is None:
        _DEFAULT_ALIASES = AliasTable.load()
    return _DEFAULT_ALIASES


@dataclass(frozen=True)
class HeaderMapping:
    kind: str  # "row" or "col"
    pred: str
    gold: str
    method: str  # normalized | alias | llm


@dataclass
class TableAlignment:
    mapped: Table
    mapping: list[HeaderMapping]
    extra_rows: list[str]
    extra_cols: list[str]
    missing_rows: list[str]
    missing_cols: list[str]


@dataclass
class AlignedResult:
    mapped: TableSet
    extra_rows: dict[str, list[str]] = field(default_factory=dict)
    extra_cols: dict[str, list[str]] = field(default_factory=dict)
    missing_rows: dict[str, list[str]] = field(default_factory=dict)
    missing_cols: dict[str, list[str]] = field(default_factory=dict)
    mapping: list[tuple[str, HeaderMapping]] = field(default_factory=list)
    sample_id: str = ""

    def to_json(self) -> dict:
        from .tables import table_set_to_json
        return {
            "id": self.sample_id,
            "mapped": table_set_to_json(self.mapped),
            "extra_rows": self.extra_rows,
            "extra_cols": self.extra_cols,
            "missing_rows": self.missing_rows,
            "missing_cols": self.missing_cols,
            "mapping": [{"table": t, "kind": m.kind, "pred": m.pred, "gold": m.gold, "method": m.method}
                        for t, m in self.mapping],
        }


def _match_headers(pred: Sequence[str], gold: Sequence[str], aliases: AliasTable
                   ) -> tuple[dict[int, tuple[int, str]], list[int], list[int]]:
    """Injective pred->gold index mapping: normalized equality first, then aliases.

    Returns (mapping pred_idx -> (gold_idx, method), unmatched pred idx, unmatched gold idx).
    Ties go to the earliest gold header.
    """
    taken: set[int] = set()
    mapping: dict[int, tuple[int, str]] = {}
    gold_norm = [normalize_header(g) for g in gold]
    for pi, p in enumerate(pred):
        key = normalize_header(p)
        gi = next((i for i, g in enumerate(gold_norm) if g == key and i not in taken), None)
        if gi is not None:
            mapping[pi] = (gi, "normalized")
            taken.add(gi)
    for pi, p in enumerate(pred):
        if pi in mapping:
            continue
        gi = next((i for i, g in enumerate(gold) if i not in taken and aliases.related(p, g)), None)
        if gi is not None:
            mapping[pi] = (gi, "alias")
            taken.add(gi)
    unmatched_pred = [i for i in range(len(pred)) if i not in mapping]
    unmatched_gold = [i for i in range(len(gold)) if i not in taken]
    return mapping, unmatched_pred, unmatched_gold


_YES_LINE = re.compile(r"^\s*(\d+)\s*[:.)-]\s*(YES|NO)\b", re.I | re.M)


def _llm_match(table_name: str, kind: str, pred: Sequence[str], gold: Sequence[str],
               pred_idx: list[int], gold_idx: list[int], gateway, templates) -> dict[int, int]:
    candidates = [(pi, gi) for pi in pred_idx for gi in gold_idx]
    if not candidates:
        return {}
    listing = "\n".join(f"{n}. generated {kind} header \"{pred[pi]}\" -> reference {kind} header \"{gold[gi]}\""
                        for n, (pi, gi) in enumerate(candidates, 1))
    prompt = templates.render("align/match", table_name=table_name, candidates=listing)
    try:
        text = gateway.complete(gateway.request(prompt)).text
    except Exception:
        return {}
    verdicts = {int(m.group(1)): m.group(2).upper() == "YES" for m in _YES_LINE.finditer(text)}
    out: dict[int, int] = {}
    used: set[int] = set()
    for n, (pi, gi) in enumerate(candidates, 1):
        if verdicts.get(n) and pi not in out and gi not in used:
            out[pi] = gi
            used.add(gi)
    return out


def align_table(pred: Table, gold: Table, matcher: Matcher = Matcher.DETERMINISTIC, gateway=None,
                templates=None, aliases: Optional[AliasTable] = None) -> TableAlignment:
    aliases = aliases or default_aliases()
    row_map, extra_r, missing_r = _match_headers(pred.row_headers, gold.row_headers, aliases)
    col_map, extra_c, missing_c = _match_headers(pred.columns, gold.columns, aliases)
    rows_m = {pi: (gi, m) for pi, (gi, m) in row_map.items()}
    cols_m = {pi: (gi, m) for pi, (gi, m) in col_map.items()}
    if Matcher(matcher) is Matcher.LLM_ASSISTED and gateway is not None:
        if templates is None:
            from .templates import Templates
            templates = Templates()
        for kind, pred_h, gold_h, extra, missing, target in (
                ("row", pred.row_headers, gold.row_headers, extra_r, missing_r, rows_m),
                ("column", list(pred.columns), list(gold.columns), extra_c, missing_c, cols_m)):
            found = _llm_match(gold.name, kind, pred_h, gold_h, extra, missing, gateway, templates)
            for pi, gi in found.items():
                target[pi] = (gi, "llm")
            extra[:] = [i for i in extra if i not in found]
            missing[:] = [i for i in missing if i not in found.values()]

    gold_cell = {}
    for pi, (gi, _) in rows_m.items():
        for pci, (gci, _) in cols_m.items():
            gold_cell[(gi, gci)] = pred.rows[pi].cells[pci]
    rows = []
    for gi, g_row in enumerate(gold.rows):
        rows.append((g_row.header, [gold_cell.get((gi, gci)) for gci in range(len(gold.columns))]))
    mapped = Table.from_grid(gold.name, gold.columns, rows, row_label=gold.row_label)

    mapping = [HeaderMapping("row", pred.row_headers[pi], gold.row_headers[gi], m) for pi, (gi, m) in rows_m.items()]
    mapping += [HeaderMapping("col", pred.columns[pi], gold.columns[gi], m) for pi, (gi, m) in cols_m.items()]
    return TableAlignment(
        mapped=mapped,
        mapping=mapping,
        extra_rows=[pred.row_headers[i] for i in extra_r],
        extra_cols=[pred.columns[i] for i in extra_c],
        missing_rows=[gold.row_headers[i] for i in missing_r],
        missing_cols=[gold.columns[i] for i in missing_c],
    )


def _empty_like(gold: Table) -> Table:
    return Table.from_grid(gold.name, gold.columns, [(h, [None] * len(gold.columns)) for h in gold.row_headers],
                           row_label=gold.row_label)


def align_to_gold(pred: TableSet, gold: TableSet, matcher: Matcher | str = Matcher.DETERMINISTIC,
                  gateway=None, templates=None, aliases: Optional[AliasTable] = None,
                  sample_id: str = "") -> AlignedResult:
    """Reshape ``pred`` onto gold's exact headers; tables pair by normalized name."""
    matcher = Matcher(matcher)
    result = AlignedResult(mapped=TableSet(), sample_id=sample_id)
    mapped_tables = []
    for g in gold:
        p = pred.get(g.name)
        if p is None:
            mapped_tables.append(_empty_like(g))
            result.extra_rows[g.name] = []
            result.extra_cols[g.name] = []
            result.missing_rows[g.name] = list(g.row_headers)
            result.missing_cols[g.name] = list(g.columns)
            continue
        a = align_table(p, g, matcher, gateway, templates, aliases)
        mapped_tables.append(a.mapped)
        result.extra_rows[g.name] = a.extra_rows
        result.extra_cols[g.name] = a.extra_cols
        result.missing_rows[g.name] = a.missing_rows
        result.missing_cols[g.name] = a.missing_cols
        result.mapping.extend((g.name, m) for m in a.mapping)
    for p in pred:
        if gold.get(p.name) is None:
            result.extra_rows[p.name] = list(p.row_headers)
            result.extra_cols[p.name] = list(p.columns)
            result.missing_rows.setdefault(p.name, [])
            result.missing_cols.setdefault(p.name, [])
    result.mapped = TableSet(tuple(mapped_tables))
    return result


def error_counts(results: Sequence[AlignedResult], table_name: str) -> tuple[float, float, float, float]:
    """Mean (extra_rows, extra_cols, missing_rows, missing_cols) per sample for one table name."""
    key = normalize_header(table_name)
    picked = []
    for r in results:
        name = next((n for n in r.missing_cols if normalize_header(n) == key), None)
        if name is not None:
            picked.append((r, name))
    if not picked:
        raise EmptyInput(f"no aligned results for table {table_name!r}")
    n = len(picked)
    return (
        sum(len(r.extra_rows.get(t, [])) for r, t in picked) / n,
        sum(len(r.extra_cols.get(t, [])) for r, t in picked) / n,
        sum(len(r.missing_rows.get(t, [])) for r, t in picked) / n,
        sum(len(r.missing_cols.get(t, [])) for r, t in picked) / n,
    )


# ---------------------------------------------------------------------------
# version diff

@dataclass
class DiffCounts:
    hallucinated_cells: int = 0
    missing_cells: int = 0
    hallucinated_rows: int = 0
    missing_rows: int = 0
    hallucinated_cols: int = 0
    missing_cols: int = 0

    def add(self, other: "DiffCounts") -> None:
        for f in self.__dataclass_fields__:
            setattr(self, f, getattr(self, f) + getattr(other, f))

    def is_zero(self) -> bool:
        return all(getattr(self, f) == 0 for f in self.__dataclass_fields__)

    def to_json(self) -> dict:
        return {f: getattr(self, f) for f in self.__dataclass_fields__}


@dataclass
class DiffReport:
    tables: dict[str, DiffCounts] = field(default_factory=dict)

    def add(self, other: "DiffReport") -> None:
        for name, counts in other.tables.items():
            self.tables.setdefault(name, DiffCounts()).add(counts)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.tables.values())

    def to_json(self) -> dict:
        return {name: c.to_json() for name, c in self.tables.items()}


def _pair_headers(b: Sequence[str], a: Sequence[str], aliases: AliasTable
                  ) -> tuple[dict[int, tuple[int, str]], list[int], list[int]]:
    """Like _match_headers(b, a) but independent of argument order, so diffs stay antisymmetric."""
    if list(b) <= list(a):
        return _match_headers(b, a, aliases)
    fwd, only_a, only_b = _match_headers(a, b, aliases)
    return {bi: (ai, m) for ai, (bi, m) in fwd.items()}, only_b, only_a


def _diff_tables(a: Optional[Table], b: Optional[Table], aliases: AliasTable) -> DiffCounts:
    # union grid keyed by a's headers, extended by b-only headers
    a_rows = a.row_headers if a else []
    a_cols = list(a.columns) if a else []
    b_rows = b.row_headers if b else []
    b_cols = list(b.columns) if b else []
    row_map, b_only_rows, _ = _pair_headers(b_rows, a_rows, aliases)
    col_map, b_only_cols, _ = _pair_headers(b_cols, a_cols, aliases)
    n_rows = len(a_rows) + len(b_only_rows)
    n_cols = len(a_cols) + len(b_only_cols)
    grid_a: dict[tuple[int, int], Optional[str]] = {}
    grid_b: dict[tuple[int, int], Optional[str]] = {}
    if a:
        for ri, row in enumerate(a.rows):
            for ci, cell in enumerate(row.cells):
                grid_a[(ri, ci)] = cell
    if b:
        b_row_pos = {bi: gi for bi, (gi, _) in row_map.items()}
        b_row_pos.update({bi: len(a_rows) + k for k, bi in enumerate(b_only_rows)})
        b_col_pos = {bi: gi for bi, (gi, _) in col_map.items()}
        b_col_pos.update({bi: len(a_cols) + k for k, bi in enumerate(b_only_cols)})
        for ri, row in enumerate(b.rows):
            for ci, cell in enumerate(row.cells):
                grid_b[(b_row_pos[ri], b_col_pos[ci])] = cell
    counts = DiffCounts()
    h_rows, m_rows, h_cols, m_cols = set(), set(), set(), set()
    for r in range(n_rows):
        for c in range(n_cols):
            va, vb = grid_a.get((r, c)), grid_b.get((r, c))
            hallucinated = va is not None and (vb is None or vb != va)
            missing = vb is not None and (va is None or va != vb)
            if hallucinated:
                counts.hallucinated_cells += 1
                h_rows.add(r)
                h_cols.add(c)
            if missing:
                counts.missing_cells += 1
                m_rows.add(r)
                m_cols.add(c)
    counts.hallucinated_rows, counts.missing_rows = len(h_rows), len(m_rows)
    counts.hallucinated_cols, counts.missing_cols = len(h_cols), len(m_cols)
    return counts


def diff_table_sets(a: TableSet, b: TableSet, aliases: Optional[AliasTable] = None) -> DiffReport:
    """Cells filled in ``a`` but not (identically) in ``b`` are hallucinated; the reverse are missing.

    A changed value counts once on each side. A row or column is flagged when it
    holds at least one flagged cell.
    """
    aliases = aliases or default_aliases()
    report = DiffReport()
    for ta in a:
        report.tables[ta.name] = _diff_tables(ta, b.get(ta.name), aliases)
    for tb in b:
        if a.get(tb.name) is None:
            report.tables[tb.name] = _diff_tables(None, tb, aliases)
    return report


# ---------------------------------------------------------------------------
# schema size report

@dataclass(frozen=True)
class SchemaSizeRecord:
    sample_id: str
    table_name: str
    gold_col_count: int
    missing_col_count: int


def schema_size_report(samples, aligned: Sequence[AlignedResult]) -> list[SchemaSizeRecord]:
    """One record per (sample, gold table): gold column count vs. missing columns."""
    by_id = {r.sample_id: r for r in aligned}
    records = []
    for s in samples:
        r = by_id.get(s.id)
        for t in s.gold:
            missing = len(r.missing_cols.get(t.name, t.columns)) if r else len(t.columns)
            records.append(SchemaSizeRecord(s.id, t.name, len(t.columns), missing))
    return records
