"""Hypothesis strategies for valid tables and table sets."""

from __future__ import annotations

from hypothesis import strategies as st

from text2table.tables import Table, TableSet, normalize_header

_ALPHABET = "abcdefgXYZ0123456789 -%.'"
words = st.text(alphabet=_ALPHABET, min_size=1, max_size=12).map(lambda s: " ".join(s.split())).filter(
    lambda s: normalize_header(s) != "" and not s.lstrip().startswith("#"))
cells = st.one_of(st.none(), st.text(alphabet=_ALPHABET + "|", max_size=10).map(lambda s: " ".join(s.split())))


def _unique(items):
    out, seen = [], set()
    for it in items:
        k = normalize_header(it)
        if k not in seen:
            seen.add(k)
            out.append(it)
    return out


@st.composite
def tables(draw, name=None, max_rows=5, max_cols=5):
    name = name or draw(words)
    cols = _unique(draw(st.lists(words, min_size=1, max_size=max_cols)))
    heads = _unique(draw(st.lists(words, max_size=max_rows)))
    rows = [(h, [draw(cells) for _ in cols]) for h in heads]
    label = draw(st.one_of(st.none(), words))
    return Table.from_grid(name, cols, rows, row_label=label)


@st.composite
def table_sets(draw, max_tables=3):
    names = _unique(draw(st.lists(words, min_size=0, max_size=max_tables)))
    return TableSet(tuple(draw(tables(name=n)) for n in names))
