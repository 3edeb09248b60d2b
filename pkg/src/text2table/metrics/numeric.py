"""RMSE / error rate over count tables, split by event difficulty and by error sign."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from ..analysis import align_table
from ..datasets import Difficulty, livesum_event
from ..errors import NotLivesumShaped
from ..tables import Table, numeric_view


@dataclass(frozen=True)
class ErrorStats:
    n: int
    rmse: float
    error_rate_pct: float

    def to_json(self) -> dict:
        return {"n": self.n, "rmse": self.rmse, "er": self.error_rate_pct}


@dataclass
class NumericReport:
    n_cells: int
    rmse: float
    error_rate_pct: float
    per_difficulty: dict[str, Optional[ErrorStats]]
    over_n: int
    over_rmse: float
    under_n: int
    under_rmse: float
    flags: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "n_cells": self.n_cells,
            "rmse": self.rmse,
            "er": self.error_rate_pct,
            "per_difficulty": {k: (v.to_json() if v else None) for k, v in self.per_difficulty.items()},
            "over": {"n": self.over_n, "rmse": self.over_rmse},
            "under": {"n": self.under_n, "rmse": self.under_rmse},
            "flags": list(self.flags),
        }


def _stats(gold: Sequence[int], pred: Sequence[int]) -> ErrorStats:
    n = len(gold)
    if n == 0:
        return ErrorStats(0, 0.0, 0.0)
    sq = sum((g - p) ** 2 for g, p in zip(gold, pred))
    wrong = sum(1 for g, p in zip(gold, pred) if g != p)
    return ErrorStats(n, math.sqrt(sq / n), 100.0 * wrong / n)


def numeric_eval_values(gold: Sequence[int], pred: Sequence[int],
                        difficulties: Optional[Sequence[Difficulty]] = None,
                        flags: Optional[list[str]] = None) -> NumericReport:
    """Core computation over already-flattened, aligned integer sequences."""
    if len(gold) != len(pred):
        raise ValueError("gold and pred sequences differ in length")
    overall = _stats(gold, pred)
    per: dict[str, Optional[ErrorStats]] = {}
    for d in Difficulty:
        if difficulties is None:
            per[d.value] = None
            continue
        idx = [i for i, dd in enumerate(difficulties) if dd is d]
        per[d.value] = _stats([gold[i] for i in idx], [pred[i] for i in idx]) if idx else None
    over = [(p - g) ** 2 for g, p in zip(gold, pred) if p > g]
    under = [(p - g) ** 2 for g, p in zip(gold, pred) if p < g]
    return NumericReport(
        n_cells=overall.n,
        rmse=overall.rmse,
        error_rate_pct=overall.error_rate_pct,
        per_difficulty=per,
        over_n=len(over),
        over_rmse=math.sqrt(sum(over) / len(over)) if over else 0.0,
        under_n=len(under),
        under_rmse=math.sqrt(sum(under) / len(under)) if under else 0.0,
        flags=list(flags or []),
    )


def _int_cell(cell) -> Optional[int]:
    view = numeric_view(cell)
    if view is None or view.percent:
        return None
    return view.as_int()


def numeric_eval(gold: Table, pred: Table, aliases=None) -> NumericReport:
    """Compare a count table against gold after aligning pred onto gold's headers.

    Every gold column must name a Livesum event and every gold cell must be an
    integer. Missing or non-integer predicted cells read as 0 and are flagged.
    """
    difficulties = []
    for col in gold.columns:
        ev = livesum_event(col)
        if ev is None:
            raise NotLivesumShaped(f"gold column {col!r} is not a Livesum event")
        difficulties.append(ev.difficulty)
    aligned = align_table(pred, gold, aliases=aliases).mapped
    flags: list[str] = []
    g_vals, p_vals, diffs = [], [], []
    for g_row, p_row in zip(gold.rows, aligned.rows):
        for col, d, g_cell, p_cell in zip(gold.columns, difficulties, g_row.cells, p_row.cells):
            g = _int_cell(g_cell)
            if g is None:
                raise NotLivesumShaped(f"gold cell ({g_row.header}, {col}) = {g_cell!r} is not an integer")
            p = _int_cell(p_cell)
            if p_cell is None:
                flags.append(f"missing: ({g_row.header}, {col})")
                p = 0
            elif p is None:
                flags.append(f"non-numeric: ({g_row.header}, {col}) = {p_cell!r}")
                p = 0
            g_vals.append(g)
            p_vals.append(p)
            diffs.append(d)
    return numeric_eval_values(g_vals, p_vals, diffs, flags)
