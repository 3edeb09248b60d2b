"""Tuple and header coverage: every source item takes its best match on the target side."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

from ..errors import EmptySourceSide
from ..llm import Gateway
from ..tables import ContentTuple, TableSet, extract_tuples
from .similarity import Similarity, SimilarityKind


class Direction(str, Enum):
    GOLD_TO_PRED = "gold_to_pred"  # completeness / recall
    PRED_TO_GOLD = "pred_to_gold"  # correctness / precision


def _coverage(gold: Sequence[str], pred: Sequence[str], sim: Similarity, direction: Direction) -> float:
    source, target = (gold, pred) if direction is Direction.GOLD_TO_PRED else (pred, gold)
    if not source:
        raise EmptySourceSide(f"no source items for direction {direction.value}")
    if not target:
        return 0.0
    sim.prepare(list(source) + list(target))
    total = 0.0
    for s in source:
        if direction is Direction.GOLD_TO_PRED:
            total += max(sim(t, s) for t in target)
        else:
            total += max(sim(s, t) for t in target)
    return total / len(source)


def _as_similarity(kind, gateway) -> Similarity:
    return kind if isinstance(kind, Similarity) else Similarity(kind, gateway)


def tuple_coverage(gold: Sequence[ContentTuple], pred: Sequence[ContentTuple], kind: SimilarityKind | Similarity,
                   direction: Direction | str, gateway: Optional[Gateway] = None) -> float:
    """Mean over source tuples of the best similarity to any target tuple (targets reusable)."""
    return _coverage([t.as_string() for t in gold], [t.as_string() for t in pred],
                     _as_similarity(kind, gateway), Direction(direction))


def header_coverage(gold_headers: Sequence[str], pred_headers: Sequence[str], kind: SimilarityKind | Similarity,
                    direction: Direction | str, gateway: Optional[Gateway] = None) -> float:
    return _coverage(list(gold_headers), list(pred_headers), _as_similarity(kind, gateway), Direction(direction))


def f1(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float

    @classmethod
    def of(cls, precision: float, recall: float) -> "PRF":
        return cls(precision, recall, f1(precision, recall))

    def to_json(self) -> dict:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1}


@dataclass
class CoverageReport:
    """``scores[kind_label][level]`` with level in cell/row/col; None when undefined."""

    scores: dict[str, dict[str, Optional[PRF]]] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {k: {lvl: (v.to_json() if v else None) for lvl, v in levels.items()}
                for k, levels in self.scores.items()}


def table_set_items(ts: TableSet, include_absent: bool = False) -> dict[str, list[str]]:
    tuples = [tp.as_string() for t in ts for tp in extract_tuples(t, include_absent)]
    rows = [h for t in ts for h in t.row_headers]
    cols = [c for t in ts for c in t.columns]
    return {"cell": tuples, "row": rows, "col": cols}


def coverage_report(gold: TableSet, pred: TableSet, kinds: Sequence[SimilarityKind],
                    gateway: Optional[Gateway] = None, include_absent: bool = False) -> CoverageReport:
    """Cell/row/column precision, recall and F1 for one sample.

    Items are pooled across all tables of the sample. A level whose gold side is
    empty is reported as None.
    """
    g = table_set_items(gold, include_absent)
    p = table_set_items(pred, include_absent)
    report = CoverageReport()
    for kind in kinds:
        sim = Similarity(kind, gateway)
        levels: dict[str, Optional[PRF]] = {}
        for level in ("cell", "row", "col"):
            if not g[level]:
                levels[level] = None
                continue
            recall = _coverage(g[level], p[level], sim, Direction.GOLD_TO_PRED)
            precision = _coverage(g[level], p[level], sim, Direction.PRED_TO_GOLD) if p[level] else 0.0
            levels[level] = PRF.of(precision, recall)
        report.scores[kind.label] = levels
    return report
