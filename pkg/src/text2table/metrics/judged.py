"""LLM-judged metrics: reference-less QA coverage and statement-level entailment."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from ..errors import QaParseFailure
from ..llm import Gateway
from ..tables import Table, TableSet, serialize_table, serialize_table_set
from ..templates import Templates
from .coverage import f1

_QA_LINE = re.compile(r"^\s*(?:\*\*)?([QA])\s*(\d*)\s*(?:\*\*)?\s*[:.)]\s*(?:\*\*)?\s*(.*)$", re.I)
_VERDICT = re.compile(r"\b(YES|NO)\b", re.I)


@dataclass(frozen=True)
class QaPair:
    question: str
    answer: str


@dataclass
class QaItem:
    question: str
    reference: str
    candidate: str
    correct: bool


@dataclass
class AutoQaReport:
    n_questions: int
    n_correct: int
    accuracy_pct: float
    items: list[QaItem] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "n_questions": self.n_questions,
            "n_correct": self.n_correct,
            "accuracy_pct": self.accuracy_pct,
            "items": [vars(i) for i in self.items],
            "warnings": list(self.warnings),
        }


def parse_qa_pairs(text: str) -> list[QaPair]:
    """Read ``Q1: ... / A1: ...`` lines (numbers optional). Unpaired questions are dropped."""
    pairs: list[QaPair] = []
    pending: Optional[str] = None
    for line in text.splitlines():
        m = _QA_LINE.match(line)
        if not m:
            continue
        tag, body = m.group(1).upper(), m.group(3).strip()
        if tag == "Q":
            pending = body
        elif pending is not None:
            pairs.append(QaPair(pending, body))
            pending = None
    return pairs


def parse_verdict(text: str) -> Optional[bool]:
    m = _VERDICT.search(text)
    return None if m is None else m.group(1).upper() == "YES"


def autoqa(source_text: str, tables: TableSet, gateway: Gateway, templates: Optional[Templates] = None,
           n_questions: int = 10) -> AutoQaReport:
    """Percentage of source-derived questions whose table-derived answer is judged equivalent."""
    if n_questions < 1:
        raise ValueError("n_questions must be >= 1")
    templates = templates or Templates()
    gen = gateway.complete(gateway.request(
        templates.render("autoqa/generate", n_questions=str(n_questions), input_text=source_text))).text
    pairs = parse_qa_pairs(gen)
    if not pairs:
        raise QaParseFailure("generator output holds no Q/A pairs")
    warnings = []
    if len(pairs) != n_questions:
        warnings.append(f"QaCountWarning: asked for {n_questions} pairs, got {len(pairs)}")
    serialized = serialize_table_set(tables)
    answers = [gateway.complete(gateway.request(
        templates.render("autoqa/answer", tables=serialized, question=p.question))).text.strip() for p in pairs]
    items = []
    for p, cand in zip(pairs, answers):
        reply = gateway.complete(gateway.request(
            templates.render("autoqa/judge", question=p.question, reference=p.answer, candidate=cand))).text
        verdict = parse_verdict(reply)
        if verdict is None:
            warnings.append(f"JudgeParseWarning: unreadable verdict for {p.question!r}, counted as NO")
        items.append(QaItem(p.question, p.answer, cand, bool(verdict)))
    n = len(items)
    correct = sum(i.correct for i in items)
    return AutoQaReport(n, correct, 100.0 * correct / n, items, warnings)


# ---------------------------------------------------------------------------
# statement entailment

def unroll_table(t: Table) -> list[str]:
    out = []
    for row in t.rows:
        for col, cell in zip(t.columns, row.cells):
            if cell is not None:
                out.append(f"The {col} of {row.header} in table {t.name} is {cell}.")
    return out


@dataclass(frozen=True)
class TabEvalScore:
    correctness: float
    completeness: float
    overall: float

    @classmethod
    def of(cls, correctness: float, completeness: float) -> "TabEvalScore":
        return cls(correctness, completeness, f1(correctness, completeness))

    def to_json(self) -> dict:
        return {"correctness": self.correctness, "completeness": self.completeness, "overall": self.overall}


@dataclass
class TabEvalReport:
    per_table: dict[str, TabEvalScore]
    overall: TabEvalScore
    warnings: list[str] = field(default_factory=list)

    @property
    def correctness(self) -> float:
        return self.overall.correctness

    @property
    def completeness(self) -> float:
        return self.overall.completeness

    def to_json(self) -> dict:
        return {"per_table": {k: v.to_json() for k, v in self.per_table.items()},
                "overall": self.overall.to_json(), "warnings": list(self.warnings)}


def _entailed(statements: list[str], premise: Optional[Table], gateway: Gateway, templates: Templates,
              warnings: list[str]) -> int:
    if premise is None:
        return 0
    text = serialize_table(premise)
    hits = 0
    for s in statements:
        reply = gateway.complete(gateway.request(templates.render("tabeval/entail", premise=text, statement=s))).text
        verdict = parse_verdict(reply)
        if verdict is None:
            warnings.append(f"JudgeParseWarning: unreadable verdict for {s!r}, counted as NO")
        hits += bool(verdict)
    return hits


def tabeval(pred: TableSet, gold: TableSet, gateway: Gateway, templates: Optional[Templates] = None) -> TabEvalReport:
    """Correctness: pred statements entailed by gold. Completeness: gold statements entailed by pred.

    Tables pair by normalized name; a table with no partner contributes zero hits.
    The overall score pools statements across tables.
    """
    templates = templates or Templates()
    warnings: list[str] = []
    names: list[str] = [t.name for t in gold] + [t.name for t in pred if gold.get(t.name) is None]
    per_table = {}
    tot = [0, 0, 0, 0]  # pred hits, pred n, gold hits, gold n
    for name in names:
        g, p = gold.get(name), pred.get(name)
        p_stmts = unroll_table(p) if p else []
        g_stmts = unroll_table(g) if g else []
        p_hits = _entailed(p_stmts, g, gateway, templates, warnings)
        g_hits = _entailed(g_stmts, p, gateway, templates, warnings)
        corr = p_hits / len(p_stmts) if p_stmts else 0.0
        comp = g_hits / len(g_stmts) if g_stmts else 0.0
        per_table[name] = TabEvalScore.of(corr, comp)
        tot = [tot[0] + p_hits, tot[1] + len(p_stmts), tot[2] + g_hits, tot[3] + len(g_stmts)]
    overall = TabEvalScore.of(tot[0] / tot[1] if tot[1] else 0.0, tot[2] / tot[3] if tot[3] else 0.0)
    return TabEvalReport(per_table, overall, warnings)
