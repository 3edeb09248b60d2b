"""Generation strategies: schema-first three-step and unified prompting, CoT and T3 baselines.

Every LLM call goes through a :class:`~text2table.llm.Gateway`, so replay and the
on-disk cache apply uniformly. Extractors anchor on the last marker occurrence.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, TypeVar

from .datasets import LIVESUM_ROWS, LivesumEvent, Sample
from .errors import (
    EmptyStatements,
    MalformedResponse,
    NoTablesFound,
    NoTuplesFound,
    SchemaNotFound,
    SchemaShapeInvalid,
    StageError,
    Text2TableError,
    TooManyStatements,
)
from .llm import Gateway, make_cache_key
from .tables import ParseMode, Schema, TableSet, normalize_header, parse_schema_json, parse_table_blocks
from .templates import Templates

T = TypeVar("T")

MAX_ATTEMPTS = 2
MAX_STATEMENTS = 600
REPAIR_INSTRUCTION = ("Your previous response could not be used ({reason}). "
                      "Reply again and follow the specified output format exactly.")
RETRYABLE = (MalformedResponse, SchemaNotFound, SchemaShapeInvalid, NoTablesFound, NoTuplesFound)


class Strategy(str, Enum):
    COT_ZERO_SHOT = "cot0"
    COT_ONE_SHOT = "cot1"
    T3 = "t3"
    T3D = "t3d"
    MM_UNIFIED = "mm-u"
    MM_3STEP = "mm-3s"


@dataclass(frozen=True)
class AblationFlags:
    disable_atomization: bool = False
    disable_iterative_schema: bool = False
    disable_iterative_table: bool = False

    @classmethod
    def parse(cls, spec: str) -> "AblationFlags":
        names = {"atomization": "disable_atomization", "iter-schema": "disable_iterative_schema",
                 "iter-table": "disable_iterative_table"}
        kwargs = {}
        for part in filter(None, (p.strip() for p in (spec or "").split(","))):
            if part not in names:
                raise ValueError(f"unknown ablation {part!r}; expected one of {sorted(names)}")
            kwargs[names[part]] = True
        return cls(**kwargs)

    def to_list(self) -> list[str]:
        out = []
        if self.disable_atomization:
            out.append("atomization")
        if self.disable_iterative_schema:
            out.append("iter-schema")
        if self.disable_iterative_table:
            out.append("iter-table")
        return out


@dataclass(frozen=True)
class AtomicStatement:
    text: str
    index: int


@dataclass
class Trace:
    """Mutable collector for one sample's calls."""

    transcript: list[tuple[str, str]] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    prompt_tokens: int = 0
    completion_tokens: int = 0


@dataclass(frozen=True)
class GenerationResult:
    sample_id: str
    tables: TableSet
    statements: tuple[AtomicStatement, ...] = ()
    schema: Schema = Schema()
    transcript: tuple[tuple[str, str], ...] = ()
    warnings: tuple[str, ...] = ()
    token_usage: tuple[int, int] = (0, 0)


# ---------------------------------------------------------------------------
# extractors

_ATOMIC_MARKER = re.compile(r"^\s*#+\s*Atomic Statements\s*:?\s*$", re.I | re.M)
_SCHEMA_MARKER = re.compile(r"^\s*#+\s*Final Schema\s*:?\s*$", re.I | re.M)
_TABLES_MARKER = re.compile(r"^\s*#+\s*Final\s+(?:Output\s+)?Tables?\s*:?\s*$", re.I | re.M)
_SECTION_END = re.compile(r"^\s*(#{1,6}\s|===|\*\*\*|\*\*Step)", re.I)
_LIST_PREFIX = re.compile(r"^\s*(?:\d+\s*[.):]|[-*•])\s+")
_TUPLE_LINE = re.compile(r"^\s*(?:\d+\s*[.):]\s*)?\((.*)\)\s*$")


def _last(pattern: re.Pattern, text: str) -> Optional[re.Match]:
    found = None
    for found in pattern.finditer(text):
        pass
    return found


def extract_statements(text: str) -> list[AtomicStatement]:
    m = _last(_ATOMIC_MARKER, text)
    if m is None:
        raise MalformedResponse("marker '### Atomic Statements:' not found")
    lines = []
    for line in text[m.end():].splitlines():
        if line.strip().startswith("```"):
            continue
        if _SECTION_END.match(line):
            break
        line = _LIST_PREFIX.sub("", line).strip()
        if line:
            lines.append(line)
    if not lines:
        raise EmptyStatements("no statements after '### Atomic Statements:'")
    return [AtomicStatement(t, i) for i, t in enumerate(lines, 1)]


def extract_final_tables(text: str, default_name: Optional[str] = None,
                         require_marker: bool = True) -> TableSet:
    m = _last(_TABLES_MARKER, text)
    if m is None and require_marker:
        raise MalformedResponse("marker '### Final Table:' / '### Final Output Tables:' not found")
    segment = text[m.end():] if m else text
    ts = parse_table_blocks(segment, ParseMode.LENIENT, default_name=default_name)
    if not ts.tables:
        raise NoTablesFound("no table rows after the final-table marker")
    return ts


def parse_tuples(text: str) -> list[tuple[str, str, str]]:
    """``(entity, attribute, value)`` lines; only the first two commas split."""
    out = []
    for line in text.splitlines():
        m = _TUPLE_LINE.match(line)
        if not m:
            continue
        parts = m.group(1).split(",", 2)
        if len(parts) < 3:
            continue
        out.append(tuple(p.strip() for p in parts))
    if not out:
        raise NoTuplesFound("no '(entity, attribute, value)' lines found")
    return out


# ---------------------------------------------------------------------------
# sentence splitting (atomization ablation)

ABBREVIATIONS = {"mr", "mrs", "ms", "dr", "jr", "sr", "st", "vs", "no", "etc", "e.g", "i.e", "approx", "inc",
                 "ft", "min", "mins", "sec"}
_BOUNDARY = re.compile(r"[.!?]+(?=\s|$)")


def split_sentences(text: str) -> list[str]:
    sentences = []
    start = 0
    for m in _BOUNDARY.finditer(text):
        end = m.end()
        before = text[start:m.start()]
        word = before.split()[-1] if before.split() else ""
        bare = word.lower().rstrip(".")
        if m.group().startswith(".") and (bare in ABBREVIATIONS or re.fullmatch(r"[A-Z]", word)
                                          or re.fullmatch(r"(?:[A-Za-z]\.)+[A-Za-z]", word)):
            continue
        piece = text[start:end].strip()
        if piece:
            sentences.append(" ".join(piece.split()))
        start = end
    tail = text[start:].strip()
    if tail:
        sentences.append(" ".join(tail.split()))
    return sentences


# ---------------------------------------------------------------------------
# stage plumbing

def _call(gateway: Gateway, trace: Trace, stage: str, prompt: str, extract: Callable[[str], T],
          max_attempts: int = MAX_ATTEMPTS) -> T:
    req = gateway.request(prompt)
    last_exc: Optional[Exception] = None
    for attempt in range(max_attempts):
        resp = gateway.complete(req)
        trace.transcript.append((stage if attempt == 0 else f"{stage}:retry{attempt}", make_cache_key(req)))
        trace.prompt_tokens += resp.prompt_tokens
        trace.completion_tokens += resp.completion_tokens
        try:
            return extract(resp.text)
        except RETRYABLE as exc:
            last_exc = exc
            trace.warnings.append(f"{stage}: attempt {attempt + 1} unusable: {exc}")
            req = req.followup(resp.text, REPAIR_INSTRUCTION.format(reason=exc))
    assert last_exc is not None
    raise last_exc


def format_statements(statements: list[AtomicStatement]) -> str:
    return "\n".join(f"{s.index}. {s.text}" for s in statements)


def _check_budget(statements: list[AtomicStatement], max_statements: int) -> None:
    if len(statements) > max_statements:
        raise TooManyStatements(f"{len(statements)} statements exceed the limit of {max_statements}")


def atomize(text: str, gateway: Gateway, templates: Templates, trace: Optional[Trace] = None) -> list[AtomicStatement]:
    if not text.strip():
        raise ValueError("atomize() needs non-empty text")
    trace = trace if trace is not None else Trace()
    prompt = templates.render("mm-3s/atomize", input_text=text)
    return _call(gateway, trace, "atomize", prompt, extract_statements)


def extract_schema(statements: list[AtomicStatement], gateway: Gateway, templates: Templates,
                   iterative: bool = True, trace: Optional[Trace] = None) -> Schema:
    if not statements:
        raise ValueError("extract_schema() needs statements")
    trace = trace if trace is not None else Trace()
    name = "mm-3s/schema" if iterative else "mm-3s/schema_direct"
    prompt = templates.render(name, statements=format_statements(statements))
    return _call(gateway, trace, "schema", prompt, parse_schema_json)


def _default_table_name(schema: Schema) -> Optional[str]:
    return schema.tables[0].name if len(schema) == 1 else None


def fill_tables(statements: list[AtomicStatement], schema: Schema, gateway: Gateway, templates: Templates,
                iterative: bool = True, trace: Optional[Trace] = None) -> TableSet:
    if not len(schema):
        raise ValueError("fill_tables() needs a non-empty schema")
    trace = trace if trace is not None else Trace()
    name = "mm-3s/table" if iterative else "mm-3s/table_direct"
    prompt = templates.render(name, statements=format_statements(statements), schema_json=schema.dumps())
    default = _default_table_name(schema)
    return _call(gateway, trace, "table", prompt, lambda t: extract_final_tables(t, default))


def t3_extract_tuples(text: str, gateway: Gateway, templates: Templates,
                      trace: Optional[Trace] = None) -> list[tuple[str, str, str]]:
    if not text.strip():
        raise ValueError("t3_extract_tuples() needs non-empty text")
    trace = trace if trace is not None else Trace()
    prompt = templates.render("t3/tuples", input_text=text)
    return _call(gateway, trace, "tuples", prompt, parse_tuples)


# ---------------------------------------------------------------------------
# deterministic event counting (replaces model-written aggregation code)

_EVENT_KEYWORDS: list[tuple[re.Pattern, tuple[LivesumEvent, ...]]] = [
    (re.compile(r"second yellow|red card|sent off|sending off|dismiss"), (LivesumEvent.RED_CARDS,)),
    (re.compile(r"yellow|booking|booked|caution"), (LivesumEvent.YELLOW_CARDS,)),
    (re.compile(r"\bown goal\b|\bgoals?\b(?! kick)|\bscor"), (LivesumEvent.GOALS, LivesumEvent.SHOTS)),
    (re.compile(r"corner"), (LivesumEvent.CORNER_KICKS,)),
    (re.compile(r"offside"), (LivesumEvent.OFFSIDES,)),
    (re.compile(r"free kick|free-kick|freekick|penalt"), (LivesumEvent.FREE_KICKS,)),
    (re.compile(r"foul|handball|hand ball|dangerous play"), (LivesumEvent.FOULS,)),
    (re.compile(r"shot|attempt|header|saved|blocked|missed|miss\b"), (LivesumEvent.SHOTS,)),
]


def classify_event(attribute: str) -> tuple[LivesumEvent, ...]:
    key = normalize_header(attribute)
    for pattern, events in _EVENT_KEYWORDS:
        if pattern.search(key):
            return events
    return ()


def _team_of(entity: str) -> Optional[str]:
    key = normalize_header(entity)
    if "home" in key:
        return LIVESUM_ROWS[0]
    if "away" in key:
        return LIVESUM_ROWS[1]
    return None


def count_event_tuples(tuples: list[tuple[str, str, str]]) -> tuple[list[tuple[str, str, int]], list[str]]:
    """Count one occurrence per event tuple, keyed by team and normalised attribute.

    Goals also count as shots; handball/dangerous play count as fouls; a second
    yellow counts as a red card; penalties count as free kicks.
    """
    counts: Counter = Counter()
    skipped = []
    for entity, attribute, value in tuples:
        team = _team_of(entity)
        events = classify_event(attribute) or classify_event(value)
        if team is None or not events:
            skipped.append(f"uncounted tuple ({entity}, {attribute}, {value})")
            continue
        for ev in events:
            counts[(team, ev)] += 1
    rows = [(team, ev.value, counts[(team, ev)]) for team in LIVESUM_ROWS for ev in LivesumEvent]
    return rows, skipped


def format_tuples(tuples) -> str:
    return "\n".join(f"{i}. ({a}, {b}, {c})" for i, (a, b, c) in enumerate(tuples, 1))


# ---------------------------------------------------------------------------
# strategies

STAGES = {
    Strategy.COT_ZERO_SHOT: ("generate",),
    Strategy.COT_ONE_SHOT: ("generate",),
    Strategy.T3: ("tuples", "tuple_table"),
    Strategy.T3D: ("generate",),
    Strategy.MM_UNIFIED: ("unified",),
    Strategy.MM_3STEP: ("atomize", "schema", "table"),
}


def _unified_prompt(text: str, statements: Optional[list[AtomicStatement]], flags: AblationFlags,
                    templates: Templates) -> str:
    schema_part = templates.instructions("mm-3s/schema_direct" if flags.disable_iterative_schema else "mm-3s/schema")
    table_part = templates.instructions("mm-3s/table_direct" if flags.disable_iterative_table else "mm-3s/table")
    if statements is None:
        return templates.render("mm-u/generate", stage_atomize=templates.instructions("mm-3s/atomize"),
                                stage_schema=schema_part, stage_table=table_part, input_text=text)
    return templates.render("mm-u/generate_statements", stage_schema=schema_part, stage_table=table_part,
                            statements=format_statements(statements))


def _parse_unified(text: str, want_statements: bool):
    statements = extract_statements(text) if want_statements else None
    tables_at = _last(_TABLES_MARKER, text)
    schema = parse_schema_json(text[:tables_at.start()] if tables_at else text)
    tables = extract_final_tables(text, _default_table_name(schema))
    return statements, schema, tables


def _sentence_statements(text: str) -> list[AtomicStatement]:
    sentences = split_sentences(text)
    if not sentences:
        raise EmptyStatements("sentence splitter produced no statements")
    return [AtomicStatement(s, i) for i, s in enumerate(sentences, 1)]


def run_strategy(sample: Sample, strategy: Strategy | str, flags: AblationFlags = AblationFlags(), *,
                 gateway: Gateway, templates: Templates, counting: Optional[bool] = None,
                 max_statements: int = MAX_STATEMENTS) -> GenerationResult:
    """Run one strategy on one sample.

    ``counting`` selects deterministic event aggregation for T3; it defaults to
    True for Livesum samples. Stage failures surface as :class:`StageError`
    carrying the partial transcript.
    """
    strategy = Strategy(strategy)
    if not sample.text.strip():
        raise ValueError(f"sample {sample.id!r} has empty text")
    if counting is None:
        counting = sample.meta.get("kind") == "livesum"
    trace = Trace()
    statements: list[AtomicStatement] = []
    schema = Schema()
    stage = STAGES[strategy][0]
    try:
        if strategy in (Strategy.COT_ZERO_SHOT, Strategy.COT_ONE_SHOT, Strategy.T3D):
            name = {Strategy.COT_ZERO_SHOT: "cot0/generate", Strategy.COT_ONE_SHOT: "cot1/generate",
                    Strategy.T3D: "t3d/generate"}[strategy]
            prompt = templates.render(name, input_text=sample.text)
            tables = _call(gateway, trace, stage, prompt,
                           lambda t: extract_final_tables(t, "Table", require_marker=False))
        elif strategy is Strategy.T3:
            tuples = t3_extract_tuples(sample.text, gateway, templates, trace)
            if counting:
                tuples, skipped = count_event_tuples(tuples)
                trace.warnings.extend(skipped)
            stage = "tuple_table"
            prompt = templates.render("t3/table", tuples=format_tuples(tuples))
            tables = _call(gateway, trace, stage, prompt,
                           lambda t: extract_final_tables(t, "Table", require_marker=False))
        elif strategy is Strategy.MM_3STEP:
            if flags.disable_atomization:
                stage = "split"
                statements = _sentence_statements(sample.text)
            else:
                statements = atomize(sample.text, gateway, templates, trace)
            _check_budget(statements, max_statements)
            stage = "schema"
            schema = extract_schema(statements, gateway, templates, not flags.disable_iterative_schema, trace)
            stage = "table"
            tables = fill_tables(statements, schema, gateway, templates, not flags.disable_iterative_table, trace)
        else:
            given = None
            if flags.disable_atomization:
                stage = "split"
                given = _sentence_statements(sample.text)
                _check_budget(given, max_statements)
                stage = "unified"
            prompt = _unified_prompt(sample.text, given, flags, templates)
            found, schema, tables = _call(gateway, trace, stage, prompt,
                                          lambda t: _parse_unified(t, given is None))
            statements = given if given is not None else found
            _check_budget(statements, max_statements)
    except StageError:
        raise
    except (Text2TableError, ValueError) as exc:
        raise StageError(stage, exc, trace.transcript) from exc

    warnings = list(trace.warnings) + list(tables.warnings)
    return GenerationResult(
        sample_id=sample.id,
        tables=TableSet(tables.tables),
        statements=tuple(statements),
        schema=schema,
        transcript=tuple(trace.transcript),
        warnings=tuple(warnings),
        token_usage=(trace.prompt_tokens, trace.completion_tokens),
    )
