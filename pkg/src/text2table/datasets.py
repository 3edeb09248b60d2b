"""Benchmark corpora in canonical JSONL form, plus the Livesum event taxonomy."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional, Union

from .errors import DuplicateId, SchemaViolation, UnknownEvent
from .tables import Table, TableSet, normalize_header, numeric_view, table_set_from_json, table_set_to_json


class DatasetKind(str, Enum):
    ROTOWIRE = "rotowire"
    LIVESUM = "livesum"
    GENERIC = "generic"


class Difficulty(str, Enum):
    EASY = "Easy"
    MEDIUM = "Medium"
    HARD = "Hard"


class LivesumEvent(str, Enum):
    GOALS = "Goals"
    SHOTS = "Shots"
    FOULS = "Fouls"
    YELLOW_CARDS = "Yellow Cards"
    RED_CARDS = "Red Cards"
    CORNER_KICKS = "Corner Kicks"
    FREE_KICKS = "Free Kicks"
    OFFSIDES = "Offsides"

    @property
    def difficulty(self) -> Difficulty:
        return EVENT_DIFFICULTY[self]


EVENT_DIFFICULTY = {
    LivesumEvent.GOALS: Difficulty.EASY,
    LivesumEvent.RED_CARDS: Difficulty.EASY,
    LivesumEvent.SHOTS: Difficulty.HARD,
    LivesumEvent.FOULS: Difficulty.HARD,
    LivesumEvent.YELLOW_CARDS: Difficulty.MEDIUM,
    LivesumEvent.CORNER_KICKS: Difficulty.MEDIUM,
    LivesumEvent.FREE_KICKS: Difficulty.MEDIUM,
    LivesumEvent.OFFSIDES: Difficulty.MEDIUM,
}

LIVESUM_ROWS = ("Home Team", "Away Team")

EVENT_ALIASES = {
    LivesumEvent.GOALS: ["goals", "goal", "goals scored"],
    LivesumEvent.SHOTS: ["shots", "shot", "attempts", "shot attempts", "total shots"],
    LivesumEvent.FOULS: ["fouls", "foul", "fouls committed"],
    LivesumEvent.YELLOW_CARDS: ["yellow cards", "yellow card", "yellows", "bookings", "booking"],
    LivesumEvent.RED_CARDS: ["red cards", "red card", "reds", "sending offs", "sendings off", "dismissals"],
    LivesumEvent.CORNER_KICKS: ["corner kicks", "corner kick", "corners", "corner"],
    LivesumEvent.FREE_KICKS: ["free kicks", "free kick", "freekicks", "set pieces"],
    LivesumEvent.OFFSIDES: ["offsides", "offside"],
}
_ALIAS_INDEX = {alias: ev for ev, aliases in EVENT_ALIASES.items() for alias in aliases}


def livesum_event(header: str) -> Optional[LivesumEvent]:
    return _ALIAS_INDEX.get(normalize_header(header))


def livesum_difficulty(column_header: str) -> Difficulty:
    ev = livesum_event(column_header)
    if ev is None:
        raise UnknownEvent(f"{column_header!r} is not one of the eight Livesum events")
    return ev.difficulty


@dataclass(frozen=True)
class Sample:
    id: str
    text: str
    gold: TableSet = TableSet()
    meta: dict = field(default_factory=dict, hash=False)

    def to_json(self) -> dict:
        obj = {"id": self.id, "text": self.text, "tables": table_set_to_json(self.gold)}
        if self.meta:
            obj["meta"] = dict(self.meta)
        return obj


def _check_rotowire(sid: str, gold: TableSet) -> None:
    names = sorted(t.name for t in gold)
    if names != ["Player", "Team"]:
        raise SchemaViolation(sid, f"rotowire gold must contain exactly tables 'Team' and 'Player', got {names}")


def check_livesum_table(sid: str, t: Table) -> None:
    rows = {normalize_header(h) for h in t.row_headers}
    want_rows = {normalize_header(h) for h in LIVESUM_ROWS}
    if rows != want_rows:
        raise SchemaViolation(sid, f"livesum gold rows must be {list(LIVESUM_ROWS)}, got {t.row_headers}")
    events = [livesum_event(c) for c in t.columns]
    unknown = [c for c, ev in zip(t.columns, events) if ev is None]
    if unknown:
        raise SchemaViolation(sid, f"livesum gold has non-event columns {unknown}")
    missing = [ev.value for ev in LivesumEvent if ev not in events]
    if missing:
        raise SchemaViolation(sid, f"livesum gold is missing event columns {missing}")
    if len(events) != len(set(events)):
        raise SchemaViolation(sid, "livesum gold repeats an event column")
    for r in t.rows:
        for col, cell in zip(t.columns, r.cells):
            view = numeric_view(cell)
            if view is None or view.percent or view.as_int() is None:
                raise SchemaViolation(sid, f"livesum cell ({r.header}, {col}) = {cell!r} is not an integer")


def _check_livesum(sid: str, gold: TableSet) -> None:
    if len(gold) != 1:
        raise SchemaViolation(sid, f"livesum gold must have exactly one table, got {len(gold)}")
    check_livesum_table(sid, gold.tables[0])


def parse_record(obj: dict, kind: DatasetKind) -> Sample:
    sid = obj.get("id")
    if not isinstance(sid, str) or not sid:
        raise SchemaViolation(str(sid), "record needs a non-empty string 'id'")
    text = obj.get("text")
    if not isinstance(text, str) or not text.strip():
        raise SchemaViolation(sid, "record needs non-empty 'text'")
    try:
        gold = table_set_from_json(obj.get("tables") or [])
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaViolation(sid, f"malformed tables: {exc}") from None
    if kind is DatasetKind.ROTOWIRE:
        _check_rotowire(sid, gold)
    elif kind is DatasetKind.LIVESUM:
        _check_livesum(sid, gold)
    meta = {str(k): str(v) for k, v in (obj.get("meta") or {}).items()}
    meta.setdefault("kind", kind.value)
    return Sample(sid, text, gold, meta)


def load_dataset(path: Union[str, Path], kind: Union[DatasetKind, str] = DatasetKind.GENERIC,
                 limit: Optional[int] = None) -> list[Sample]:
    """Load a JSONL corpus; ``limit`` keeps the first N records."""
    kind = DatasetKind(kind)
    samples: list[Sample] = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            if limit is not None and len(samples) >= limit:
                break
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaViolation(f"line {lineno}", f"invalid JSON: {exc}") from None
            sample = parse_record(obj, kind)
            if sample.id in seen:
                raise DuplicateId(f"duplicate sample id {sample.id!r} at line {lineno}")
            seen.add(sample.id)
            samples.append(sample)
    return samples


def write_dataset(path: Union[str, Path], samples: Iterable[Sample]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in samples:
            fh.write(json.dumps(s.to_json(), ensure_ascii=False) + "\n")
