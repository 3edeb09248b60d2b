"""Prompt templates stored as ``<dir>/<strategy>/<stage>.txt`` with ``{{placeholder}}`` slots."""

from __future__ import annotations

import hashlib
import re
from functools import lru_cache
from pathlib import Path
from typing import Optional, Union

from .errors import TemplateError

DEFAULT_DIR = Path(__file__).parent / "prompts"
_SLOT_RE = re.compile(r"\{\{\s*([a-zA-Z_][a-zA-Z0-9_]*)\s*\}\}")
INPUT_TAIL_MARKER = "\n**Input**:"


class Templates:
    def __init__(self, directory: Optional[Union[str, Path]] = None):
        self.directory = Path(directory) if directory else DEFAULT_DIR
        if not self.directory.is_dir():
            raise TemplateError(f"template directory {self.directory} does not exist")

    def raw(self, name: str) -> str:
        path = self.directory / f"{name}.txt"
        if not path.is_file():
            raise TemplateError(f"missing template {name!r} in {self.directory}")
        return _read(str(path))

    def instructions(self, name: str) -> str:
        """Template text without its trailing input section."""
        text = self.raw(name)
        cut = text.rfind(INPUT_TAIL_MARKER)
        return (text[:cut] if cut >= 0 else text).rstrip()

    def render(self, name: str, **values: str) -> str:
        return render(self.raw(name), **values)

    def digest(self) -> str:
        h = hashlib.sha256()
        for path in sorted(self.directory.rglob("*.txt")):
            h.update(path.relative_to(self.directory).as_posix().encode())
            h.update(b"\0")
            h.update(path.read_bytes())
            h.update(b"\0")
        return h.hexdigest()


@lru_cache(maxsize=256)
def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def render(template: str, **values: str) -> str:
    missing = sorted({m.group(1) for m in _SLOT_RE.finditer(template)} - values.keys())
    if missing:
        raise TemplateError(f"no value for placeholder(s) {missing}")
    return _SLOT_RE.sub(lambda m: str(values[m.group(1)]), template)
