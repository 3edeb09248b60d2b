"""String similarity kernels: exact match, chrF, embedding cosine."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

from ..llm import Gateway, cosine

DEFAULT_CHRF_N = 6
DEFAULT_CHRF_BETA = 2.0


@lru_cache(maxsize=65536)
def _profile(s: str, max_n: int) -> tuple[Counter, ...]:
    return tuple(Counter(s[i:i + n] for i in range(len(s) - n + 1)) for n in range(1, max_n + 1))


def chrf(hypothesis: str, reference: str, max_n: int = DEFAULT_CHRF_N, beta: float = DEFAULT_CHRF_BETA) -> float:
    """Character n-gram F-score in [0, 1].

    Precision and recall are averaged over the orders 1..max_n for which the
    reference has at least one n-gram. Whitespace is removed first.
    """
    if max_n < 1:
        raise ValueError("max_n must be >= 1")
    if beta <= 0:
        raise ValueError("beta must be > 0")
    hyp = "".join(hypothesis.split())
    ref = "".join(reference.split())
    if not hyp and not ref:
        return 1.0
    precisions, recalls = [], []
    for hyp_grams, ref_grams in zip(_profile(hyp, max_n), _profile(ref, max_n)):
        ref_total = sum(ref_grams.values())
        if ref_total == 0:
            continue
        hyp_total = sum(hyp_grams.values())
        matches = sum((hyp_grams & ref_grams).values())
        precisions.append(matches / hyp_total if hyp_total else 0.0)
        recalls.append(matches / ref_total)
    if not recalls:
        return 0.0
    p = sum(precisions) / len(precisions)
    r = sum(recalls) / len(recalls)
    b2 = beta * beta
    denom = b2 * p + r
    if denom == 0:
        return 0.0
    return (1 + b2) * p * r / denom


@dataclass(frozen=True)
class SimilarityKind:
    """``name`` is one of ``em``, ``chrf``, ``embed``."""

    name: str
    max_n: int = DEFAULT_CHRF_N
    beta: float = DEFAULT_CHRF_BETA
    normalize_case: bool = False

    @classmethod
    def exact(cls, normalize_case: bool = False) -> "SimilarityKind":
        return cls("em", normalize_case=normalize_case)

    @classmethod
    def chrf(cls, max_n: int = DEFAULT_CHRF_N, beta: float = DEFAULT_CHRF_BETA,
             normalize_case: bool = False) -> "SimilarityKind":
        return cls("chrf", max_n, beta, normalize_case)

    @classmethod
    def embedding(cls, normalize_case: bool = False) -> "SimilarityKind":
        return cls("embed", normalize_case=normalize_case)

    @property
    def label(self) -> str:
        if self.name == "chrf":
            return f"chrf(n={self.max_n},beta={self.beta:g})"
        if self.name == "embed":
            return "embedding-cosine"
        return "exact-match"


class Similarity:
    """Pairwise scorer bound to a kind; embedding vectors are fetched lazily and memoised."""

    def __init__(self, kind: SimilarityKind, gateway: Optional[Gateway] = None):
        if kind.name not in ("em", "chrf", "embed"):
            raise ValueError(f"unknown similarity kind {kind.name!r}")
        if kind.name == "embed" and gateway is None:
            raise ValueError("embedding similarity needs a gateway")
        self.kind = kind
        self.gateway = gateway
        self._vectors: dict[str, list[float]] = {}

    def prepare(self, strings: Sequence[str]) -> None:
        if self.kind.name != "embed":
            return
        todo = sorted({self._norm(s) for s in strings} - self._vectors.keys())
        if todo:
            for s, v in zip(todo, self.gateway.embed(todo)):
                self._vectors[s] = v

    def _norm(self, s: str) -> str:
        return s.lower() if self.kind.normalize_case else s

    def __call__(self, pred: str, gold: str) -> float:
        pred, gold = self._norm(pred), self._norm(gold)
        if self.kind.name == "em":
            return 1.0 if pred == gold else 0.0
        if self.kind.name == "chrf":
            return chrf(pred, gold, self.kind.max_n, self.kind.beta)
        self.prepare([pred, gold])
        return max(0.0, min(1.0, cosine(self._vectors[pred], self._vectors[gold])))
