"""Backend-agnostic chat/embedding access with replay and a content-addressed cache.

Three backends are supported:

* ``http-chat``: an OpenAI-style ``/chat/completions`` + ``/embeddings`` server
* ``replay``: a directory of ``<digest>.json`` files recorded earlier
* ``scripted``: an in-memory queue, used by tests and fixture recording

:class:`Gateway` wraps a backend with the on-disk cache and the parallelism bound.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import tempfile
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Optional, Sequence, Union

import httpx

from .errors import (
    AuthMissing,
    BackendExhausted,
    DimensionMismatch,
    EmptyInput,
    GatewayError,
    ReplayMiss,
    ScriptedQueueEmpty,
)

log = logging.getLogger(__name__)

API_KEY_ENV = "TEXT2TABLE_API_KEY"
ROLES = ("system", "user", "assistant")


@dataclass(frozen=True)
class Message:
    role: str
    content: str

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"unknown role {self.role!r}")


@dataclass(frozen=True)
class ChatRequest:
    model: str
    messages: tuple[Message, ...]
    temperature: float = 0.0
    top_p: float = 1.0
    max_tokens: Optional[int] = None
    top_k: Optional[int] = None

    def __post_init__(self):
        msgs = tuple(m if isinstance(m, Message) else Message(*m) for m in self.messages)
        object.__setattr__(self, "messages", msgs)
        if not msgs:
            raise ValueError("messages must be non-empty")
        if msgs[-1].role != "user":
            raise ValueError("last message must have role 'user'")
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError("temperature must be in [0, 2]")
        if not 0.0 < self.top_p <= 1.0:
            raise ValueError("top_p must be in (0, 1]")
        if self.max_tokens is not None and self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")

    @classmethod
    def user(cls, model: str, prompt: str, **params) -> "ChatRequest":
        return cls(model, (Message("user", prompt),), **params)

    def to_json(self) -> dict:
        return {
            "model": self.model,
            "messages": [{"role": m.role, "content": m.content} for m in self.messages],
            "temperature": float(self.temperature),
            "top_p": float(self.top_p),
            "max_tokens": self.max_tokens,
            "top_k": self.top_k,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ChatRequest":
        return cls(
            obj["model"],
            tuple(Message(m["role"], m["content"]) for m in obj["messages"]),
            temperature=obj.get("temperature", 0.0),
            top_p=obj.get("top_p", 1.0),
            max_tokens=obj.get("max_tokens"),
            top_k=obj.get("top_k"),
        )

    def followup(self, assistant_text: str, user_text: str) -> "ChatRequest":
        msgs = self.messages + (Message("assistant", assistant_text), Message("user", user_text))
        return ChatRequest(self.model, msgs, self.temperature, self.top_p, self.max_tokens, self.top_k)


@dataclass(frozen=True)
class ChatResponse:
    text: str
    prompt_tokens: int = 0
    completion_tokens: int = 0
    cached: bool = False
    backend_id: str = ""

    def to_json(self) -> dict:
        return {
            "text": self.text,
            "prompt_tokens": self.prompt_tokens,
            "completion_tokens": self.completion_tokens,
            "backend_id": self.backend_id,
        }


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def make_cache_key(req: ChatRequest) -> str:
    """SHA-256 hex digest of the canonical JSON form of ``req``."""
    return hashlib.sha256(canonical_json(req.to_json()).encode("utf-8")).hexdigest()


def embedding_cache_key(model: str, texts: Sequence[str]) -> str:
    payload = {"kind": "embedding", "model": model, "input": list(texts)}
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()


def write_once_json(path: Path, obj: Any) -> bool:
    """Atomically create ``path``; returns False if it already existed."""
    path = Path(path)
    if path.exists():
        return False
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=".json")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(obj, fh, ensure_ascii=False, indent=2, sort_keys=True)
        try:
            os.link(tmp, path)
        except FileExistsError:
            return False
        except OSError:
            if path.exists():
                return False
            os.replace(tmp, path)
            return True
        return True
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def atomic_write_text(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


# ---------------------------------------------------------------------------
# backends

class Backend:
    backend_id = "backend"

    def complete(self, req: ChatRequest) -> ChatResponse:
        raise NotImplementedError

    def embed(self, texts: Sequence[str], model: str) -> list[list[float]]:
        raise GatewayError(f"{self.backend_id} backend does not support embeddings")

    def describe(self) -> dict:
        return {"kind": self.backend_id}


ScriptItem = Union[str, Exception]


class ScriptedBackend(Backend):
    """Pops queued responses in order. ``responder`` takes over once the queue is empty."""

    backend_id = "scripted"

    def __init__(self, responses: Iterable[ScriptItem] = (),
                 responder: Optional[Callable[[ChatRequest], str]] = None,
                 embedder: Optional[Union[dict, Callable[[str], Sequence[float]]]] = None):
        self._queue = deque(responses)
        self._responder = responder
        self._embedder = embedder
        self._lock = threading.Lock()
        self.requests: list[ChatRequest] = []

    def push(self, *items: ScriptItem) -> None:
        with self._lock:
            self._queue.extend(items)

    def complete(self, req: ChatRequest) -> ChatResponse:
        with self._lock:
            self.requests.append(req)
            if self._queue:
                item = self._queue.popleft()
            elif self._responder is not None:
                item = self._responder(req)
            else:
                raise ScriptedQueueEmpty("scripted backend has no queued responses")
        if isinstance(item, Exception):
            raise item
        return ChatResponse(text=item, backend_id=self.backend_id)

    def embed(self, texts: Sequence[str], model: str) -> list[list[float]]:
        if self._embedder is None:
            raise GatewayError("scripted backend has no embedder")
        if callable(self._embedder):
            return [list(self._embedder(t)) for t in texts]
        try:
            return [list(self._embedder[t]) for t in texts]
        except KeyError as exc:
            raise GatewayError(f"no scripted embedding for {exc.args[0]!r}") from None


class ReplayBackend(Backend):
    """Serves responses recorded as ``<dir>/<digest>.json`` (cache-entry shape)."""

    backend_id = "replay"

    def __init__(self, fixture_dir: Union[str, Path]):
        self.fixture_dir = Path(fixture_dir)

    def _load(self, digest: str) -> dict:
        path = self.fixture_dir / f"{digest}.json"
        if not path.is_file():
            raise ReplayMiss(f"no replay fixture {path}")
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)

    def complete(self, req: ChatRequest) -> ChatResponse:
        entry = self._load(make_cache_key(req))
        resp = entry["response"]
        return ChatResponse(
            text=resp["text"],
            prompt_tokens=resp.get("prompt_tokens", 0),
            completion_tokens=resp.get("completion_tokens", 0),
            backend_id=self.backend_id,
        )

    def embed(self, texts: Sequence[str], model: str) -> list[list[float]]:
        return self._load(embedding_cache_key(model, texts))["response"]["vectors"]

    def describe(self) -> dict:
        return {"kind": self.backend_id, "fixture_dir": str(self.fixture_dir)}


RETRYABLE_STATUS = {429, 500, 502, 503, 504}


class HttpChatBackend(Backend):
    """OpenAI-compatible HTTP backend with exponential backoff on transient failures."""

    backend_id = "http-chat"

    def __init__(self, base_url: str, api_key: Optional[str] = None, *, timeout: float = 120.0,
                 max_attempts: int = 5, backoff_base: float = 1.0, backoff_factor: float = 2.0,
                 send_top_k: bool = False, transport: Optional[httpx.BaseTransport] = None,
                 sleep: Callable[[float], None] = time.sleep):
        self.base_url = base_url.rstrip("/")
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)
        self.max_attempts = max_attempts
        self.backoff_base = backoff_base
        self.backoff_factor = backoff_factor
        self.send_top_k = send_top_k
        self._sleep = sleep
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def describe(self) -> dict:
        return {"kind": self.backend_id, "base_url_host": httpx.URL(self.base_url).host}

    def _post(self, path: str, body: dict) -> dict:
        if not self.api_key:
            raise AuthMissing(f"http-chat backend needs an API key (set {API_KEY_ENV})")
        headers = {"Authorization": f"Bearer {self.api_key}"}
        last_error: Optional[str] = None
        for attempt in range(self.max_attempts):
            if attempt:
                self._sleep(self.backoff_base * self.backoff_factor ** (attempt - 1))
            try:
                resp = self._client.post(f"{self.base_url}{path}", json=body, headers=headers)
            except (httpx.TimeoutException, httpx.TransportError) as exc:
                last_error = f"{type(exc).__name__}: {exc}"
                log.warning("attempt %d/%d failed: %s", attempt + 1, self.max_attempts, last_error)
                continue
            if resp.status_code in RETRYABLE_STATUS:
                last_error = f"HTTP {resp.status_code}"
                log.warning("attempt %d/%d failed: %s", attempt + 1, self.max_attempts, last_error)
                continue
            if resp.status_code in (401, 403):
                raise AuthMissing(f"HTTP {resp.status_code} from {self.base_url}")
            if resp.status_code >= 400:
                raise GatewayError(f"HTTP {resp.status_code}: {resp.text[:200]}")
            return resp.json()
        raise BackendExhausted(f"{self.max_attempts} attempts failed; last error: {last_error}")

    def complete(self, req: ChatRequest) -> ChatResponse:
        body: dict[str, Any] = {
            "model": req.model,
            "messages": [{"role": m.role, "content": m.content} for m in req.messages],
            "temperature": req.temperature,
            "top_p": req.top_p,
        }
        if req.max_tokens is not None:
            body["max_tokens"] = req.max_tokens
        if self.send_top_k and req.top_k is not None:
            body["top_k"] = req.top_k
        data = self._post("/chat/completions", body)
        try:
            text = data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError):
            raise GatewayError("malformed chat-completions payload") from None
        usage = data.get("usage") or {}
        return ChatResponse(
            text=text if text is not None else "",
            prompt_tokens=int(usage.get("prompt_tokens", 0)),
            completion_tokens=int(usage.get("completion_tokens", 0)),
            backend_id=self.backend_id,
        )

    def embed(self, texts: Sequence[str], model: str) -> list[list[float]]:
        data = self._post("/embeddings", {"model": model, "input": list(texts)})
        items = sorted(data["data"], key=lambda d: d.get("index", 0))
        return [list(d["embedding"]) for d in items]


# ---------------------------------------------------------------------------
# configuration

@dataclass
class BackendConfig:
    kind: str = "scripted"
    model: str = "default"
    base_url: Optional[str] = None
    api_key: Optional[str] = None
    api_key_env: str = API_KEY_ENV
    fixture_dir: Optional[str] = None
    temperature: float = 0.0
    top_p: float = 1.0
    top_k: Optional[int] = None
    max_tokens: Optional[int] = None
    embedding_model: Optional[str] = None
    send_top_k: bool = False
    extra: dict = field(default_factory=dict)

    @classmethod
    def parse(cls, spec: str) -> "BackendConfig":
        """Accepts ``replay:<dir>``, ``http:<base_url>``, or a JSON config file path."""
        if spec.startswith("replay:"):
            return cls(kind="replay", fixture_dir=spec[len("replay:"):])
        if spec.startswith("http:") or spec.startswith("https:"):
            url = spec[len("http:"):] if spec.startswith("http:") and not spec.startswith("http://") else spec
            return cls(kind="http-chat", base_url=url)
        with open(spec, encoding="utf-8") as fh:
            obj = json.load(fh)
        known = {k: v for k, v in obj.items() if k in cls.__dataclass_fields__}
        cfg = cls(**known)
        cfg.extra = {k: v for k, v in obj.items() if k not in cls.__dataclass_fields__}
        return cfg

    def build(self) -> Backend:
        if self.kind == "replay":
            if not self.fixture_dir:
                raise ValueError("replay backend needs fixture_dir")
            return ReplayBackend(self.fixture_dir)
        if self.kind == "http-chat":
            if not self.base_url:
                raise ValueError("http-chat backend needs base_url")
            key = self.api_key if self.api_key else os.environ.get(self.api_key_env)
            return HttpChatBackend(self.base_url, key, send_top_k=self.send_top_k)
        if self.kind == "scripted":
            return ScriptedBackend()
        raise ValueError(f"unknown backend kind {self.kind!r}")

    def sampling(self) -> dict:
        return {"temperature": self.temperature, "top_p": self.top_p, "top_k": self.top_k,
                "max_tokens": self.max_tokens}


# ---------------------------------------------------------------------------
# gateway

@dataclass
class Usage:
    prompt_tokens: int = 0
    completion_tokens: int = 0
    backend_calls: int = 0
    cache_hits: int = 0


class Gateway:
    """Thread-safe front door: cache lookup, bounded concurrency, usage accounting."""

    def __init__(self, backend: Backend, *, model: str = "default", cache_dir: Optional[Union[str, Path]] = None,
                 parallelism: int = 4, temperature: float = 0.0, top_p: float = 1.0,
                 top_k: Optional[int] = None, max_tokens: Optional[int] = None,
                 embedding_model: Optional[str] = None):
        self.backend = backend
        self.model = model
        self.embedding_model = embedding_model or model
        self.cache_dir = Path(cache_dir) if cache_dir else None
        self.sampling = {"temperature": temperature, "top_p": top_p, "top_k": top_k, "max_tokens": max_tokens}
        self._slots = threading.BoundedSemaphore(max(1, parallelism))
        self._lock = threading.Lock()
        self.usage = Usage()

    @classmethod
    def from_config(cls, cfg: BackendConfig, cache_dir=None, parallelism: int = 4) -> "Gateway":
        return cls(cfg.build(), model=cfg.model, cache_dir=cache_dir, parallelism=parallelism,
                   embedding_model=cfg.embedding_model, **cfg.sampling())

    def request(self, prompt: str) -> ChatRequest:
        return ChatRequest.user(self.model, prompt, **self.sampling)

    def _cache_path(self, digest: str) -> Optional[Path]:
        return self.cache_dir / f"{digest}.json" if self.cache_dir else None

    def complete(self, req: ChatRequest) -> ChatResponse:
        digest = make_cache_key(req)
        path = self._cache_path(digest)
        if path is not None and path.is_file():
            with open(path, encoding="utf-8") as fh:
                entry = json.load(fh)
            r = entry["response"]
            with self._lock:
                self.usage.cache_hits += 1
            return ChatResponse(r["text"], r.get("prompt_tokens", 0), r.get("completion_tokens", 0),
                                cached=True, backend_id=r.get("backend_id", ""))
        with self._slots:
            resp = self.backend.complete(req)
        with self._lock:
            self.usage.backend_calls += 1
            self.usage.prompt_tokens += resp.prompt_tokens
            self.usage.completion_tokens += resp.completion_tokens
        if path is not None:
            write_once_json(path, {"request": req.to_json(), "response": resp.to_json(),
                                   "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())})
        return resp

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        """One L2-normalised vector per input text."""
        texts = list(texts)
        if not texts:
            raise EmptyInput("embed() needs at least one text")
        digest = embedding_cache_key(self.embedding_model, texts)
        path = self._cache_path(digest)
        vectors = None
        if path is not None and path.is_file():
            with open(path, encoding="utf-8") as fh:
                vectors = json.load(fh)["response"]["vectors"]
        if vectors is None:
            with self._slots:
                vectors = self.backend.embed(texts, self.embedding_model)
            with self._lock:
                self.usage.backend_calls += 1
            if path is not None:
                write_once_json(path, {"request": {"kind": "embedding", "model": self.embedding_model,
                                                   "input": texts},
                                       "response": {"vectors": vectors},
                                       "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())})
        if len(vectors) != len(texts):
            raise DimensionMismatch(f"expected {len(texts)} vectors, got {len(vectors)}")
        dims = {len(v) for v in vectors}
        if len(dims) != 1:
            raise DimensionMismatch(f"ragged embedding dimensions {sorted(dims)}")
        return [_l2_normalize(v) for v in vectors]


def _l2_normalize(v: Sequence[float]) -> list[float]:
    norm = math.sqrt(sum(x * x for x in v))
    if norm == 0:
        return [0.0 for _ in v]
    return [x / norm for x in v]


def cosine(a: Sequence[float], b: Sequence[float]) -> float:
    if len(a) != len(b):
        raise DimensionMismatch(f"vector lengths differ: {len(a)} vs {len(b)}")
    na = math.sqrt(sum(x * x for x in a))
    nb = math.sqrt(sum(x * x for x in b))
    if na == 0 or nb == 0:
        return 0.0
    return sum(x * y for x, y in zip(a, b)) / (na * nb)


def complete(req: ChatRequest, backend: Union[Backend, BackendConfig]) -> ChatResponse:
    """One-shot completion without the cache wrapper."""
    if isinstance(backend, BackendConfig):
        backend = backend.build()
    return backend.complete(req)


def embed(texts: Sequence[str], backend: Union[Backend, BackendConfig], model: str = "default") -> list[list[float]]:
    if isinstance(backend, BackendConfig):
        backend = backend.build()
    return Gateway(backend, embedding_model=model).embed(texts)
