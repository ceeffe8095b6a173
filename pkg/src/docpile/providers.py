"""Embedding and text-generation provider contracts, vector math, and mocks.

Every ranking operation in the engine flows through this module: providers
emit L2-normalized vectors, ``cosine_similarity`` compares them, and
``rank_by_similarity`` turns scored candidates into a deterministic top-k
with ascending-key tie-breaks.

Two deterministic mock providers ship for offline work:

* ``HashEmbedder`` — whitespace-tokenizes lowercased text and adds one count
  at a hashed index per token, then normalizes. Shared vocabulary raises
  cosine similarity, which makes ranking behavior testable without a model.
* ``ReplayGenerator`` — returns scripted responses, keyed by request digest
  or consumed in script order when digests are absent.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .jsonutil import atomic_write_text, read_ndjson

logger = logging.getLogger(__name__)

TEMPERATURE_RANGE = (0.0, 2.0)
NORMALIZATION_TOLERANCE = 1e-6
DEFAULT_RETRY_ATTEMPTS = 3
DEFAULT_RETRY_BASE_DELAY = 0.5
DEFAULT_MAX_PARALLEL = 4

MOCK_EMBED_KIND = "mock-hash-embed"
MOCK_REPLAY_KIND = "mock-replay"
HTTP_KIND = "http-openai-compatible"


class ProviderError(Exception):
    """Base class for provider failures."""


class TransportError(ProviderError):
    """A retryable transport-level failure (network, 5xx, timeout)."""


class ReplayScriptMissError(ProviderError):
    """A replay script had no entry for a request; signals a fixture gap."""


class DimensionMismatchError(ValueError):
    """Vector operands have different dimensions."""


class ProviderConfigError(ValueError):
    """The provider configuration file is invalid."""


def content_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def request_digest(prompt: str, temperature: float, model: str) -> str:
    """Content hash of a generation request; pure in (prompt, temperature, model)."""
    payload = json.dumps(
        {"model": model, "prompt": prompt, "temperature": temperature},
        ensure_ascii=False,
        sort_keys=True,
    )
    return content_hash(payload)


@dataclass(frozen=True)
class GenerationRequest:
    """One text-generation call. Validated at construction."""

    prompt: str
    temperature: float = 0.7
    model: str = "default"

    def __post_init__(self) -> None:
        if not self.prompt:
            raise ValueError("generation request prompt must be non-empty")
        low, high = TEMPERATURE_RANGE
        if not (low <= self.temperature <= high):
            raise ValueError(
                f"temperature {self.temperature} outside allowed range [{low}, {high}]"
            )

    @property
    def digest(self) -> str:
        return request_digest(self.prompt, self.temperature, self.model)


@dataclass(frozen=True)
class GenerationResult:
    text: str
    model: str
    request_digest: str


def with_retries(
    call: Callable[[], object],
    attempts: int = DEFAULT_RETRY_ATTEMPTS,
    base_delay: float = DEFAULT_RETRY_BASE_DELAY,
    sleep: Callable[[float], None] = time.sleep,
):
    """Run a provider call with bounded retries and exponential backoff.

    Only TransportError is retried; anything else propagates immediately.
    """
    last: TransportError | None = None
    for attempt in range(attempts):
        try:
            return call()
        except TransportError as exc:
            last = exc
            if attempt + 1 < attempts:
                delay = base_delay * (2**attempt)
                logger.warning("provider call failed (%s); retrying in %.1fs", exc, delay)
                sleep(delay)
    assert last is not None
    raise last


# ---------------------------------------------------------------------------
# Vector math
# ---------------------------------------------------------------------------


def _as_vector(value) -> np.ndarray:
    return np.asarray(value, dtype=np.float64)


def cosine_similarity(a, b) -> float:
    """Cosine of two vectors, clamped to [-1, 1]; 0.0 if either is zero."""
    va, vb = _as_vector(a), _as_vector(b)
    if va.shape != vb.shape:
        raise DimensionMismatchError(f"dimension mismatch: {va.shape} vs {vb.shape}")
    norm_a = float(np.linalg.norm(va))
    norm_b = float(np.linalg.norm(vb))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    value = float(np.dot(va, vb)) / (norm_a * norm_b)
    return max(-1.0, min(1.0, value))


def rank_by_similarity(
    query, candidates: Iterable[tuple[str, np.ndarray]], k: int
) -> list[tuple[str, float]]:
    """Top-k candidates by cosine similarity to the query.

    Returns min(k, len(candidates)) (key, score) pairs sorted by score
    descending; ties break by ascending key so rankings are deterministic.
    """
    if k <= 0:
        raise ValueError(f"k must be positive, got {k}")
    scored = [(key, cosine_similarity(query, vector)) for key, vector in candidates]
    scored.sort(key=lambda item: (-item[1], item[0]))
    return scored[:k]


def normalize(vector: np.ndarray) -> np.ndarray:
    """L2-normalize; the zero vector passes through unchanged."""
    v = _as_vector(vector)
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        return v
    return v / norm


# ---------------------------------------------------------------------------
# Embedding providers
# ---------------------------------------------------------------------------


class EmbeddingProvider(ABC):
    """Produces fixed-dimension, L2-normalized vectors for text.

    Empty or whitespace-only text embeds to the zero vector rather than
    erroring: piles and LLM responses can legitimately contain empty
    fragments, and zero scores 0 against everything.
    """

    provider_id: str = "abstract"

    def __init__(self, model: str, dim: int):
        if dim <= 0:
            raise ValueError(f"embedding dimension must be positive, got {dim}")
        self.model = model
        self.dim = dim

    def embed(self, text: str) -> np.ndarray:
        if not text.strip():
            return np.zeros(self.dim, dtype=np.float64)
        vector = normalize(self._embed_raw(text))
        if vector.shape != (self.dim,):
            raise ProviderError(
                f"provider returned dimension {vector.shape}, expected ({self.dim},)"
            )
        return vector

    @abstractmethod
    def _embed_raw(self, text: str) -> np.ndarray:
        """Embed non-empty text; normalization is handled by embed()."""


class HashEmbedder(EmbeddingProvider):
    """Deterministic token-hash embedder.

    Tokenizes on whitespace after lowercasing; each token hashes to an index
    and adds 1 there; the count vector is normalized. Identical texts embed
    identically and shared vocabulary raises cosine similarity, so ranking
    contracts can be exercised without any model.
    """

    provider_id = MOCK_EMBED_KIND

    def __init__(self, dim: int = 256, model: str = "hash-256"):
        super().__init__(model=model, dim=dim)

    def token_index(self, token: str) -> int:
        digest = hashlib.sha256(token.encode("utf-8")).digest()
        return int.from_bytes(digest[:8], "big") % self.dim

    def _embed_raw(self, text: str) -> np.ndarray:
        counts = np.zeros(self.dim, dtype=np.float64)
        for token in text.lower().split():
            counts[self.token_index(token)] += 1.0
        return counts


class HttpEmbeddingProvider(EmbeddingProvider):
    """OpenAI-compatible /embeddings endpoint client with bounded retries."""

    provider_id = HTTP_KIND

    def __init__(
        self,
        base_url: str,
        model: str,
        dim: int,
        api_key_env: str = "OPENAI_API_KEY",
        timeout: float = 60.0,
        attempts: int = DEFAULT_RETRY_ATTEMPTS,
    ):
        super().__init__(model=model, dim=dim)
        self.base_url = base_url.rstrip("/")
        self.api_key_env = api_key_env
        self.timeout = timeout
        self.attempts = attempts

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.api_key_env, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def _post(self, payload: dict) -> dict:
        import requests

        try:
            response = requests.post(
                f"{self.base_url}/embeddings",
                json=payload,
                headers=self._headers(),
                timeout=self.timeout,
            )
        except requests.RequestException as exc:
            raise TransportError(f"embedding request failed: {exc}") from exc
        if response.status_code >= 500:
            raise TransportError(f"embedding server error {response.status_code}")
        if response.status_code != 200:
            raise ProviderError(
                f"embedding request rejected ({response.status_code}): {response.text[:200]}"
            )
        return response.json()

    def _embed_raw(self, text: str) -> np.ndarray:
        payload = {"model": self.model, "input": text}
        data = with_retries(lambda: self._post(payload), attempts=self.attempts)
        try:
            values = data["data"][0]["embedding"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderError(f"malformed embedding response: {exc}") from exc
        return np.asarray(values, dtype=np.float64)


# ---------------------------------------------------------------------------
# Embedding cache
# ---------------------------------------------------------------------------


def _safe_component(name: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in name) or "_"


class EmbeddingCache:
    """Persistent embedding cache keyed by (provider id, model, content hash).

    Entries are JSON files written atomically, so interrupted builds are
    resumable and concurrent writers cannot tear an entry. A small in-memory
    layer avoids repeated disk reads within one process.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self._memory: dict[tuple[str, str, str], np.ndarray] = {}
        self._lock = threading.Lock()

    def _entry_path(self, provider_id: str, model: str, text_hash: str) -> Path:
        return (
            self.root
            / _safe_component(provider_id)
            / _safe_component(model)
            / text_hash[:2]
            / f"{text_hash}.json"
        )

    def get(self, provider_id: str, model: str, text: str) -> np.ndarray | None:
        key = (provider_id, model, content_hash(text))
        with self._lock:
            if key in self._memory:
                return self._memory[key]
        path = self._entry_path(*key)
        if not path.exists():
            return None
        try:
            values = json.loads(path.read_text(encoding="utf-8"))["values"]
        except (OSError, ValueError, KeyError):
            logger.warning("dropping unreadable cache entry %s", path)
            return None
        vector = np.asarray(values, dtype=np.float64)
        with self._lock:
            self._memory[key] = vector
        return vector

    def put(self, provider_id: str, model: str, text: str, vector: np.ndarray) -> None:
        key = (provider_id, model, content_hash(text))
        path = self._entry_path(*key)
        atomic_write_text(path, json.dumps({"values": list(map(float, vector))}))
        with self._lock:
            self._memory[key] = np.asarray(vector, dtype=np.float64)


class CachedEmbedder(EmbeddingProvider):
    """Wraps an embedding provider with a persistent cache."""

    def __init__(self, inner: EmbeddingProvider, cache: EmbeddingCache):
        super().__init__(model=inner.model, dim=inner.dim)
        self.provider_id = inner.provider_id
        self.inner = inner
        self.cache = cache

    def embed(self, text: str) -> np.ndarray:
        cached = self.cache.get(self.provider_id, self.model, text)
        if cached is not None:
            return cached
        vector = self.inner.embed(text)
        self.cache.put(self.provider_id, self.model, text, vector)
        return vector

    def _embed_raw(self, text: str) -> np.ndarray:  # pragma: no cover - embed() overridden
        return self.inner._embed_raw(text)


# ---------------------------------------------------------------------------
# Generation providers
# ---------------------------------------------------------------------------


class GenerationProvider(ABC):
    """Produces text for a validated GenerationRequest."""

    @abstractmethod
    def generate(self, request: GenerationRequest) -> GenerationResult:
        ...


class ReplayGenerator(GenerationProvider):
    """Scripted generation for offline tests and reproducible KG builds.

    Script entries carry a ``response`` and an optional ``digest``. Entries
    with a digest answer the matching request directly; entries without one
    are consumed in script order. Once a request has been answered its
    digest is pinned to that response, so repeating a request always returns
    the same text.
    """

    def __init__(self, entries: Sequence[Mapping]):
        self._by_digest: dict[str, str] = {}
        self._queue: list[str] = []
        for position, entry in enumerate(entries):
            if "response" not in entry:
                raise ProviderConfigError(f"replay entry {position} has no 'response'")
            response = str(entry["response"])
            digest = entry.get("digest")
            if digest:
                self._by_digest[str(digest)] = response
            else:
                self._queue.append(response)
        self._served: dict[str, str] = {}
        self._lock = threading.Lock()

    @classmethod
    def from_script(cls, path: str | Path) -> "ReplayGenerator":
        return cls([record for _, record in read_ndjson(path)])

    def generate(self, request: GenerationRequest) -> GenerationResult:
        digest = request.digest
        with self._lock:
            if digest in self._by_digest:
                text = self._by_digest[digest]
            elif digest in self._served:
                text = self._served[digest]
            elif self._queue:
                text = self._queue.pop(0)
                self._served[digest] = text
            else:
                raise ReplayScriptMissError(
                    f"no scripted response for request digest {digest[:12]}…"
                )
        return GenerationResult(text=text, model=request.model, request_digest=digest)


class HttpGenerationProvider(GenerationProvider):
    """OpenAI-compatible /chat/completions client with bounded retries."""

    provider_id = HTTP_KIND

    def __init__(
        self,
        base_url: str,
        model: str = "default",
        api_key_env: str = "OPENAI_API_KEY",
        timeout: float = 120.0,
        attempts: int = DEFAULT_RETRY_ATTEMPTS,
    ):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.api_key_env = api_key_env
        self.timeout = timeout
        self.attempts = attempts

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.api_key_env, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def _post(self, payload: dict) -> dict:
        import requests

        try:
            response = requests.post(
                f"{self.base_url}/chat/completions",
                json=payload,
                headers=self._headers(),
                timeout=self.timeout,
            )
        except requests.RequestException as exc:
            raise TransportError(f"generation request failed: {exc}") from exc
        if response.status_code >= 500:
            raise TransportError(f"generation server error {response.status_code}")
        if response.status_code != 200:
            raise ProviderError(
                f"generation request rejected ({response.status_code}): {response.text[:200]}"
            )
        return response.json()

    def generate(self, request: GenerationRequest) -> GenerationResult:
        model = request.model if request.model != "default" else self.model
        payload = {
            "model": model,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
        }
        data = with_retries(lambda: self._post(payload), attempts=self.attempts)
        try:
            text = data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderError(f"malformed generation response: {exc}") from exc
        return GenerationResult(text=text, model=model, request_digest=request.digest)


# ---------------------------------------------------------------------------
# Provider configuration
# ---------------------------------------------------------------------------


@dataclass
class ProviderSetup:
    """Configured providers plus the raw config they came from."""

    embedder: EmbeddingProvider
    generator: GenerationProvider
    max_parallel: int
    config: dict


def _build_embedder(section: Mapping, config_dir: Path) -> EmbeddingProvider:
    kind = section.get("kind")
    if kind == MOCK_EMBED_KIND:
        return HashEmbedder(
            dim=int(section.get("dim", 256)), model=str(section.get("model", "hash-256"))
        )
    if kind == HTTP_KIND:
        for field in ("baseUrl", "model", "dim"):
            if field not in section:
                raise ProviderConfigError(f"embedding config missing '{field}'")
        return HttpEmbeddingProvider(
            base_url=str(section["baseUrl"]),
            model=str(section["model"]),
            dim=int(section["dim"]),
            api_key_env=str(section.get("apiKeyEnv", "OPENAI_API_KEY")),
        )
    raise ProviderConfigError(f"unknown embedding provider kind: {kind!r}")


def _build_generator(section: Mapping, config_dir: Path) -> GenerationProvider:
    kind = section.get("kind")
    if kind == MOCK_REPLAY_KIND:
        script = section.get("script")
        if not script:
            raise ProviderConfigError("mock-replay generation config needs a 'script' path")
        script_path = Path(script)
        if not script_path.is_absolute():
            script_path = config_dir / script_path
        return ReplayGenerator.from_script(script_path)
    if kind == HTTP_KIND:
        if "baseUrl" not in section:
            raise ProviderConfigError("generation config missing 'baseUrl'")
        return HttpGenerationProvider(
            base_url=str(section["baseUrl"]),
            model=str(section.get("model", "default")),
            api_key_env=str(section.get("apiKeyEnv", "OPENAI_API_KEY")),
        )
    raise ProviderConfigError(f"unknown generation provider kind: {kind!r}")


def load_providers(config_path: str | Path, cache_root: str | Path | None = None) -> ProviderSetup:
    """Build providers from a JSON config file.

    When cache_root is given the embedder is wrapped in a persistent
    EmbeddingCache so rebuilds are resumable and repeat calls are free.
    """
    path = Path(config_path)
    try:
        config = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ProviderConfigError(f"cannot read provider config {path}: {exc}") from exc
    except ValueError as exc:
        raise ProviderConfigError(f"provider config {path} is not valid JSON: {exc}") from exc
    if "embedding" not in config or "generation" not in config:
        raise ProviderConfigError("provider config needs 'embedding' and 'generation' sections")
    embedder = _build_embedder(config["embedding"], path.parent)
    generator = _build_generator(config["generation"], path.parent)
    if cache_root is not None:
        embedder = CachedEmbedder(embedder, EmbeddingCache(cache_root))
    max_parallel = int(config.get("maxParallel", DEFAULT_MAX_PARALLEL))
    return ProviderSetup(
        embedder=embedder, generator=generator, max_parallel=max_parallel, config=config
    )
