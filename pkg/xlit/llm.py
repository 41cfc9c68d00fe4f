# -*- coding: utf-8 -*-
"""Completion backends.

* :class:`LiveBackend` posts to an OpenAI-compatible ``/completions``
  endpoint with httpx, retrying transient failures.
* :class:`ReplayBackend` answers from a cassette, a JSON-lines file of
  recorded completions keyed by request hash.
* :class:`RecordingBackend` answers from a cassette when it can and
  otherwise calls a live backend and appends the answer to the cassette.

Use :func:`open_backend` to create a backend from a ``live:<url>`` or
``replay:<file>`` spec.
"""
from abc import ABCMeta, abstractmethod
from dataclasses import dataclass
import hashlib
import json
import logging
import os
from pathlib import Path
import re
import threading
import time
from typing import Any, Callable, Dict, Optional, Sequence, Tuple, Union
import httpx
from xlit.paths import parse_url
from xlit.types import PathLike, TaskKind
from xlit.utils import read_jsonl, write_jsonl


LOG = logging.getLogger(__name__)


DEFAULT_STOP_SEQUENCES: Tuple[str, ...] = ("\n\n",)
CLS_MAX_NEW_TOKENS = 16
SEQLAB_TOKENS_PER_WORD = 8
RETRY_STATUSES = frozenset((429, 500, 502, 503, 504))
CONTEXT_LENGTH_RE = re.compile(r"context[ _-]?(length|window)|too long|maximum context", re.I)
API_KEY_ENV = "XLIT_API_KEY"


class ConcurrencyVar:
    """Maintain the default number of in-flight completion requests."""

    def __init__(self, default_value: int = 4) -> None:
        self.concurrency = default_value
        self.default_value = default_value

    def update(self, concurrency: Optional[int] = None) -> None:
        """Update the number of concurrent requests.

        Args:
            concurrency: None means reset to the default value; an int < 1
                means a single request at a time.
        """
        if concurrency is None:
            self.concurrency = self.default_value
        elif concurrency < 1:
            self.concurrency = 1
        else:
            self.concurrency = concurrency


CONCURRENCY = ConcurrencyVar()
"""Default number of completion requests that may be in flight at once."""


class BackendError(IOError):
    """A completion request failed.

    Args:
        msg: The message.
        status: HTTP status of the last response, if any.
    """

    def __init__(self, msg: str, status: Optional[int] = None) -> None:
        super().__init__(msg)
        self.status = status


class ReplayMissError(BackendError):
    """A request is not in the cassette."""

    def __init__(self, request_hash: str) -> None:
        super().__init__(f"Request {request_hash} is not in the cassette")
        self.request_hash = request_hash


class PromptTooLongError(BackendError):
    """A prompt exceeds the model's (or the configured) length limit."""


@dataclass(frozen=True)
class CompletionRequest:
    """A completion request. Greedy decoding (temperature 0) is the default.
    """

    prompt: str
    max_new_tokens: int
    temperature: float = 0.0
    stop_sequences: Tuple[str, ...] = DEFAULT_STOP_SEQUENCES

    def __post_init__(self):
        if self.max_new_tokens < 1:
            raise ValueError(f"max_new_tokens must be positive: {self.max_new_tokens}")
        if self.temperature < 0:
            raise ValueError(f"temperature must be non-negative: {self.temperature}")
        object.__setattr__(self, "max_new_tokens", int(self.max_new_tokens))
        object.__setattr__(self, "temperature", float(self.temperature))
        object.__setattr__(self, "stop_sequences", tuple(self.stop_sequences))

    def canonical(self) -> str:
        """JSON array [prompt, max_new_tokens, temperature, stop_sequences]
        without whitespace and with non-ASCII characters kept as-is."""
        return json.dumps(
            [self.prompt, self.max_new_tokens, self.temperature, list(self.stop_sequences)],
            ensure_ascii=False,
            separators=(",", ":"),
        )

    @property
    def hash(self) -> str:
        """Hex SHA-256 of the UTF-8 bytes of :meth:`canonical`."""
        return hashlib.sha256(self.canonical().encode("utf-8")).hexdigest()

    def summary(self) -> Dict[str, Any]:
        return dict(
            prompt=self.prompt,
            max_new_tokens=self.max_new_tokens,
            temperature=self.temperature,
            stop_sequences=list(self.stop_sequences),
        )


def request_hash(request: CompletionRequest) -> str:
    """The stable 256-bit hash of a request."""
    return request.hash


def default_max_new_tokens(task: TaskKind, token_count: Optional[int] = None) -> int:
    """16 for classification; 8 per query token for sequential labeling."""
    if task is TaskKind.CLS:
        return CLS_MAX_NEW_TOKENS
    if not token_count:
        raise ValueError("The query token count is required for sequential labeling")
    return SEQLAB_TOKENS_PER_WORD * token_count


@dataclass(frozen=True)
class CompletionResult:
    """A completion. `text` is the continuation only."""

    text: str
    backend_id: str
    latency_ms: int = 0
    from_cache: bool = False


class Cassette:
    """Append-only JSON-lines store of completions. Each record has the keys
    ``hash``, ``request``, ``text`` and ``backend_id``. Appends are
    serialized with a lock, so one cassette may be shared between threads.

    Args:
        path: The cassette file. It need not exist yet.

    Raises:
        ValueError if an existing file has an invalid record.
    """

    def __init__(self, path: PathLike) -> None:
        self.path = Path(path)
        self._lock = threading.Lock()
        self._records: Dict[str, Dict[str, Any]] = {}
        if self.path.exists():
            for lineno, record in enumerate(read_jsonl(self.path), 1):
                if not isinstance(record, dict) or not {"hash", "text"} <= record.keys():
                    raise ValueError(f"{self.path}: record {lineno} lacks 'hash' or 'text'")
                self._records.setdefault(record["hash"], record)

    def __len__(self) -> int:
        return len(self._records)

    def __contains__(self, key: str) -> bool:
        return key in self._records

    def get(self, key: str) -> Optional[Dict[str, Any]]:
        with self._lock:
            return self._records.get(key)

    def append(self, request: CompletionRequest, text: str, backend_id: str) -> Dict[str, Any]:
        """Record a completion. A request that is already recorded is not
        written again.

        Returns:
            The stored record.
        """
        key = request.hash
        with self._lock:
            if key in self._records:
                return self._records[key]
            record = dict(hash=key, request=request.summary(), text=text, backend_id=backend_id)
            write_jsonl([record], self.path, mode="at")
            self._records[key] = record
            LOG.debug("Appended %s to cassette %s", key, self.path)
            return record


class Backend(metaclass=ABCMeta):
    """Base class for completion backends. Backends are context managers."""

    @property
    @abstractmethod
    def backend_id(self) -> str:
        pass

    @abstractmethod
    def complete(self, request: CompletionRequest) -> CompletionResult:
        """Complete a prompt.

        Raises:
            BackendError if the request cannot be completed.
        """

    def close(self) -> None:
        """Release any resources."""

    def __enter__(self) -> "Backend":
        return self

    def __exit__(self, exception_type, exception_value, traceback) -> None:
        self.close()


class ReplayBackend(Backend):
    """Answers requests from a cassette.

    Args:
        cassette: A Cassette or the path of one.
    """

    def __init__(self, cassette: Union[Cassette, PathLike]) -> None:
        if not isinstance(cassette, Cassette):
            path = Path(cassette)
            if not path.exists():
                raise BackendError(f"Cassette {path} does not exist")
            cassette = Cassette(path)
        self.cassette = cassette

    @property
    def backend_id(self) -> str:
        return f"replay:{self.cassette.path.name}"

    def complete(self, request: CompletionRequest) -> CompletionResult:
        record = self.cassette.get(request.hash)
        if record is None:
            raise ReplayMissError(request.hash)
        return CompletionResult(
            record["text"], record.get("backend_id") or self.backend_id, 0, True
        )


class LiveBackend(Backend):
    """Client for an OpenAI-compatible completions endpoint.

    Requests are POSTed as JSON ``{"model", "prompt", "max_tokens",
    "temperature", "stop"}`` and the completion is read from
    ``choices[0].text``. Transport errors and 429/5xx responses are retried
    after ``backoff * 2**attempt`` seconds.

    Args:
        url: The endpoint URL.
        model: Model name sent with each request.
        api_key_env: Environment variable holding the bearer token.
        max_attempts: Maximum number of attempts per request.
        backoff: Base retry delay in seconds.
        timeout: Request timeout in seconds.
        concurrency: Maximum number of requests in flight.
        max_prompt_chars: Prompts longer than this are rejected without a
            request.
        client: An httpx.Client to use instead of a new one.
        sleep: Function used to wait between attempts.
    """

    def __init__(
        self,
        url: str,
        model: Optional[str] = None,
        api_key_env: str = API_KEY_ENV,
        max_attempts: int = 4,
        backoff: float = 0.5,
        timeout: float = 60.0,
        concurrency: Optional[int] = None,
        max_prompt_chars: Optional[int] = None,
        client: Optional[httpx.Client] = None,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        if parse_url(url) is None:
            raise ValueError(f"Invalid backend URL: {url!r}")
        if max_attempts < 1:
            raise ValueError(f"max_attempts must be >= 1: {max_attempts}")
        self.url = url
        self.model = model
        self.max_attempts = max_attempts
        self.backoff = backoff
        self.max_prompt_chars = max_prompt_chars
        self._semaphore = threading.BoundedSemaphore(concurrency or CONCURRENCY.concurrency)
        self._sleep = sleep
        headers = {}
        api_key = os.environ.get(api_key_env)
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        self._owns_client = client is None
        self._client = client or httpx.Client(timeout=timeout)
        self._headers = headers

    @property
    def backend_id(self) -> str:
        return f"live:{self.model}" if self.model else f"live:{self.url}"

    def payload(self, request: CompletionRequest) -> Dict[str, Any]:
        body: Dict[str, Any] = dict(
            prompt=request.prompt,
            max_tokens=request.max_new_tokens,
            temperature=request.temperature,
        )
        if self.model:
            body["model"] = self.model
        if request.stop_sequences:
            body["stop"] = list(request.stop_sequences)
        return body

    def complete(self, request: CompletionRequest) -> CompletionResult:
        if self.max_prompt_chars is not None and len(request.prompt) > self.max_prompt_chars:
            raise PromptTooLongError(
                f"Prompt {request.hash} has {len(request.prompt)} characters; "
                f"the limit is {self.max_prompt_chars}"
            )
        body = self.payload(request)
        with self._semaphore:
            start = time.perf_counter()
            text = self._post(body, request.hash)
            latency = int(round((time.perf_counter() - start) * 1000))
        return CompletionResult(text, self.backend_id, latency, False)

    def _post(self, body: Dict[str, Any], key: str) -> str:
        status = None
        reason = None
        for attempt in range(self.max_attempts):
            try:
                response = self._client.post(self.url, json=body, headers=self._headers)
            except httpx.TransportError as err:
                reason = f"{type(err).__name__}: {err}"
            else:
                status = response.status_code
                if status == 200:
                    return self._parse(response)
                if status == 400 and CONTEXT_LENGTH_RE.search(response.text):
                    raise PromptTooLongError(
                        f"Prompt {key} exceeds the model context: {response.text}", status
                    )
                if status not in RETRY_STATUSES:
                    raise BackendError(
                        f"Request {key} failed with status {status}: {response.text}", status
                    )
                reason = f"status {status}"
            if attempt + 1 < self.max_attempts:
                delay = self.backoff * 2 ** attempt
                LOG.warning(
                    "Attempt %d/%d for request %s failed (%s); retrying in %.2fs",
                    attempt + 1, self.max_attempts, key, reason, delay
                )
                self._sleep(delay)
        raise BackendError(
            f"Request {key} failed after {self.max_attempts} attempts ({reason})", status
        )

    @staticmethod
    def _parse(response: httpx.Response) -> str:
        try:
            text = response.json()["choices"][0]["text"]
        except (ValueError, KeyError, IndexError, TypeError) as err:
            raise BackendError(
                f"Unexpected response format: {response.text[:200]}", response.status_code
            ) from err
        if not isinstance(text, str):
            raise BackendError("Unexpected response format: completion is not a string")
        return text

    def close(self) -> None:
        if self._owns_client:
            self._client.close()


class RecordingBackend(Backend):
    """Replays recorded completions and records new ones.

    Args:
        live: The backend used for requests not yet recorded.
        cassette: A Cassette or the path of one.
    """

    def __init__(self, live: Backend, cassette: Union[Cassette, PathLike]) -> None:
        self.live = live
        self.cassette = cassette if isinstance(cassette, Cassette) else Cassette(cassette)

    @property
    def backend_id(self) -> str:
        return self.live.backend_id

    def complete(self, request: CompletionRequest) -> CompletionResult:
        record = self.cassette.get(request.hash)
        if record is not None:
            return CompletionResult(record["text"], record.get("backend_id") or self.backend_id, 0, True)
        result = self.live.complete(request)
        self.cassette.append(request, result.text, result.backend_id)
        return result

    def close(self) -> None:
        self.live.close()


def open_backend(
    spec: str, cassette: Optional[PathLike] = None, **options
) -> Backend:
    """Create a backend from a spec string.

    Args:
        spec: ``live:<url>`` or ``replay:<file>``.
        cassette: With a live spec, record completions to this cassette.
        options: Keyword arguments for :class:`LiveBackend`.

    Returns:
        A Backend.

    Raises:
        ValueError if the spec is malformed.
        BackendError if a replay cassette does not exist.
    """
    kind, sep, target = spec.partition(":")
    if not sep or not target:
        raise ValueError(f"Invalid backend spec {spec!r}; expected live:<url> or replay:<file>")
    if kind == "replay":
        return ReplayBackend(target)
    if kind == "live":
        live = LiveBackend(target, **options)
        if cassette is not None:
            return RecordingBackend(live, cassette)
        return live
    raise ValueError(f"Unknown backend kind {kind!r}; expected live or replay")


def complete(backend: Backend, request: CompletionRequest) -> CompletionResult:
    """Complete `request` with `backend`."""
    return backend.complete(request)


def make_request(
    prompt: str,
    task: TaskKind,
    token_count: Optional[int] = None,
    max_new_tokens: Optional[int] = None,
    stop_sequences: Sequence[str] = DEFAULT_STOP_SEQUENCES,
) -> CompletionRequest:
    """Build a greedy request with the default token budget for `task`."""
    return CompletionRequest(
        prompt,
        max_new_tokens or default_max_new_tokens(task, token_count),
        0.0,
        tuple(stop_sequences),
    )
