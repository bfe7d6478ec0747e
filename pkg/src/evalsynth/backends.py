"""Text-generation backends behind one small interface.

Three implementations share the ``generate(request) -> Completion`` contract:

* ``HttpBackend`` speaks an OpenAI-compatible chat-completions wire protocol
  (the whole prompt as a single user message) with bounded retries on
  transport errors.
* ``MockBackend`` replays scripted completions keyed by the SHA-256 digest of
  the full prompt; in non-strict mode a fixture miss falls back to the echo
  summarizer.
* ``EchoBackend`` always applies the echo summarizer, so the full pipeline
  runs deterministically with zero fixtures and zero network.
"""

from __future__ import annotations

import hashlib
import logging
import os
import re
import threading
import time
from dataclasses import dataclass, field

import httpx

from .budget import SEPARATOR, ModelLimits, estimate_tokens
from .errors import (
    BackendError,
    DuplicateEntry,
    FixtureMiss,
    MalformedScriptLine,
    PromptTooLarge,
    TransportFailure,
)

logger = logging.getLogger(__name__)

DEFAULT_TEMPERATURE = 0.2
RETRY_ATTEMPTS = 3
RETRY_BASE_MS = 500

_HEX_DIGEST = re.compile(r"^[0-9a-f]{64}$")

# Known prompt shapes, used only to locate the payload for the echo rule.
_SUMMARISE_PREFIX = re.compile(
    r"^Summarise, to a maximum of \d+ tokens this text that is based on "
    r"course evaluations: ",
)
_ACTIONABLE_MARKER = "appropriate to the instructor: "


@dataclass(frozen=True)
class GenerationRequest:
    prompt: str
    max_output_tokens: int
    temperature: float = DEFAULT_TEMPERATURE
    seed: int | None = None

    def __post_init__(self) -> None:
        if not self.prompt:
            raise ValueError("prompt must be non-empty")
        if self.max_output_tokens <= 0:
            raise ValueError("max_output_tokens must be positive")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")


@dataclass(frozen=True)
class Completion:
    text: str
    output_token_estimate: int
    backend_id: str
    latency_ms: int = 0


@dataclass
class MockScript:
    """Prompt-digest -> completion-text table loaded from a fixture file."""

    entries: dict[str, str] = field(default_factory=dict)
    strict: bool = False


def prompt_digest(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


def load_mock_script(path: str, strict: bool = False) -> MockScript:
    """Read a fixture file of ``<sha256hex><TAB><text with \\n escapes>`` lines."""
    entries: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for line_num, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line:
                continue
            if "\t" not in line:
                raise MalformedScriptLine(line_num, "missing tab separator")
            digest, text = line.split("\t", 1)
            if not _HEX_DIGEST.match(digest):
                raise MalformedScriptLine(line_num, f"bad digest {digest!r}")
            if digest in entries:
                raise DuplicateEntry(f"line {line_num}: duplicate digest {digest}")
            entries[digest] = text.replace("\\n", "\n")
    return MockScript(entries=entries, strict=strict)


def extract_payload(prompt: str) -> str:
    """Pull the variable payload out of a rendered prompt.

    Falls back to the whole prompt when neither known template matches, so
    the echo rule stays total.
    """
    m = _SUMMARISE_PREFIX.match(prompt)
    if m:
        return prompt[m.end():]
    idx = prompt.find(_ACTIONABLE_MARKER)
    if idx >= 0:
        return prompt[idx + len(_ACTIONABLE_MARKER):]
    return prompt


def _first_sentence(segment: str) -> str:
    m = re.match(r"(.+?[.!?])(?:\s|$)", segment, re.DOTALL)
    return m.group(1) if m else segment


def echo_summarise(payload: str, max_output_tokens: int) -> str:
    """First sentence of each separator-delimited segment, joined by spaces.

    The result is truncated to ``max_output_tokens`` by the chars/4 rule so
    its token estimate never exceeds the request cap.
    """
    segments = [s.strip() for s in payload.split(SEPARATOR)]
    sentences = [_first_sentence(s) for s in segments if s]
    text = " ".join(sentences)
    return text[: max_output_tokens * 4]


class Backend:
    """Shared request validation and the in-flight cap; subclasses implement
    ``_complete``.  Instances are shareable across threads."""

    backend_id = "base"
    deterministic = False  # deterministic backends report latency 0

    def __init__(self, limits: ModelLimits | None = None, max_in_flight: int = 4):
        self.limits = limits or ModelLimits()
        self._max_in_flight = 0
        self._gate = threading.BoundedSemaphore(1)
        self.max_in_flight = max_in_flight

    @property
    def max_in_flight(self) -> int:
        return self._max_in_flight

    @max_in_flight.setter
    def max_in_flight(self, value: int) -> None:
        if value < 1:
            raise ValueError("max_in_flight must be >= 1")
        self._max_in_flight = value
        self._gate = threading.BoundedSemaphore(value)

    def generate(self, request: GenerationRequest) -> Completion:
        if estimate_tokens(request.prompt) > self.limits.context_tokens - request.max_output_tokens:
            raise PromptTooLarge(
                f"prompt estimate {estimate_tokens(request.prompt)} exceeds "
                f"{self.limits.context_tokens - request.max_output_tokens} usable tokens"
            )
        started = time.monotonic()
        with self._gate:
            text = self._complete(request)
        latency_ms = 0 if self.deterministic else int((time.monotonic() - started) * 1000)
        return Completion(
            text=text,
            output_token_estimate=estimate_tokens(text),
            backend_id=self.backend_id,
            latency_ms=latency_ms,
        )

    def _complete(self, request: GenerationRequest) -> str:
        raise NotImplementedError


class EchoBackend(Backend):
    """Deterministic no-model backend: echoes the first sentence per segment."""

    backend_id = "echo"
    deterministic = True

    def _complete(self, request: GenerationRequest) -> str:
        return echo_summarise(extract_payload(request.prompt), request.max_output_tokens)


class MockBackend(Backend):
    """Fixture-replay backend; bit-deterministic across process restarts."""

    backend_id = "mock"
    deterministic = True

    def __init__(self, script: MockScript, limits: ModelLimits | None = None):
        super().__init__(limits)
        self.script = script

    def _complete(self, request: GenerationRequest) -> str:
        digest = prompt_digest(request.prompt)
        text = self.script.entries.get(digest)
        if text is not None:
            return text
        if self.script.strict:
            raise FixtureMiss(f"no fixture for prompt digest {digest}")
        return echo_summarise(extract_payload(request.prompt), request.max_output_tokens)


class HttpBackend(Backend):
    """OpenAI-compatible chat-completions client.

    Only transport failures are retried (3 attempts, exponential backoff
    starting at 500 ms); HTTP error statuses and content problems surface
    immediately.
    """

    def __init__(
        self,
        url: str,
        model: str,
        api_key_env: str | None = None,
        timeout_ms: int = 60_000,
        limits: ModelLimits | None = None,
        transport: httpx.BaseTransport | None = None,
        retry_base_ms: int = RETRY_BASE_MS,
    ):
        super().__init__(limits)
        self.url = url.rstrip("/")
        self.model = model
        self.backend_id = f"http:{model}"
        self.retry_base_ms = retry_base_ms
        headers = {}
        api_key = os.environ.get(api_key_env, "") if api_key_env else ""
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        self._client = httpx.Client(
            headers=headers,
            timeout=timeout_ms / 1000,
            transport=transport,
        )

    def close(self) -> None:
        self._client.close()

    def _complete(self, request: GenerationRequest) -> str:
        body = {
            "model": self.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "max_tokens": request.max_output_tokens,
            "temperature": request.temperature,
        }
        if request.seed is not None:
            body["seed"] = request.seed
        # the prompt goes over the wire unmodified; log the digest as proof
        logger.debug(
            "sending prompt digest=%s", prompt_digest(body["messages"][0]["content"])
        )

        last_error: Exception | None = None
        for attempt in range(RETRY_ATTEMPTS):
            try:
                response = self._client.post(
                    f"{self.url}/chat/completions", json=body
                )
            except httpx.TransportError as exc:
                last_error = exc
                if attempt < RETRY_ATTEMPTS - 1:
                    time.sleep(self.retry_base_ms * (2**attempt) / 1000)
                continue
            # Status and content problems are never retried.
            if response.status_code != 200:
                raise BackendError(
                    f"backend returned {response.status_code}: {response.text[:200]}"
                )
            data = response.json()
            try:
                return data["choices"][0]["message"]["content"]
            except (KeyError, IndexError, TypeError) as exc:
                raise BackendError(f"malformed completion body: {exc}") from exc
        raise TransportFailure(
            f"transport failed after {RETRY_ATTEMPTS} attempts: {last_error}"
        )
