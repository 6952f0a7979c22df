"""Generation backends: the interface, a deterministic extractive
baseline, and an HTTP client speaking the model-server wire protocol.

The baseline exists so the whole pipeline can run and be tested without
trained models; it is a pure function of its request. The remote client
talks to any server implementing ``POST /v1/generate``.
"""

from __future__ import annotations

import logging
import re
import time
from dataclasses import dataclass, field
from typing import Protocol, runtime_checkable

import requests

from .errors import (
    BackendError,
    BackendProtocolError,
    BackendStatusError,
    BackendTimeoutError,
)
from .simtext import jaccard_bow
from .templater import best_matching_span
from .types import Config, SummaryText

logger = logging.getLogger(__name__)

TASK_TEMPLATE = "template"
TASK_SLOT = "slot"

_SENTENCE_RE = re.compile(r"(?<=[.!?])\s+")

# Function words that never form the content of an extracted answer.
_STOPWORDS = frozenset(
    """a an and are as at be by for from had has have he her his i in is it
    its of on or she that the their them they this to was were which who
    whom with""".split()
)


@dataclass(frozen=True)
class BackendRequest:
    """One generation request, either a whole template or one slot value.

    ``serialized_input`` is the exact string a sequence model would read;
    the structured fields ride along so simpler backends can use them.
    """

    task: str
    entity_name: str
    documents: tuple[str, ...]
    slot_key: str
    serialized_input: str

    def __post_init__(self):
        if self.task not in (TASK_TEMPLATE, TASK_SLOT):
            raise ValueError(f"unknown task {self.task!r}")
        if self.task == TASK_SLOT and not self.slot_key:
            raise ValueError("slot task requires a slot_key")
        if self.task == TASK_TEMPLATE and self.slot_key:
            raise ValueError("template task must not carry a slot_key")


@dataclass(frozen=True)
class BackendResponse:
    output: str
    latency_ms: float
    backend_id: str

    def __post_init__(self):
        if self.latency_ms < 0:
            raise ValueError("latency_ms must be non-negative")


@runtime_checkable
class Backend(Protocol):
    """Anything that can answer a BackendRequest."""

    backend_id: str

    def generate(self, request: BackendRequest) -> BackendResponse: ...


def split_sentences(text: str) -> list[str]:
    """Split on sentence-final punctuation followed by whitespace."""
    return [s for s in _SENTENCE_RE.split(text.strip()) if s]


def _has_digit(token: str) -> bool:
    return any(ch.isdigit() for ch in token)


def _has_alnum(token: str) -> bool:
    return any(ch.isalnum() for ch in token)


@dataclass(frozen=True)
class ExtractiveBaseline:
    """Deterministic heuristic backend.

    Slot task: pick the sentence with maximal bag-of-words overlap against
    the entity name plus the slot key's words, then extract a short token
    window from it (digit windows for date-like keys, otherwise the
    content-word run nearest the cue word). Template task: take the first
    sentence of the highest-overlap document and carve the entity name
    into a slot.
    """

    delta: float = 0.8
    slack: int = 2
    backend_id: str = field(default="builtin-extractive")

    def generate(self, request: BackendRequest) -> BackendResponse:
        if request.task == TASK_SLOT:
            output = self._slot_value(request)
        else:
            output = self._template_markup(request)
        return BackendResponse(output=output, latency_ms=0.0, backend_id=self.backend_id)

    # -- slot task -------------------------------------------------------

    def _slot_value(self, request: BackendRequest) -> str:
        cues = [w for w in request.slot_key.split("_") if w]
        query = request.entity_name + " " + " ".join(cues)
        sentence, score = self._best_sentence(request.documents, query)
        if sentence is None or score == 0.0:
            return ""
        tokens = sentence.split()
        if any(cue.lower() == "date" for cue in cues):
            window = self._best_digit_window(tokens)
            if window:
                return " ".join(window)
        return " ".join(self._nearest_content_run(tokens, cues))

    @staticmethod
    def _best_sentence(
        documents: tuple[str, ...], query: str
    ) -> tuple[str | None, float]:
        best: str | None = None
        best_score = 0.0
        for doc in documents:
            for sentence in split_sentences(doc):
                score = jaccard_bow(sentence, query)
                if best is None or score > best_score:
                    best, best_score = sentence, score
        return best, best_score

    @staticmethod
    def _best_digit_window(tokens: list[str]) -> list[str]:
        """Window of <= 5 tokens, digit-bearing at both ends, maximizing
        (digit-token count, length); earliest such window wins ties."""
        best: list[str] = []
        best_key = (-1, -1)
        for start in range(len(tokens)):
            if not _has_digit(tokens[start]):
                continue
            for width in range(1, 6):
                end = start + width
                if end > len(tokens):
                    break
                if not _has_digit(tokens[end - 1]):
                    continue
                window = tokens[start:end]
                key = (sum(map(_has_digit, window)), width)
                if key > best_key:
                    best, best_key = window, key
        return best

    @staticmethod
    def _nearest_content_run(tokens: list[str], cues: list[str]) -> list[str]:
        """Maximal run of non-function, non-cue tokens nearest the first
        cue occurrence (position 0 when no cue appears), cut to 5 tokens."""
        lower = [t.lower() for t in tokens]
        cue_set = {c.lower() for c in cues}
        cue_pos = next((i for i, t in enumerate(lower) if t in cue_set), 0)

        runs: list[tuple[int, int]] = []
        start: int | None = None
        for i, tok in enumerate(lower):
            content = _has_alnum(tokens[i]) and tok not in _STOPWORDS and tok not in cue_set
            if content and start is None:
                start = i
            elif not content and start is not None:
                runs.append((start, i))
                start = None
        if start is not None:
            runs.append((start, len(tokens)))
        if not runs:
            return []

        def distance(run: tuple[int, int]) -> int:
            s, e = run
            if s <= cue_pos < e:
                return 0
            return min(abs(s - cue_pos), abs(e - 1 - cue_pos))

        s, e = min(runs, key=lambda r: (distance(r), r[0]))
        return tokens[s : min(e, s + 5)]

    # -- template task ---------------------------------------------------

    def _template_markup(self, request: BackendRequest) -> str:
        if not request.documents or not any(d.strip() for d in request.documents):
            raise BackendError("template task requires at least one document")
        best_doc = max(
            request.documents,
            key=lambda d: jaccard_bow(d, request.entity_name),
        )
        sentences = split_sentences(best_doc)
        if not sentences:
            raise BackendError("template task requires non-empty document text")
        sentence = sentences[0]
        match = best_matching_span(
            SummaryText(sentence), request.entity_name, self.slack, fact_key="name"
        )
        if match is None or match.score < self.delta:
            return sentence
        return sentence[: match.start] + "[SLT] name [/SLT]" + sentence[match.end :]


class RemoteBackend:
    """Client for an external model server.

    Retries timeouts, connection failures, and 503 responses with
    exponential backoff; any other non-200 status and any malformed body
    raise immediately. Carries no per-request state, so concurrent calls
    from multiple threads are safe.
    """

    def __init__(
        self,
        base_url: str,
        timeout: float = 10.0,
        retries: int = 3,
        backoff: float = 0.25,
    ):
        if retries < 1:
            raise ValueError("retries must be at least 1")
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff
        self.backend_id = f"remote:{self.base_url}"

    def generate(self, request: BackendRequest) -> BackendResponse:
        payload = {
            "task": request.task,
            "entity_name": request.entity_name,
            "documents": list(request.documents),
            "slot_key": request.slot_key if request.task == TASK_SLOT else None,
            "input": request.serialized_input,
        }
        url = f"{self.base_url}/v1/generate"
        delay = self.backoff
        last_error: BackendError | None = None
        for attempt in range(1, self.retries + 1):
            if attempt > 1:
                time.sleep(delay)
                delay *= 2
            started = time.perf_counter()
            try:
                response = requests.post(url, json=payload, timeout=self.timeout)
            except (requests.Timeout, requests.ConnectionError) as exc:
                last_error = BackendTimeoutError(
                    f"{url} unreachable (attempt {attempt}/{self.retries}): {exc}"
                )
                logger.warning("%s", last_error)
                continue
            latency_ms = (time.perf_counter() - started) * 1000.0

            if response.status_code == 503:
                last_error = BackendStatusError(
                    f"{url} reports model unavailable "
                    f"(attempt {attempt}/{self.retries})",
                    status=503,
                )
                logger.warning("%s", last_error)
                continue
            if response.status_code != 200:
                raise BackendStatusError(
                    f"{url} answered status {response.status_code}",
                    status=response.status_code,
                )
            try:
                body = response.json()
            except ValueError as exc:
                raise BackendProtocolError(f"{url} sent a non-JSON body: {exc}")
            output = body.get("output") if isinstance(body, dict) else None
            backend_id = body.get("backend_id") if isinstance(body, dict) else None
            if not isinstance(output, str) or not isinstance(backend_id, str):
                raise BackendProtocolError(
                    f"{url} body must carry string 'output' and 'backend_id', "
                    f"got {body!r}"
                )
            return BackendResponse(
                output=output, latency_ms=latency_ms, backend_id=backend_id
            )
        assert last_error is not None
        raise last_error


def default_backend(config: Config | None = None) -> ExtractiveBaseline:
    """The backend used when none is configured."""
    config = config or Config()
    return ExtractiveBaseline(delta=config.delta, slack=config.span_window_slack)
