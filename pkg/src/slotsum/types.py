"""Core domain types shared by every other module.

All types are immutable containers: construction validates the invariants,
computation lives in the sibling modules. Frozen dataclasses make them safe
to share across concurrent workers.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterator, Sequence, Union

from .errors import DuplicateKeyError, MarkupInjectionError

logger = logging.getLogger(__name__)

SLOT_OPEN = "[SLT]"
SLOT_CLOSE = "[/SLT]"

SPLITS = ("train", "valid", "test")
STRATEGIES = ("discard", "predict", "all_predict")


def normalize_key(key: str) -> str:
    """Canonical form used for key comparisons: trimmed and lowercased.

    Underscores are preserved; fact tables use snake_case keys such as
    ``birth_date`` and those must stay distinct from ``birthdate``.
    """
    return key.strip().lower()


@dataclass(frozen=True)
class Entity:
    """A named entity to be summarized. Names are opaque; no linking."""

    name: str

    def __post_init__(self):
        if not self.name.strip():
            raise ValueError("entity name must be non-empty")


@dataclass(frozen=True)
class Document:
    """One source text snippet."""

    text: str

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("document text must be non-empty")


@dataclass(frozen=True)
class DocumentSet:
    """Ordered collection of source documents.

    May be empty in degraded or test modes; individual documents never are.
    """

    documents: tuple[Document, ...] = ()

    @classmethod
    def of(cls, *texts: str) -> "DocumentSet":
        return cls(tuple(Document(t) for t in texts))

    def texts(self) -> tuple[str, ...]:
        return tuple(d.text for d in self.documents)

    def joined(self, sep: str = "\n") -> str:
        return sep.join(d.text for d in self.documents)

    def __iter__(self) -> Iterator[Document]:
        return iter(self.documents)

    def __len__(self) -> int:
        return len(self.documents)


@dataclass(frozen=True)
class SummaryText:
    """An abstractive description of an entity."""

    text: str


@dataclass(frozen=True)
class FactPair:
    """One (feature name, fact content) pair describing the entity."""

    key: str
    value: str

    def __post_init__(self):
        if not self.key.strip():
            raise ValueError("fact key must be non-empty")
        if not self.value.strip():
            raise ValueError(f"fact value for key {self.key!r} must be non-empty")
        # Store trimmed forms so serialization and matching are deterministic.
        object.__setattr__(self, "key", self.key.strip())
        object.__setattr__(self, "value", self.value.strip())


@dataclass(frozen=True)
class FactSet:
    """Ordered fact pairs with unique keys (after key normalization)."""

    pairs: tuple[FactPair, ...] = ()

    def __post_init__(self):
        seen = set()
        for pair in self.pairs:
            norm = normalize_key(pair.key)
            if norm in seen:
                raise DuplicateKeyError(f"duplicate fact key {pair.key!r}")
            seen.add(norm)

    @classmethod
    def from_pairs(
        cls, pairs: Sequence[tuple[str, str]], on_duplicate: str = "error"
    ) -> "FactSet":
        """Build a fact set from raw (key, value) tuples.

        ``on_duplicate="first"`` keeps the first occurrence of each key and
        logs a warning; ``"error"`` raises ``DuplicateKeyError``.
        """
        if on_duplicate not in ("error", "first"):
            raise ValueError(f"unknown duplicate policy {on_duplicate!r}")
        kept: list[FactPair] = []
        seen: set[str] = set()
        for key, value in pairs:
            pair = FactPair(key, value)
            norm = normalize_key(pair.key)
            if norm in seen:
                if on_duplicate == "error":
                    raise DuplicateKeyError(f"duplicate fact key {key!r}")
                logger.warning("duplicate fact key %r: keeping first occurrence", key)
                continue
            seen.add(norm)
            kept.append(pair)
        return cls(tuple(kept))

    def keys(self) -> tuple[str, ...]:
        return tuple(p.key for p in self.pairs)

    def get(self, key: str) -> str | None:
        """Value for a key, compared after normalization."""
        norm = normalize_key(key)
        for pair in self.pairs:
            if normalize_key(pair.key) == norm:
                return pair.value
        return None

    def as_dict(self) -> dict[str, str]:
        """Normalized-key to value mapping."""
        return {normalize_key(p.key): p.value for p in self.pairs}

    def __contains__(self, key: str) -> bool:
        return self.get(key) is not None

    def __iter__(self) -> Iterator[FactPair]:
        return iter(self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class Slot:
    """A placeholder in a template, standing for one fact value."""

    key: str

    def __post_init__(self):
        if SLOT_OPEN in self.key or SLOT_CLOSE in self.key:
            raise MarkupInjectionError(
                f"slot key {self.key!r} contains a reserved delimiter token"
            )

    @property
    def markup(self) -> str:
        return f"{SLOT_OPEN} {self.key} {SLOT_CLOSE}"


@dataclass(frozen=True)
class LiteralText:
    """A run of template text kept verbatim."""

    text: str


Segment = Union[LiteralText, Slot]


@dataclass(frozen=True)
class Template:
    """A sequence of literal text runs and named slots.

    Structural invariants enforced here: no empty literals and no two
    adjacent literals, so the markup/segment round trip is the identity.
    Round-tripping additionally requires that literal text contains no
    delimiter tokens; templates produced by the builder and the strict
    parser always satisfy that, recovery-mode parses may not (they carry
    warnings instead).
    """

    segments: tuple[Segment, ...] = ()

    def __post_init__(self):
        previous_literal = False
        for seg in self.segments:
            if isinstance(seg, LiteralText):
                if not seg.text:
                    raise ValueError("template literals must be non-empty")
                if previous_literal:
                    raise ValueError("adjacent literal segments must be merged")
                previous_literal = True
            elif isinstance(seg, Slot):
                previous_literal = False
            else:
                raise TypeError(f"bad segment type {type(seg).__name__}")

    @classmethod
    def from_segments(cls, segments: Sequence[Segment]) -> "Template":
        """Build a template, merging adjacent literals and dropping empties."""
        merged: list[Segment] = []
        for seg in segments:
            if isinstance(seg, LiteralText):
                if not seg.text:
                    continue
                if merged and isinstance(merged[-1], LiteralText):
                    merged[-1] = LiteralText(merged[-1].text + seg.text)
                    continue
            merged.append(seg)
        return cls(tuple(merged))

    @property
    def markup(self) -> str:
        return "".join(
            seg.text if isinstance(seg, LiteralText) else seg.markup
            for seg in self.segments
        )

    def slots(self) -> tuple[Slot, ...]:
        return tuple(s for s in self.segments if isinstance(s, Slot))

    def slot_keys(self) -> tuple[str, ...]:
        """Distinct slot keys in first-occurrence order."""
        seen: list[str] = []
        for slot in self.slots():
            if slot.key not in seen:
                seen.append(slot.key)
        return tuple(seen)


@dataclass(frozen=True)
class CorpusRecord:
    """One corpus example: entity, source documents, summary and facts."""

    id: str
    entity: Entity
    documents: DocumentSet
    summary: SummaryText
    facts: FactSet
    template: Template | None = None
    split: str | None = None
    unmatched_slots: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.id:
            raise ValueError("record id must be non-empty")
        if self.split is not None and self.split not in SPLITS:
            raise ValueError(f"unknown split {self.split!r}")
        if self.template is not None:
            allowed = {normalize_key(k) for k in self.facts.keys()}
            allowed.update(normalize_key(k) for k in self.unmatched_slots)
            missing = [
                k
                for k in self.template.slot_keys()
                if normalize_key(k) not in allowed
            ]
            if missing:
                raise ValueError(
                    f"template slots {missing} missing from facts and the "
                    "unmatched-slot annotation"
                )


@dataclass(frozen=True)
class Config:
    """Pipeline knobs: similarity threshold, span slack, fill strategy."""

    delta: float = 0.8
    span_window_slack: int = 2
    strategy: str = "discard"

    def __post_init__(self):
        if not 0 < self.delta <= 1:
            raise ValueError(f"delta must be in (0, 1], got {self.delta}")
        if self.span_window_slack < 0:
            raise ValueError("span_window_slack must be non-negative")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
