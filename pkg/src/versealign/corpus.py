"""Ingest, normalize, and index editions of a text tradition.

Editions arrive as plain UTF-8 text, one verse per physical line. Tokens are
whitespace-split and normalized (lowercase, NFC, edge punctuation stripped,
interior diacritics kept). The vocabulary is built from the corpus alone and
numbered deterministically: descending frequency, ties broken lexically.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from typing import Iterable


class CorpusError(ValueError):
    """Invalid ingest input or vocabulary misuse."""


def _strippable(ch: str) -> bool:
    return ch.isspace() or unicodedata.category(ch).startswith("P")


def normalize_token(raw: str) -> str:
    """Normalize one surface form; returns "" when nothing survives.

    Lowercase, NFC, punctuation stripped from both ends. Interior characters,
    including diacritics and apostrophes, are preserved. Idempotent.
    """
    s = unicodedata.normalize("NFC", raw.lower())
    start, end = 0, len(s)
    while start < end and _strippable(s[start]):
        start += 1
    while end > start and _strippable(s[end - 1]):
        end -= 1
    return unicodedata.normalize("NFC", s[start:end])


def tokenize(raw_line: str) -> list[str]:
    """Whitespace-split and normalize; drops tokens that normalize to ""."""
    return [t for t in (normalize_token(w) for w in raw_line.split()) if t]


@dataclass(frozen=True)
class Line:
    """One verse line: raw source text plus its normalized tokens.

    `tokens` are normalized surface forms; `token_ids` the matching dense
    vocabulary ids. Both sequences are parallel and non-empty.
    """

    edition_id: str
    index: int
    raw: str
    tokens: tuple[str, ...]
    token_ids: tuple[int, ...]

    @property
    def line_id(self) -> tuple[str, int]:
        return (self.edition_id, self.index)

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class Edition:
    edition_id: str
    title: str
    lines: tuple[Line, ...]

    def line(self, index: int) -> Line:
        if not 0 <= index < len(self.lines):
            raise CorpusError(f"edition {self.edition_id!r} has no line {index}")
        return self.lines[index]


@dataclass(frozen=True)
class Vocabulary:
    """Bijection between normalized forms and dense ids 0..V-1."""

    token_to_id: dict[str, int]
    id_to_token: tuple[str, ...]
    frequencies: tuple[int, ...]  # indexed by token id

    def __len__(self) -> int:
        return len(self.id_to_token)

    def id(self, token: str) -> int:
        try:
            return self.token_to_id[token]
        except KeyError:
            raise CorpusError(f"unknown token {token!r}") from None

    def token(self, token_id: int) -> str:
        if not 0 <= token_id < len(self.id_to_token):
            raise CorpusError(f"unknown token id {token_id}")
        return self.id_to_token[token_id]

    def to_json(self) -> dict:
        return {
            "tokens": dict(self.token_to_id),
            "frequencies": {str(i): f for i, f in enumerate(self.frequencies)},
        }

    @classmethod
    def from_json(cls, doc: dict) -> "Vocabulary":
        token_to_id = {t: int(i) for t, i in doc["tokens"].items()}
        size = len(token_to_id)
        id_to_token = [""] * size
        for t, i in token_to_id.items():
            id_to_token[i] = t
        freqs = [0] * size
        for i, f in doc["frequencies"].items():
            freqs[int(i)] = int(f)
        return cls(token_to_id, tuple(id_to_token), tuple(freqs))


def build_vocabulary(editions: Iterable[Edition]) -> Vocabulary:
    """Count tokens across editions and assign deterministic dense ids.

    Ordering: descending frequency, then lexicographic. The same multiset of
    editions always yields the same numbering.
    """
    editions = list(editions)
    if not editions:
        raise CorpusError("cannot build a vocabulary from zero editions")
    counts: dict[str, int] = {}
    for edition in editions:
        for line in edition.lines:
            for tok in line.tokens:
                counts[tok] = counts.get(tok, 0) + 1
    ordered = sorted(counts, key=lambda t: (-counts[t], t))
    token_to_id = {t: i for i, t in enumerate(ordered)}
    return Vocabulary(
        token_to_id=token_to_id,
        id_to_token=tuple(ordered),
        frequencies=tuple(counts[t] for t in ordered),
    )


class Corpus:
    """Owns the editions of one project and their shared vocabulary.

    Ingest is single-writer; each ingest renumbers the vocabulary canonically
    over everything seen so far, so token ids are stable once ingest is done.
    """

    def __init__(self) -> None:
        self.editions: dict[str, Edition] = {}
        self.vocabulary: Vocabulary = Vocabulary({}, (), ())

    def ingest_edition(self, source_text: str, edition_id: str, title: str = "") -> Edition:
        """Split into verse lines, normalize, and index one edition.

        Empty lines and lines whose tokens all normalize away are dropped;
        surviving lines are re-indexed contiguously from 0.
        """
        if not edition_id:
            raise CorpusError("edition_id must be non-empty")
        if edition_id in self.editions:
            raise CorpusError(f"edition {edition_id!r} already ingested")
        kept: list[tuple[str, list[str]]] = []
        for physical in source_text.split("\n"):
            raw = physical[:-1] if physical.endswith("\r") else physical
            tokens = tokenize(raw)
            if tokens:
                kept.append((raw, tokens))
        if not kept:
            raise CorpusError(f"edition {edition_id!r} normalizes to zero lines")

        provisional = Edition(
            edition_id=edition_id,
            title=title or edition_id,
            lines=tuple(
                Line(edition_id, i, raw, tuple(tokens), ())
                for i, (raw, tokens) in enumerate(kept)
            ),
        )
        self.editions[edition_id] = provisional
        self._renumber()
        return self.editions[edition_id]

    def _renumber(self) -> None:
        self.vocabulary = build_vocabulary(self.editions.values())
        t2i = self.vocabulary.token_to_id
        for eid, edition in self.editions.items():
            self.editions[eid] = Edition(
                edition_id=edition.edition_id,
                title=edition.title,
                lines=tuple(
                    Line(
                        line.edition_id,
                        line.index,
                        line.raw,
                        line.tokens,
                        tuple(t2i[t] for t in line.tokens),
                    )
                    for line in edition.lines
                ),
            )

    def edition(self, edition_id: str) -> Edition:
        try:
            return self.editions[edition_id]
        except KeyError:
            raise CorpusError(f"unknown edition {edition_id!r}") from None

    def line(self, line_id: tuple[str, int]) -> Line:
        edition_id, index = line_id
        return self.edition(edition_id).line(index)


def edition_to_json(edition: Edition) -> dict:
    return {
        "edition_id": edition.edition_id,
        "title": edition.title,
        "lines": [
            {"index": line.index, "raw": line.raw, "token_ids": list(line.token_ids)}
            for line in edition.lines
        ],
    }


def edition_from_json(doc: dict, vocabulary: Vocabulary) -> Edition:
    edition_id = doc["edition_id"]
    lines = []
    for rec in doc["lines"]:
        ids = tuple(int(i) for i in rec["token_ids"])
        lines.append(
            Line(
                edition_id=edition_id,
                index=int(rec["index"]),
                raw=rec["raw"],
                tokens=tuple(vocabulary.token(i) for i in ids),
                token_ids=ids,
            )
        )
    return Edition(edition_id=edition_id, title=doc["title"], lines=tuple(lines))
