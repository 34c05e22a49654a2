"""Parsers and writers for the post log, event log, and embedding table.

Post and event logs are JSON-lines: one record per line, UTF-8. Event parsing
is tolerant (bad lines are reported and skipped); embedding parsing is
fail-fast because a corrupt table silently poisons every semantic score.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import BinaryIO, Iterable

import numpy as np

from .core import Corpus, InteractionEvent, InteractionType, Post, ViewContext


class ParseError(ValueError):
    """Fatal parse failure (embedding table only)."""


@dataclass(frozen=True)
class LineError:
    line_no: int
    reason: str


@dataclass(frozen=True)
class EmbeddingTable:
    """Token -> vector map of fixed dimension, immutable after load."""

    dim: int
    vectors: dict[str, np.ndarray]

    def get(self, token: str) -> np.ndarray | None:
        return self.vectors.get(token)

    def __contains__(self, token: str) -> bool:
        return token in self.vectors

    def __len__(self) -> int:
        return len(self.vectors)


_ITYPE_BY_NAME = {t.value: t for t in InteractionType if t is not InteractionType.DO_NOTHING}
_CONTEXT_BY_NAME = {c.value: c for c in ViewContext}


def _decode_lines(stream: BinaryIO | Iterable[bytes]) -> Iterable[tuple[int, str]]:
    for line_no, raw in enumerate(stream, start=1):
        yield line_no, raw.decode("utf-8")


def _field(record: dict, name: str, kind: type) -> object:
    if name not in record:
        raise ValueError(f"missing field {name}")
    value = record[name]
    if kind is int:
        # bool is an int subclass; reject it explicitly
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValueError(f"field {name} must be an integer")
    elif not isinstance(value, kind):
        raise ValueError(f"field {name} must be a {kind.__name__}")
    return value


def parse_posts(stream: BinaryIO | Iterable[bytes]) -> tuple[list[Post], list[LineError]]:
    """Parse a post log. Malformed lines become LineErrors; first duplicate wins."""
    posts: list[Post] = []
    errors: list[LineError] = []
    seen: set[str] = set()
    for line_no, text in _decode_lines(stream):
        if not text.strip():
            continue
        try:
            record = json.loads(text)
            if not isinstance(record, dict):
                raise ValueError("record is not an object")
            post = Post(
                post_id=_field(record, "post_id", str),
                subreddit=_field(record, "subreddit", str),
                title=_field(record, "title", str),
                created_utc=_field(record, "created_utc", int),
                subscribers=_field(record, "subscribers", int),
            )
            if post.subscribers < 0:
                raise ValueError("field subscribers must be nonnegative")
        except ValueError as exc:
            errors.append(LineError(line_no, str(exc)))
            continue
        except json.JSONDecodeError as exc:
            errors.append(LineError(line_no, f"invalid JSON: {exc.msg}"))
            continue
        if post.post_id in seen:
            errors.append(LineError(line_no, "duplicate post_id"))
            continue
        seen.add(post.post_id)
        posts.append(post)
    return posts, errors


def parse_events(
    stream: BinaryIO | Iterable[bytes], posts: dict[str, Post]
) -> tuple[list[InteractionEvent], list[LineError]]:
    """Parse an event log against already-parsed posts."""
    events: list[InteractionEvent] = []
    errors: list[LineError] = []
    for line_no, text in _decode_lines(stream):
        if not text.strip():
            continue
        try:
            record = json.loads(text)
            if not isinstance(record, dict):
                raise ValueError("record is not an object")
            itype_name = _field(record, "itype", str)
            if itype_name not in _ITYPE_BY_NAME:
                raise ValueError("unsupported interaction type")
            context_name = _field(record, "context", str)
            if context_name not in _CONTEXT_BY_NAME:
                raise ValueError("unknown context")
            post_id = _field(record, "post_id", str)
            if post_id not in posts:
                raise ValueError("unknown post_id")
            rank = None
            if "rank" in record and record["rank"] is not None:
                rank = _field(record, "rank", int)
            score = None
            if "score" in record and record["score"] is not None:
                score = _field(record, "score", int)
            events.append(
                InteractionEvent(
                    user_id=_field(record, "user_id", str),
                    post_id=post_id,
                    itype=_ITYPE_BY_NAME[itype_name],
                    timestamp=_field(record, "timestamp", int),
                    context=_CONTEXT_BY_NAME[context_name],
                    rank=rank,
                    score=score,
                )
            )
        except ValueError as exc:
            errors.append(LineError(line_no, str(exc)))
        except json.JSONDecodeError as exc:
            errors.append(LineError(line_no, f"invalid JSON: {exc.msg}"))
    return events, errors


def parse_embedding_table(stream: BinaryIO | Iterable[bytes]) -> EmbeddingTable:
    """Parse a plain-text embedding table: "token v1 v2 ... vd" per line.

    Fail-fast: dimension mismatches, duplicate tokens, unparsable values, and
    empty input all raise ParseError naming the offending line.
    """
    dim: int | None = None
    vectors: dict[str, np.ndarray] = {}
    for line_no, text in _decode_lines(stream):
        parts = text.split()
        if not parts:
            continue
        token = parts[0]
        if not token:
            raise ParseError(f"empty token at line {line_no}")
        try:
            values = np.array([float(v) for v in parts[1:]], dtype=np.float64)
        except ValueError:
            raise ParseError(f"non-numeric vector component at line {line_no}") from None
        if dim is None:
            if values.size == 0:
                raise ParseError(f"no vector components at line {line_no}")
            dim = int(values.size)
        elif values.size != dim:
            raise ParseError(
                f"dimension mismatch at line {line_no}: expected {dim}, got {values.size}"
            )
        if token in vectors:
            raise ParseError(f"duplicate token {token!r} at line {line_no}")
        values.flags.writeable = False
        vectors[token] = values
    if dim is None:
        raise ParseError("empty embedding table")
    return EmbeddingTable(dim=dim, vectors=vectors)


def load_corpus(posts_path: str, events_path: str) -> tuple[Corpus, list[LineError], list[LineError]]:
    with open(posts_path, "rb") as fh:
        posts, post_errors = parse_posts(fh)
    by_id = {p.post_id: p for p in posts}
    with open(events_path, "rb") as fh:
        events, event_errors = parse_events(fh, by_id)
    return Corpus(posts=tuple(posts), events=tuple(events)), post_errors, event_errors


def load_embedding_table(path: str) -> EmbeddingTable:
    with open(path, "rb") as fh:
        return parse_embedding_table(fh)


def post_to_json(post: Post) -> str:
    return json.dumps(
        {
            "post_id": post.post_id,
            "subreddit": post.subreddit,
            "title": post.title,
            "created_utc": post.created_utc,
            "subscribers": post.subscribers,
        },
        ensure_ascii=False,
    )


def event_to_json(event: InteractionEvent) -> str:
    record: dict[str, object] = {
        "user_id": event.user_id,
        "post_id": event.post_id,
        "itype": event.itype.value,
        "timestamp": event.timestamp,
        "context": event.context.value,
    }
    if event.rank is not None:
        record["rank"] = event.rank
    if event.score is not None:
        record["score"] = event.score
    return json.dumps(record, ensure_ascii=False)


def write_posts(posts: Iterable[Post], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for post in posts:
            fh.write(post_to_json(post) + "\n")


def write_events(events: Iterable[InteractionEvent], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for event in events:
            fh.write(event_to_json(event) + "\n")


def write_embedding_table(table: EmbeddingTable, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for token, vec in table.vectors.items():
            fh.write(token + " " + " ".join(repr(float(v)) for v in vec) + "\n")
