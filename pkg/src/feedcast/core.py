"""Domain types shared across the pipeline, plus corpus-level validation.

Everything here is immutable after construction and safe to share across
parallel per-user tasks.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import cached_property


class InteractionType(Enum):
    UPVOTE = "upvote"
    DOWNVOTE = "downvote"
    BROWSE_CONTENT = "browse_content"
    BROWSE_COMMENTS = "browse_comments"
    DO_NOTHING = "do_nothing"


#: The four action classes that can appear in raw event logs. DO_NOTHING is
#: synthesized during instance assembly, never logged.
POSITIVE_TYPES: tuple[InteractionType, ...] = (
    InteractionType.UPVOTE,
    InteractionType.DOWNVOTE,
    InteractionType.BROWSE_CONTENT,
    InteractionType.BROWSE_COMMENTS,
)

#: Canonical class order for every multi-class model and probability vector.
CLASS_ORDER: tuple[InteractionType, ...] = POSITIVE_TYPES + (InteractionType.DO_NOTHING,)

CLASS_INDEX: dict[InteractionType, int] = {t: i for i, t in enumerate(CLASS_ORDER)}


class ViewContext(Enum):
    FRONTPAGE = "frontpage"
    ALL = "all"
    SUBREDDIT = "subreddit"

    @property
    def group(self) -> str:
        """Two-way analysis grouping: frontpage and /r/all form the "front" group."""
        return "subreddit" if self is ViewContext.SUBREDDIT else "front"


CONTEXT_GROUPS: tuple[str, str] = ("front", "subreddit")


@dataclass(frozen=True)
class Post:
    post_id: str
    subreddit: str
    title: str
    created_utc: int
    subscribers: int


@dataclass(frozen=True)
class InteractionEvent:
    user_id: str
    post_id: str
    itype: InteractionType
    timestamp: int
    context: ViewContext
    rank: int | None = None
    score: int | None = None  # None means the score was hidden at page load


@dataclass(frozen=True)
class LabeledInstance:
    """One (user, post) row for training or testing.

    ``sort_index`` is a stable tie-break key for chronological ordering; for a
    positive instance it is the index of the originating event, for a
    do-nothing instance the index of the witnessing event.
    """

    user_id: str
    post_id: str
    label: InteractionType
    observed_at: int
    context: ViewContext
    rank: int | None
    score: int | None
    age_hours: float
    sort_index: int = 0


@dataclass(frozen=True)
class Corpus:
    posts: tuple[Post, ...]
    events: tuple[InteractionEvent, ...]

    @cached_property
    def posts_by_id(self) -> dict[str, Post]:
        """First occurrence wins when a post_id repeats."""
        index: dict[str, Post] = {}
        for post in self.posts:
            index.setdefault(post.post_id, post)
        return index

    @cached_property
    def events_by_user(self) -> dict[str, list[tuple[int, InteractionEvent]]]:
        """User -> [(event index, event)] in corpus order."""
        index: dict[str, list[tuple[int, InteractionEvent]]] = {}
        for i, event in enumerate(self.events):
            index.setdefault(event.user_id, []).append((i, event))
        return index


@dataclass(frozen=True)
class Violation:
    """A data-quality finding. Violations are reported, never raised."""

    kind: str
    detail: str
    post_id: str | None = None
    user_id: str | None = None


def age_hours_of(event_ts: int, created_utc: int) -> float:
    """Post age at observation time, clamped at zero for out-of-order rows."""
    return max(0.0, (event_ts - created_utc) / 3600.0)


def validate_corpus(
    corpus: Corpus, min_interactions: int = 10
) -> tuple[set[str], list[Violation]]:
    """Check referential and ordering invariants and apply the activity floor.

    Returns the set of user ids with at least ``min_interactions`` events
    (boundary inclusive) and the list of violations found. Violating events
    still count toward their user's activity; downstream consumers clamp
    negative ages instead of dropping rows.
    """
    violations: list[Violation] = []

    seen: set[str] = set()
    for post in corpus.posts:
        if post.post_id in seen:
            violations.append(
                Violation("duplicate_post_id", "post_id occurs more than once", post_id=post.post_id)
            )
        seen.add(post.post_id)
        if not post.title:
            violations.append(Violation("empty_title", "post has an empty title", post_id=post.post_id))

    posts_by_id = corpus.posts_by_id
    counts: dict[str, int] = {}
    for event in corpus.events:
        counts[event.user_id] = counts.get(event.user_id, 0) + 1
        post = posts_by_id.get(event.post_id)
        if post is None:
            violations.append(
                Violation(
                    "dangling_post_id",
                    "event references an unknown post",
                    post_id=event.post_id,
                    user_id=event.user_id,
                )
            )
        elif event.timestamp < post.created_utc:
            violations.append(
                Violation(
                    "event_before_post",
                    f"event at {event.timestamp} precedes post creation {post.created_utc}",
                    post_id=event.post_id,
                    user_id=event.user_id,
                )
            )
        if event.rank is not None and event.rank < 1:
            violations.append(
                Violation(
                    "bad_rank",
                    f"rank {event.rank} is below 1",
                    post_id=event.post_id,
                    user_id=event.user_id,
                )
            )

    valid = {user for user, n in counts.items() if n >= min_interactions}
    return valid, violations
