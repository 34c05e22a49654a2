"""Non-interaction sampling, instance assembly, and the temporal split.

A user's do-nothing candidates are posts that drew someone else's interaction
in the same subreddit within a +-window of one of the user's own events,
minus every post the user ever touched. Candidates collapse to one instance
per post, keeping the earliest witnessing event's context snapshot.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from functools import cached_property

from .core import Corpus, InteractionEvent, InteractionType, LabeledInstance, age_hours_of


@dataclass(frozen=True)
class SplitDataset:
    train: tuple[LabeledInstance, ...]
    test: tuple[LabeledInstance, ...]


@dataclass(frozen=True)
class CorpusIndex:
    """Read-only per-subreddit time index shared by all per-user tasks."""

    corpus: Corpus

    @cached_property
    def by_subreddit(self) -> dict[str, tuple[list[int], list[tuple[int, InteractionEvent]]]]:
        posts = self.corpus.posts_by_id
        grouped: dict[str, list[tuple[int, int, InteractionEvent]]] = {}
        for i, event in enumerate(self.corpus.events):
            post = posts.get(event.post_id)
            if post is None:
                continue
            grouped.setdefault(post.subreddit, []).append((event.timestamp, i, event))
        out: dict[str, tuple[list[int], list[tuple[int, InteractionEvent]]]] = {}
        for sub, rows in grouped.items():
            rows.sort(key=lambda r: (r[0], r[1]))
            out[sub] = ([r[0] for r in rows], [(r[1], r[2]) for r in rows])
        return out


def build_negatives(
    corpus: Corpus,
    user_id: str,
    window_hours: float = 12.0,
    index: CorpusIndex | None = None,
) -> list[LabeledInstance]:
    """Do-nothing instances for one user, sorted by (observed_at, witness index)."""
    user_events = corpus.events_by_user.get(user_id)
    if not user_events:
        raise ValueError(f"unknown user {user_id!r}")
    if index is None:
        index = CorpusIndex(corpus)
    posts_by_id = corpus.posts_by_id
    window = window_hours * 3600.0
    interacted = {e.post_id for _, e in user_events}

    # candidate post -> (witness timestamp, witness event index, witness event)
    earliest: dict[str, tuple[int, int, InteractionEvent]] = {}
    for _, event in user_events:
        post = posts_by_id.get(event.post_id)
        if post is None:
            continue
        sub_index = index.by_subreddit.get(post.subreddit)
        if sub_index is None:
            continue
        timestamps, rows = sub_index
        lo = bisect_left(timestamps, event.timestamp - window)
        hi = bisect_right(timestamps, event.timestamp + window)
        for witness_index, witness in rows[lo:hi]:
            if witness.user_id == user_id or witness.post_id in interacted:
                continue
            key = (witness.timestamp, witness_index, witness)
            current = earliest.get(witness.post_id)
            if current is None or key[:2] < current[:2]:
                earliest[witness.post_id] = key

    negatives: list[LabeledInstance] = []
    for post_id, (ts, witness_index, witness) in sorted(
        earliest.items(), key=lambda kv: (kv[1][0], kv[1][1])
    ):
        created = posts_by_id[post_id].created_utc
        negatives.append(
            LabeledInstance(
                user_id=user_id,
                post_id=post_id,
                label=InteractionType.DO_NOTHING,
                observed_at=ts,
                context=witness.context,
                rank=witness.rank,
                score=witness.score,
                age_hours=age_hours_of(ts, created),
                sort_index=witness_index,
            )
        )
    return negatives


def assemble_instances(
    corpus: Corpus, user_id: str, negatives: list[LabeledInstance]
) -> list[LabeledInstance]:
    """One positive instance per raw event, plus all do-nothing instances."""
    posts_by_id = corpus.posts_by_id
    instances: list[LabeledInstance] = []
    for event_index, event in corpus.events_by_user.get(user_id, []):
        post = posts_by_id.get(event.post_id)
        created = post.created_utc if post is not None else event.timestamp
        instances.append(
            LabeledInstance(
                user_id=user_id,
                post_id=event.post_id,
                label=event.itype,
                observed_at=event.timestamp,
                context=event.context,
                rank=event.rank,
                score=event.score,
                age_hours=age_hours_of(event.timestamp, created),
                sort_index=event_index,
            )
        )
    instances.extend(negatives)
    return instances


def temporal_split(instances: list[LabeledInstance], train_fraction: float = 0.5) -> SplitDataset:
    """Chronological split: the first ceil(n * fraction) instances train.

    Ordering is by (observed_at, sort_index) so ties resolve to the stable
    event index and the train/test boundary is deterministic.
    """
    if len(instances) < 2:
        raise ValueError("unsplittable: need at least 2 instances")
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be in (0, 1)")
    ordered = sorted(instances, key=lambda inst: (inst.observed_at, inst.sort_index))
    cut = math.ceil(len(ordered) * train_fraction)
    cut = min(cut, len(ordered))
    return SplitDataset(train=tuple(ordered[:cut]), test=tuple(ordered[cut:]))
