"""The six model feature groups, readability scoring, and ablation masks.

Missing values are encoded as zero-fill plus an indicator column rather than
imputed, so learners can exploit hidden-score and missing-rank patterns
directly.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass
from enum import IntFlag

import numpy as np

from .core import LabeledInstance, Post

logger = logging.getLogger(__name__)

_VOWELS = set("aeiouy")
_WORD_RE = re.compile(r"\S+")
_LETTER_RE = re.compile(r"[^a-zA-Z]+")


class EmptyTextError(ValueError):
    """Raised when a readability score is requested for wordless text."""


class FeatureGroup(IntFlag):
    RANK = 1
    SCORE = 2
    READABILITY = 4
    SUBSCRIBERS = 8
    TITLE_LENGTH = 16
    SEMANTIC = 32


#: Bit order used everywhere a mask is rendered as a 6-character string.
GROUP_ORDER: tuple[FeatureGroup, ...] = (
    FeatureGroup.RANK,
    FeatureGroup.SCORE,
    FeatureGroup.READABILITY,
    FeatureGroup.SUBSCRIBERS,
    FeatureGroup.TITLE_LENGTH,
    FeatureGroup.SEMANTIC,
)

FULL_MASK = FeatureGroup(63)
EMPTY_MASK = FeatureGroup(0)


def enumerate_masks() -> list[FeatureGroup]:
    """All 64 masks in binary-counting order, empty first, full last."""
    return [FeatureGroup(bits) for bits in range(64)]


def mask_to_bits(mask: FeatureGroup) -> str:
    return "".join("1" if mask & group else "0" for group in GROUP_ORDER)


def mask_from_bits(bits: str) -> FeatureGroup:
    if len(bits) != 6 or any(c not in "01" for c in bits):
        raise ValueError(f"mask must be a 6-character 0/1 string, got {bits!r}")
    mask = FeatureGroup(0)
    for char, group in zip(bits, GROUP_ORDER):
        if char == "1":
            mask |= group
    return mask


def count_syllables(word: str) -> int:
    """Heuristic syllable count: vowel runs with a terminal silent-e rule.

    Words that end in consonant + "le" keep their final syllable ("table");
    other words ending in "e" with more than one vowel run drop one ("make").
    Never returns less than 1.
    """
    cleaned = _LETTER_RE.sub("", word).lower()
    if not cleaned:
        return 1
    runs = 0
    in_run = False
    for char in cleaned:
        if char in _VOWELS:
            if not in_run:
                runs += 1
                in_run = True
        else:
            in_run = False
    if (
        runs > 1
        and cleaned.endswith("e")
        and not (len(cleaned) >= 3 and cleaned.endswith("le") and cleaned[-3] not in _VOWELS)
    ):
        runs -= 1
    return max(1, runs)


def _words_of(text: str) -> list[str]:
    return [w for w in _WORD_RE.findall(text) if any(c.isalpha() for c in w)]


def _sentence_count(text: str) -> int:
    # Maximal segments terminated by a run of '.', '!' or '?'; a trailing
    # unterminated segment does not count. Minimum of one sentence.
    count = 0
    segment_has_word = False
    i = 0
    n = len(text)
    while i < n:
        char = text[i]
        if char in ".!?":
            if segment_has_word:
                count += 1
            segment_has_word = False
            while i < n and text[i] in ".!?":
                i += 1
        else:
            if char.isalpha():
                segment_has_word = True
            i += 1
    return max(1, count)


def flesch_reading_ease(text: str) -> float:
    """Reading-ease score: 206.835 - 1.015*(words/sentence) - 84.6*(syllables/word)."""
    words = _words_of(text)
    if not words:
        raise EmptyTextError("text contains no words")
    syllables = sum(count_syllables(w) for w in words)
    sentences = _sentence_count(text)
    return 206.835 - 1.015 * (len(words) / sentences) - 84.6 * (syllables / len(words))


def title_flesch(title: str) -> float:
    """Readability of a post title; wordless titles score 0 with a warning."""
    try:
        return flesch_reading_ease(title)
    except EmptyTextError:
        logger.warning("title has no words; readability recorded as 0")
        return 0.0


def signed_log_score(score: int) -> float:
    return math.copysign(math.log1p(abs(score)), score) if score else 0.0


@dataclass(frozen=True)
class FeatureVector:
    """All feature columns before mask projection."""

    rank_value: float
    rank_missing: float
    log_score: float
    score_hidden: float
    flesch: float
    log_subscribers: float
    title_words: float
    semantic: tuple[float, float, float, float]
    age_hours: float


def build_feature_vector(
    instance: LabeledInstance,
    post: Post,
    semantic_scores: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0),
    flesch: float | None = None,
) -> FeatureVector:
    """Assemble the full (unmasked) feature vector for one instance.

    ``flesch`` may be supplied by a caller that caches per-title scores.
    """
    if instance.rank is None:
        rank_value, rank_missing = 0.0, 1.0
    else:
        rank_value, rank_missing = float(instance.rank), 0.0
    if instance.score is None:
        log_score, score_hidden = 0.0, 1.0
    else:
        log_score, score_hidden = signed_log_score(instance.score), 0.0
    return FeatureVector(
        rank_value=rank_value,
        rank_missing=rank_missing,
        log_score=log_score,
        score_hidden=score_hidden,
        flesch=title_flesch(post.title) if flesch is None else flesch,
        log_subscribers=math.log1p(post.subscribers),
        title_words=float(len(post.title.split())),
        semantic=tuple(float(s) for s in semantic_scores),
        age_hours=instance.age_hours,
    )


_GROUP_COLUMNS: dict[FeatureGroup, tuple[str, ...]] = {
    FeatureGroup.RANK: ("rank_value", "rank_missing"),
    FeatureGroup.SCORE: ("log_score", "score_hidden"),
    FeatureGroup.READABILITY: ("flesch",),
    FeatureGroup.SUBSCRIBERS: ("log_subscribers",),
    FeatureGroup.TITLE_LENGTH: ("title_words",),
    FeatureGroup.SEMANTIC: (
        "semantic_upvote",
        "semantic_downvote",
        "semantic_browse_content",
        "semantic_browse_comments",
    ),
}


def feature_names(mask: FeatureGroup, include_age: bool = False) -> list[str]:
    """Active column names in canonical order for a mask."""
    names: list[str] = []
    for group in GROUP_ORDER:
        if mask & group:
            names.extend(_GROUP_COLUMNS[group])
    if include_age:
        names.append("age_hours")
    return names


def vector_to_array(vec: FeatureVector, mask: FeatureGroup, include_age: bool = False) -> np.ndarray:
    values: list[float] = []
    if mask & FeatureGroup.RANK:
        values += [vec.rank_value, vec.rank_missing]
    if mask & FeatureGroup.SCORE:
        values += [vec.log_score, vec.score_hidden]
    if mask & FeatureGroup.READABILITY:
        values.append(vec.flesch)
    if mask & FeatureGroup.SUBSCRIBERS:
        values.append(vec.log_subscribers)
    if mask & FeatureGroup.TITLE_LENGTH:
        values.append(vec.title_words)
    if mask & FeatureGroup.SEMANTIC:
        values.extend(vec.semantic)
    if include_age:
        values.append(vec.age_hours)
    return np.array(values, dtype=np.float64)


def extract_features(
    instance: LabeledInstance,
    post: Post,
    semantic_scores: tuple[float, float, float, float],
    mask: FeatureGroup,
    include_age: bool = False,
) -> np.ndarray:
    """Feature vector for one instance, projected to the active mask."""
    return vector_to_array(
        build_feature_vector(instance, post, semantic_scores), mask, include_age=include_age
    )


def build_matrix(
    instances: list[LabeledInstance],
    posts_by_id: dict[str, Post],
    semantic_matrix: np.ndarray | None,
    mask: FeatureGroup,
    include_age: bool = False,
) -> np.ndarray:
    """Feature matrix for a list of instances; per-title scores are cached.

    ``semantic_matrix`` is an (n, 4) array of semantic scores or None when the
    semantic group is masked off.
    """
    flesch_cache: dict[str, float] = {}
    rows = np.empty((len(instances), len(feature_names(mask, include_age))), dtype=np.float64)
    zeros = (0.0, 0.0, 0.0, 0.0)
    for i, instance in enumerate(instances):
        post = posts_by_id[instance.post_id]
        if post.post_id not in flesch_cache:
            flesch_cache[post.post_id] = title_flesch(post.title)
        sem = zeros if semantic_matrix is None else tuple(semantic_matrix[i])
        vec = build_feature_vector(instance, post, sem, flesch=flesch_cache[post.post_id])
        rows[i] = vector_to_array(vec, mask, include_age=include_age)
    return rows
