"""Ranking metrics, per-user reports, cross-user aggregation, and ablation.

AUC follows the pairwise definition: the probability that a random positive
outscores a random negative, ties counted half. Precision at the 0.5
threshold uses the empty-prediction convention of 1.0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import CLASS_INDEX, POSITIVE_TYPES, InteractionType, LabeledInstance
from .util import derive_rng


class UndefinedMetricError(ValueError):
    """The metric has no value for this input (e.g. single-class labels)."""


def _fractional_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks; tied values share the mean of their positions."""
    order = np.argsort(values, kind="mergesort")
    ordered = values[order]
    n = values.shape[0]
    ranks = np.empty(n)
    i = 0
    while i < n:
        j = i
        while j + 1 < n and ordered[j + 1] == ordered[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def roc_auc(scores: list[float] | np.ndarray, labels: list[int] | np.ndarray) -> float:
    """(wins + 0.5 * ties) / (positives * negatives) over all +/- pairs."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    positives = int(np.sum(labels == 1))
    negatives = int(labels.shape[0] - positives)
    if positives == 0 or negatives == 0:
        raise UndefinedMetricError("AUC needs at least one positive and one negative")
    ranks = _fractional_ranks(scores)
    rank_sum = float(ranks[labels == 1].sum())
    return (rank_sum - positives * (positives + 1) / 2.0) / (positives * negatives)


def precision_recall_at(
    scores: list[float] | np.ndarray,
    labels: list[int] | np.ndarray,
    threshold: float = 0.5,
) -> tuple[float, float]:
    """Precision and recall with "positive" meaning score strictly above threshold.

    No predicted positives yields precision 1.0 by convention; no actual
    positives makes recall undefined.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    predicted = scores > threshold
    actual = labels == 1
    if not actual.any():
        raise UndefinedMetricError("recall needs at least one positive label")
    tp = int(np.sum(predicted & actual))
    fp = int(np.sum(predicted & ~actual))
    fn = int(np.sum(~predicted & actual))
    precision = tp / (tp + fp) if (tp + fp) > 0 else 1.0
    recall = tp / (tp + fn)
    return precision, recall


@dataclass(frozen=True)
class UserReport:
    user_id: str
    auc: dict[InteractionType, float | None]
    precision: dict[InteractionType, float | None]
    recall: dict[InteractionType, float | None]
    n_test: dict[InteractionType, int]


def score_report(
    user_id: str, proba: np.ndarray, test: list[LabeledInstance], threshold: float = 0.5
) -> UserReport:
    """One-vs-rest metrics per positive type from a (n, 5) probability matrix."""
    if proba.shape[0] == 0:
        raise ValueError("empty test set")
    auc: dict[InteractionType, float | None] = {}
    precision: dict[InteractionType, float | None] = {}
    recall: dict[InteractionType, float | None] = {}
    n_test: dict[InteractionType, int] = {}
    label_idx = np.array([CLASS_INDEX[inst.label] for inst in test])
    for itype in POSITIVE_TYPES:
        col = CLASS_INDEX[itype]
        scores = proba[:, col]
        labels = (label_idx == col).astype(int)
        n_test[itype] = int(labels.sum())
        try:
            auc[itype] = roc_auc(scores, labels)
        except UndefinedMetricError:
            auc[itype] = None
        try:
            p, r = precision_recall_at(scores, labels, threshold)
            precision[itype], recall[itype] = p, r
        except UndefinedMetricError:
            predicted = scores > threshold
            precision[itype] = (
                float(np.sum(predicted & (labels == 1)) / predicted.sum()) if predicted.any() else 1.0
            )
            recall[itype] = None
    return UserReport(user_id=user_id, auc=auc, precision=precision, recall=recall, n_test=n_test)


@dataclass(frozen=True)
class AggregateCell:
    mean: float | None
    ci_low: float | None
    ci_high: float | None
    n_users: int


@dataclass(frozen=True)
class AggregateReport:
    per_type: dict[InteractionType, AggregateCell]
    mean_unweighted: AggregateCell
    mean_weighted: AggregateCell


def _cell(values: list[float]) -> AggregateCell:
    n = len(values)
    if n == 0:
        return AggregateCell(None, None, None, 0)
    mean = float(np.mean(values))
    if n == 1:
        return AggregateCell(mean, mean, mean, 1)
    half = 1.96 * float(np.std(values, ddof=1)) / math.sqrt(n)
    return AggregateCell(mean, mean - half, mean + half, n)


def aggregate(reports: list[UserReport]) -> AggregateReport:
    """Cross-user means with normal-approximation 95% intervals.

    The unweighted user mean averages the user's defined per-type AUCs; the
    weighted mean weights each defined type by the user's test count of it.
    """
    if not reports:
        raise ValueError("no reports to aggregate")
    per_type: dict[InteractionType, AggregateCell] = {}
    for itype in POSITIVE_TYPES:
        per_type[itype] = _cell([r.auc[itype] for r in reports if r.auc[itype] is not None])
    unweighted: list[float] = []
    weighted: list[float] = []
    for report in reports:
        defined = [(t, a) for t, a in report.auc.items() if a is not None]
        if not defined:
            continue
        unweighted.append(float(np.mean([a for _, a in defined])))
        counts = np.array([report.n_test[t] for t, _ in defined], dtype=np.float64)
        if counts.sum() > 0:
            weighted.append(float(np.dot([a for _, a in defined], counts) / counts.sum()))
    return AggregateReport(
        per_type=per_type, mean_unweighted=_cell(unweighted), mean_weighted=_cell(weighted)
    )


def random_baseline(
    test: list[LabeledInstance],
    itype: InteractionType,
    n_trials: int = 1000,
    seed: int = 0,
    threshold: float = 0.5,
) -> tuple[float, float]:
    """Mean precision/recall of uniform-random scores thresholded at 0.5."""
    if not test:
        raise ValueError("empty test set")
    labels = np.array([1 if inst.label is itype else 0 for inst in test])
    if labels.sum() == 0:
        raise UndefinedMetricError("recall needs at least one positive label")
    rng = derive_rng(seed, "random_baseline", itype.value)
    precisions = np.empty(n_trials)
    recalls = np.empty(n_trials)
    actual = labels == 1
    for trial in range(n_trials):
        predicted = rng.random(labels.shape[0]) > threshold
        tp = int(np.sum(predicted & actual))
        fp = int(np.sum(predicted & ~actual))
        precisions[trial] = tp / (tp + fp) if (tp + fp) > 0 else 1.0
        recalls[trial] = tp / actual.sum()
    return float(precisions.mean()), float(recalls.mean())


@dataclass(frozen=True)
class TraceRow:
    observed_at: int
    prob: float
    label: int
    outcome: str  # TP / FP / TN / FN


def trace_rows(
    proba: np.ndarray, test: list[LabeledInstance], itype: InteractionType, threshold: float = 0.5
) -> list[TraceRow]:
    """Per-instance outcome labels at the decision threshold, in test order."""
    col = CLASS_INDEX[itype]
    rows: list[TraceRow] = []
    for i, inst in enumerate(test):
        prob = float(proba[i, col])
        label = 1 if inst.label is itype else 0
        positive = prob > threshold
        if positive:
            outcome = "TP" if label else "FP"
        else:
            outcome = "FN" if label else "TN"
        rows.append(TraceRow(observed_at=inst.observed_at, prob=prob, label=label, outcome=outcome))
    return rows
