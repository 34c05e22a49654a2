"""Per-user, per-type semantic interactivity scorers.

A scorer maps a post title to a probability of one interaction type from the
averaged word embeddings of the title plus three frozen centroid blocks: the
average over all training titles, over titles of posts that drew the type,
and over titles of posts that did not. The head is a one-hidden-layer
rectifier network with a logistic output trained by ADAM on log-loss.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .core import POSITIVE_TYPES, InteractionType, LabeledInstance, Post
from .ingest import EmbeddingTable
from .util import derive_rng

_TOKEN_RE = re.compile(r"[a-z0-9]+")

_P_FLOOR = 1e-12


def tokenize(text: str) -> list[str]:
    """Lowercase and split on non-alphanumeric characters."""
    return _TOKEN_RE.findall(text.lower())


def average_title_embedding(title: str, table: EmbeddingTable) -> np.ndarray:
    """Mean vector of in-vocabulary tokens; zero vector when none match."""
    total = np.zeros(table.dim)
    count = 0
    for token in tokenize(title):
        vec = table.get(token)
        if vec is not None:
            total += vec
            count += 1
    return total / count if count else total


@dataclass(frozen=True)
class CentroidSet:
    """Class-conditional embedding averages computed from the train split only."""

    overall: np.ndarray
    with_type: dict[InteractionType, np.ndarray]
    without_type: dict[InteractionType, np.ndarray]


def build_centroids(
    train_instances: list[LabeledInstance],
    posts_by_id: dict[str, Post],
    table: EmbeddingTable,
) -> CentroidSet:
    """Token-weighted overall centroid plus per-type with/without averages.

    with/without averages are over distinct posts (their title embeddings);
    an empty side falls back to the zero vector.
    """
    dim = table.dim
    post_ids: list[str] = []
    seen: set[str] = set()
    labels_by_post: dict[str, set[InteractionType]] = {}
    for instance in train_instances:
        if instance.post_id not in seen:
            seen.add(instance.post_id)
            post_ids.append(instance.post_id)
        if instance.label is not InteractionType.DO_NOTHING:
            labels_by_post.setdefault(instance.post_id, set()).add(instance.label)

    token_sum = np.zeros(dim)
    token_count = 0
    title_embeddings: dict[str, np.ndarray] = {}
    for post_id in post_ids:
        title = posts_by_id[post_id].title
        vecs = [table.get(t) for t in tokenize(title)]
        vecs = [v for v in vecs if v is not None]
        if vecs:
            token_sum += np.sum(vecs, axis=0)
            token_count += len(vecs)
            title_embeddings[post_id] = np.mean(vecs, axis=0)
        else:
            title_embeddings[post_id] = np.zeros(dim)

    overall = token_sum / token_count if token_count else token_sum
    with_type: dict[InteractionType, np.ndarray] = {}
    without_type: dict[InteractionType, np.ndarray] = {}
    for itype in POSITIVE_TYPES:
        have = [title_embeddings[p] for p in post_ids if itype in labels_by_post.get(p, ())]
        lack = [title_embeddings[p] for p in post_ids if itype not in labels_by_post.get(p, ())]
        with_type[itype] = np.mean(have, axis=0) if have else np.zeros(dim)
        without_type[itype] = np.mean(lack, axis=0) if lack else np.zeros(dim)
    return CentroidSet(overall=overall, with_type=with_type, without_type=without_type)


@dataclass(frozen=True)
class MlpParams:
    """One hidden layer: rectifier units, logistic output."""

    w1: np.ndarray  # (in_dim, hidden)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (hidden,)
    b2: float

    @property
    def in_dim(self) -> int:
        return self.w1.shape[0]


def init_mlp(in_dim: int, hidden: int, rng: np.random.Generator) -> MlpParams:
    # Uniform +-sqrt(6 / (fan_in + fan_out)) per layer.
    limit1 = math.sqrt(6.0 / (in_dim + hidden))
    limit2 = math.sqrt(6.0 / (hidden + 1))
    return MlpParams(
        w1=rng.uniform(-limit1, limit1, size=(in_dim, hidden)),
        b1=np.zeros(hidden),
        w2=rng.uniform(-limit2, limit2, size=hidden),
        b2=0.0,
    )


def _forward_batch(params: MlpParams, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    hidden = np.maximum(X @ params.w1 + params.b1, 0.0)
    logits = hidden @ params.w2 + params.b2
    return 1.0 / (1.0 + np.exp(-logits)), hidden


def mlp_forward(params: MlpParams, x: np.ndarray) -> float:
    """Probability for one input vector."""
    if x.shape[-1] != params.in_dim:
        raise ValueError(f"input length {x.shape[-1]} does not match network width {params.in_dim}")
    p, _ = _forward_batch(params, x.reshape(1, -1))
    return float(p[0])


def _loss(p: np.ndarray, y: np.ndarray) -> np.ndarray:
    clamped = np.clip(p, _P_FLOOR, 1.0 - _P_FLOOR)
    return -(y * np.log(clamped) + (1.0 - y) * np.log(1.0 - clamped))


def _gradient_batch(
    params: MlpParams, X: np.ndarray, y: np.ndarray
) -> tuple[dict[str, np.ndarray | float], float]:
    """Mean log-loss over the batch and its gradient by backpropagation."""
    n = X.shape[0]
    p, hidden = _forward_batch(params, X)
    delta = (p - y) / n  # d(mean loss)/d(logit), with p clamped only in the loss
    grad_w2 = hidden.T @ delta
    grad_b2 = float(delta.sum())
    back = np.outer(delta, params.w2)
    back[hidden <= 0.0] = 0.0
    grad_w1 = X.T @ back
    grad_b1 = back.sum(axis=0)
    loss = float(_loss(p, y).mean())
    return {"w1": grad_w1, "b1": grad_b1, "w2": grad_w2, "b2": grad_b2}, loss


def mlp_gradient(
    params: MlpParams, x: np.ndarray, label: int
) -> tuple[dict[str, np.ndarray | float], float]:
    """Single-example loss and gradient; label must be 0 or 1."""
    if x.shape[-1] != params.in_dim:
        raise ValueError(f"input length {x.shape[-1]} does not match network width {params.in_dim}")
    return _gradient_batch(params, x.reshape(1, -1), np.array([float(label)]))


@dataclass
class AdamState:
    t: int
    m: dict[str, np.ndarray | float]
    v: dict[str, np.ndarray | float]
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8


def init_adam(params: MlpParams, lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999, epsilon: float = 1e-8) -> AdamState:
    zeros = {
        "w1": np.zeros_like(params.w1),
        "b1": np.zeros_like(params.b1),
        "w2": np.zeros_like(params.w2),
        "b2": 0.0,
    }
    m = {k: (v.copy() if isinstance(v, np.ndarray) else v) for k, v in zeros.items()}
    v = {k: (val.copy() if isinstance(val, np.ndarray) else val) for k, val in zeros.items()}
    return AdamState(t=0, m=m, v=v, lr=lr, beta1=beta1, beta2=beta2, epsilon=epsilon)


def adam_step(
    state: AdamState, params: MlpParams, grads: dict[str, np.ndarray | float]
) -> tuple[MlpParams, AdamState]:
    """Standard bias-corrected ADAM update; returns new params and state."""
    t = state.t + 1
    bc1 = 1.0 - state.beta1**t
    bc2 = 1.0 - state.beta2**t
    new_values: dict[str, np.ndarray | float] = {}
    new_m: dict[str, np.ndarray | float] = {}
    new_v: dict[str, np.ndarray | float] = {}
    for key in ("w1", "b1", "w2", "b2"):
        g = grads[key]
        m = state.beta1 * state.m[key] + (1.0 - state.beta1) * g
        v = state.beta2 * state.v[key] + (1.0 - state.beta2) * (g * g)
        m_hat = m / bc1
        v_hat = v / bc2
        step = state.lr * m_hat / (np.sqrt(v_hat) + state.epsilon)
        new_m[key] = m
        new_v[key] = v
        new_values[key] = getattr(params, key) - step
    new_params = MlpParams(
        w1=new_values["w1"], b1=new_values["b1"], w2=new_values["w2"], b2=float(new_values["b2"])
    )
    return new_params, AdamState(
        t=t, m=new_m, v=new_v, lr=state.lr, beta1=state.beta1, beta2=state.beta2, epsilon=state.epsilon
    )


@dataclass(frozen=True)
class TrainSettings:
    hidden: int = 64
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    batch_size: int = 32
    max_epochs: int = 50
    patience: int = 5
    min_improvement: float = 1e-4

    def to_dict(self) -> dict:
        return {
            "hidden": self.hidden,
            "lr": self.lr,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "epsilon": self.epsilon,
            "batch_size": self.batch_size,
            "max_epochs": self.max_epochs,
            "patience": self.patience,
            "min_improvement": self.min_improvement,
        }

    @staticmethod
    def from_dict(data: dict) -> "TrainSettings":
        return TrainSettings(**data)


@dataclass(frozen=True)
class SemanticScorer:
    """Frozen centroids plus either a trained head or a constant base rate."""

    itype: InteractionType
    centroids: CentroidSet
    params: MlpParams | None
    base_rate: float
    degenerate: bool

    @property
    def dim(self) -> int:
        return self.centroids.overall.shape[0]


def scorer_input(
    title_embedding: np.ndarray, centroids: CentroidSet, itype: InteractionType
) -> np.ndarray:
    return np.concatenate(
        [title_embedding, centroids.overall, centroids.with_type[itype], centroids.without_type[itype]]
    )


def _input_matrix(
    instances: list[LabeledInstance],
    posts_by_id: dict[str, Post],
    table: EmbeddingTable,
    centroids: CentroidSet,
    itype: InteractionType,
    embedding_cache: dict[str, np.ndarray] | None = None,
) -> np.ndarray:
    cache = embedding_cache if embedding_cache is not None else {}
    rows = np.empty((len(instances), 4 * table.dim))
    constant = np.concatenate(
        [centroids.overall, centroids.with_type[itype], centroids.without_type[itype]]
    )
    for i, instance in enumerate(instances):
        vec = cache.get(instance.post_id)
        if vec is None:
            vec = average_title_embedding(posts_by_id[instance.post_id].title, table)
            cache[instance.post_id] = vec
        rows[i, : table.dim] = vec
        rows[i, table.dim :] = constant
    return rows


def train_semantic_scorer(
    user_id: str,
    itype: InteractionType,
    train_instances: list[LabeledInstance],
    posts_by_id: dict[str, Post],
    table: EmbeddingTable,
    settings: TrainSettings,
    seed: int,
    centroids: CentroidSet | None = None,
    embedding_cache: dict[str, np.ndarray] | None = None,
) -> tuple[SemanticScorer, list[float]]:
    """Train one (user, type) scorer on the train split.

    Single-class targets yield a degenerate constant scorer at the base rate.
    Returns the scorer and the per-epoch mean-loss history.
    """
    if centroids is None:
        centroids = build_centroids(train_instances, posts_by_id, table)
    y = np.array([1.0 if inst.label is itype else 0.0 for inst in train_instances])
    base_rate = float(y.mean()) if y.size else 0.0
    if y.size == 0 or y.min() == y.max():
        return (
            SemanticScorer(itype=itype, centroids=centroids, params=None, base_rate=base_rate, degenerate=True),
            [],
        )

    X = _input_matrix(train_instances, posts_by_id, table, centroids, itype, embedding_cache)
    rng = derive_rng(seed, "semantic", user_id, itype.value)
    params = init_mlp(4 * table.dim, settings.hidden, rng)
    state = init_adam(
        params, lr=settings.lr, beta1=settings.beta1, beta2=settings.beta2, epsilon=settings.epsilon
    )

    n = X.shape[0]
    history: list[float] = []
    best = math.inf
    stale = 0
    for _ in range(settings.max_epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, settings.batch_size):
            batch = order[start : start + settings.batch_size]
            grads, loss = _gradient_batch(params, X[batch], y[batch])
            params, state = adam_step(state, params, grads)
            epoch_loss += loss * batch.size
        epoch_loss /= n
        history.append(epoch_loss)
        if epoch_loss < best - settings.min_improvement:
            best = epoch_loss
            stale = 0
        else:
            stale += 1
            if stale >= settings.patience:
                break
    scorer = SemanticScorer(
        itype=itype, centroids=centroids, params=params, base_rate=base_rate, degenerate=False
    )
    return scorer, history


def score_semantic(scorer: SemanticScorer, post: Post, table: EmbeddingTable) -> float:
    """Probability in [0, 1] that the post's title draws the scorer's type."""
    if scorer.degenerate or scorer.params is None:
        return scorer.base_rate
    x = scorer_input(average_title_embedding(post.title, table), scorer.centroids, scorer.itype)
    return mlp_forward(scorer.params, x)


def score_semantic_many(
    scorer: SemanticScorer,
    instances: list[LabeledInstance],
    posts_by_id: dict[str, Post],
    table: EmbeddingTable,
    embedding_cache: dict[str, np.ndarray] | None = None,
) -> np.ndarray:
    if scorer.degenerate or scorer.params is None:
        return np.full(len(instances), scorer.base_rate)
    X = _input_matrix(instances, posts_by_id, table, scorer.centroids, scorer.itype, embedding_cache)
    p, _ = _forward_batch(scorer.params, X)
    return p
