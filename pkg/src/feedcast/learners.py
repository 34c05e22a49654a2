"""From-scratch multi-class classifiers behind one predict_proba contract.

Gaussian naive Bayes with a variance floor, and discrete multi-class boosting
(SAMME-style round weights) over depth-1 decision stumps. A prior-only model
covers degenerate cases such as an empty feature mask.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

N_CLASSES = 5
_ALPHA_CAP = math.log(1e12)


class DegenerateLabelsError(ValueError):
    """Raised when boosting is asked to fit single-class data."""


@dataclass(frozen=True)
class Stump:
    """Depth-1 split: predict ``left`` when x[feature] <= threshold, else ``right``."""

    feature: int
    threshold: float
    left: int
    right: int

    def predict(self, X: np.ndarray) -> np.ndarray:
        go_left = X[:, self.feature] <= self.threshold
        return np.where(go_left, self.left, self.right)


@dataclass(frozen=True, eq=False)
class GaussianNBModel:
    kind = "nb"
    priors: np.ndarray  # (C,)
    means: np.ndarray  # (C, K)
    variances: np.ndarray  # (C, K) floored
    n_features: int

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return nb_predict_proba_many(self, X)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "priors": self.priors.tolist(),
            "means": self.means.tolist(),
            "variances": self.variances.tolist(),
            "n_features": self.n_features,
        }

    @staticmethod
    def from_dict(data: dict) -> "GaussianNBModel":
        return GaussianNBModel(
            priors=np.array(data["priors"], dtype=np.float64),
            means=np.array(data["means"], dtype=np.float64),
            variances=np.array(data["variances"], dtype=np.float64),
            n_features=int(data["n_features"]),
        )


@dataclass(frozen=True, eq=False)
class AdaboostModel:
    kind = "adaboost"
    rounds: tuple[tuple[Stump, float], ...]
    n_classes: int = N_CLASSES
    n_features: int = 0

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return ab_predict_proba_many(self, X)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "n_classes": self.n_classes,
            "n_features": self.n_features,
            "rounds": [
                {
                    "feature": s.feature,
                    "threshold": s.threshold,
                    "left": s.left,
                    "right": s.right,
                    "alpha": alpha,
                }
                for s, alpha in self.rounds
            ],
        }

    @staticmethod
    def from_dict(data: dict) -> "AdaboostModel":
        rounds = tuple(
            (Stump(r["feature"], r["threshold"], r["left"], r["right"]), float(r["alpha"]))
            for r in data["rounds"]
        )
        return AdaboostModel(
            rounds=rounds, n_classes=int(data["n_classes"]), n_features=int(data["n_features"])
        )


@dataclass(frozen=True, eq=False)
class PriorModel:
    """Constant class-frequency predictor; used for empty masks and as the
    fallback when a user's training labels are single-class."""

    kind = "prior"
    priors: np.ndarray

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return np.tile(self.priors, (X.shape[0], 1))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "priors": self.priors.tolist()}

    @staticmethod
    def from_dict(data: dict) -> "PriorModel":
        return PriorModel(priors=np.array(data["priors"], dtype=np.float64))


ClassifierModel = GaussianNBModel | AdaboostModel | PriorModel


def model_from_dict(data: dict) -> ClassifierModel:
    kind = data["kind"]
    if kind == "nb":
        return GaussianNBModel.from_dict(data)
    if kind == "adaboost":
        return AdaboostModel.from_dict(data)
    if kind == "prior":
        return PriorModel.from_dict(data)
    raise ValueError(f"unknown classifier kind {kind!r}")


def class_priors(y: np.ndarray, n_classes: int = N_CLASSES) -> np.ndarray:
    counts = np.bincount(y, minlength=n_classes).astype(np.float64)
    return counts / counts.sum()


def train_gaussian_nb(X: np.ndarray, y: np.ndarray, n_classes: int = N_CLASSES) -> GaussianNBModel:
    """Empirical priors and per-class feature means/variances.

    The variance floor is 1e-9 times the largest overall feature variance
    (1e-9 when every feature is constant), applied as a lower bound so that
    constant-within-class columns keep a proper likelihood.
    """
    if X.shape[0] == 0:
        raise ValueError("cannot train on an empty dataset")
    n, k = X.shape
    priors = class_priors(y, n_classes)
    if k > 0:
        max_var = float(np.max(np.var(X, axis=0)))
    else:
        max_var = 0.0
    floor = 1e-9 * max_var if max_var > 0 else 1e-9
    means = np.zeros((n_classes, k))
    variances = np.full((n_classes, k), floor)
    for c in range(n_classes):
        rows = X[y == c]
        if rows.shape[0] == 0:
            continue
        means[c] = rows.mean(axis=0)
        variances[c] = np.maximum(rows.var(axis=0), floor)
    return GaussianNBModel(priors=priors, means=means, variances=variances, n_features=k)


def nb_predict_proba_many(model: GaussianNBModel, X: np.ndarray) -> np.ndarray:
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ValueError(
            f"feature width mismatch: model expects {model.n_features}, got {X.shape[1] if X.ndim == 2 else X.ndim}"
        )
    n = X.shape[0]
    n_classes = model.priors.shape[0]
    present = model.priors > 0
    log_joint = np.full((n, n_classes), -np.inf)
    for c in np.nonzero(present)[0]:
        var = model.variances[c]
        log_like = -0.5 * np.sum(
            np.log(2.0 * np.pi * var) + (X - model.means[c]) ** 2 / var, axis=1
        )
        log_joint[:, c] = math.log(model.priors[c]) + log_like
    peak = np.max(log_joint, axis=1, keepdims=True)
    weights = np.exp(log_joint - peak)
    return weights / weights.sum(axis=1, keepdims=True)


def nb_predict_proba(model: GaussianNBModel, x: np.ndarray) -> np.ndarray:
    return nb_predict_proba_many(model, x.reshape(1, -1))[0]


def fit_stump(
    X: np.ndarray, y: np.ndarray, weights: np.ndarray, n_classes: int = N_CLASSES
) -> tuple[Stump, float]:
    """Exhaustive best stump over (feature, midpoint-threshold) candidates.

    Each side predicts its weight-majority class (lowest class index on ties).
    Ties on weighted error break toward the lower feature index, then the
    lower threshold. When every feature is constant there are no candidate
    splits and both sides predict the overall majority class.
    """
    n, k = X.shape
    class_weights = np.zeros((n, n_classes))
    class_weights[np.arange(n), y] = weights
    totals = class_weights.sum(axis=0)
    total_weight = weights.sum()

    best: Stump | None = None
    best_error = math.inf
    for j in range(k):
        order = np.argsort(X[:, j], kind="stable")
        xs = X[order, j]
        cuts = np.nonzero(xs[1:] > xs[:-1])[0]
        if cuts.size == 0:
            continue
        prefix = np.cumsum(class_weights[order], axis=0)[cuts]
        suffix = totals - prefix
        left_best = prefix.max(axis=1)
        right_best = suffix.max(axis=1)
        errors = total_weight - left_best - right_best
        i = int(np.argmin(errors))
        if errors[i] < best_error:
            best_error = float(errors[i])
            threshold = (xs[cuts[i]] + xs[cuts[i] + 1]) / 2.0
            best = Stump(
                feature=j,
                threshold=float(threshold),
                left=int(np.argmax(prefix[i])),
                right=int(np.argmax(suffix[i])),
            )
    if best is None:
        majority = int(np.argmax(totals))
        fallback = float(X[0, 0]) if k > 0 else 0.0
        return Stump(0, fallback, majority, majority), float(total_weight - totals[majority])
    return best, best_error


def train_adaboost(
    X: np.ndarray,
    y: np.ndarray,
    n_rounds: int = 100,
    n_classes: int = N_CLASSES,
) -> AdaboostModel:
    """Discrete multi-class boosting with alpha = ln((1-err)/err) + ln(K-1).

    A round with error >= (K-1)/K is discarded and training stops; a perfect
    round keeps a capped alpha and stops.
    """
    if np.unique(y).size < 2:
        raise DegenerateLabelsError("degenerate labels: boosting needs at least two classes")
    n = X.shape[0]
    weights = np.full(n, 1.0 / n)
    chance = (n_classes - 1) / n_classes
    ln_k1 = math.log(n_classes - 1)
    rounds: list[tuple[Stump, float]] = []
    for _ in range(n_rounds):
        stump, error = fit_stump(X, y, weights, n_classes)
        if error >= chance:
            break
        if error <= 0.0:
            rounds.append((stump, _ALPHA_CAP + ln_k1))
            break
        alpha = math.log((1.0 - error) / error) + ln_k1
        rounds.append((stump, alpha))
        misclassified = stump.predict(X) != y
        weights = weights * np.exp(alpha * misclassified)
        weights = weights / weights.sum()
    return AdaboostModel(rounds=tuple(rounds), n_classes=n_classes, n_features=X.shape[1])


def ab_predict_proba_many(model: AdaboostModel, X: np.ndarray) -> np.ndarray:
    if not model.rounds:
        raise ValueError("model has no boosting rounds")
    n = X.shape[0]
    votes = np.zeros((n, model.n_classes))
    rows = np.arange(n)
    for stump, alpha in model.rounds:
        votes[rows, stump.predict(X)] += alpha
    sums = votes.sum(axis=1, keepdims=True)
    uniform = np.full(model.n_classes, 1.0 / model.n_classes)
    with np.errstate(invalid="ignore", divide="ignore"):
        probs = np.where(sums > 0, votes / sums, uniform)
    return probs


def ab_predict_proba(model: AdaboostModel, x: np.ndarray) -> np.ndarray:
    return ab_predict_proba_many(model, x.reshape(1, -1))[0]


def fit_classifier(
    kind: str, X: np.ndarray, y: np.ndarray, n_rounds: int = 100, n_classes: int = N_CLASSES
) -> ClassifierModel:
    """Shared training entry used by both the bundle builder and the ablation
    harness, so identical inputs yield bit-identical models."""
    if X.shape[1] == 0:
        return PriorModel(priors=class_priors(y, n_classes))
    if kind == "nb":
        return train_gaussian_nb(X, y, n_classes)
    if kind == "adaboost":
        try:
            return train_adaboost(X, y, n_rounds=n_rounds, n_classes=n_classes)
        except DegenerateLabelsError:
            return PriorModel(priors=class_priors(y, n_classes))
    raise ValueError(f"unknown learner kind {kind!r}")
