# analysis/probing.py
"""
Linear probing of discrete representations.

For each binary attribute a logistic regression is trained on code-presence
features and scored by stratified k-fold cross-validation against a
majority-class baseline fitted on the same training folds.
"""
import logging
from typing import Dict, List, Optional, Tuple

import numpy as np
from joblib import Parallel, delayed
from pydantic import BaseModel, Field
from scipy.special import expit
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.dummy import DummyClassifier
from sklearn.metrics import accuracy_score
from sklearn.model_selection import StratifiedKFold

from core.config import worker_count
from core.errors import DimensionMismatchError, PreconditionError
from core.rng import Rng
from features.presence import PresenceMatrix

logger = logging.getLogger("pivq.probing")


class ProbeHyperparams(BaseModel):
    """Full-batch gradient descent settings for the logistic probe."""

    l2: float = Field(default=1e-2, ge=0.0)
    learning_rate: float = Field(default=0.5, gt=0.0)
    epochs: int = Field(default=1000, ge=0)


class AttributeScore(BaseModel):
    cv_accuracy_mean: float
    cv_accuracy_std: float
    baseline_accuracy: float
    fold_accuracies: List[float]
    baseline_fold_accuracies: List[float]
    degenerate: bool = False


class ProbeReport(BaseModel):
    folds: int
    samples: int
    attributes: Dict[str, AttributeScore] = Field(default_factory=dict)


class LogisticProbe(BaseEstimator, ClassifierMixin):
    """
    L2-regularized binary logistic regression trained by full-batch gradient descent.

    Minimizes mean log-loss + l2/2 * ||w||^2 (the intercept is not penalized),
    starting from zero weights. Training is deterministic given the data order.

    When the labels contain a single class the probe becomes a constant
    predictor for that class and sets degenerate_ = True.
    """

    def __init__(self, l2: float = 1e-2, learning_rate: float = 0.5, epochs: int = 1000):
        self.l2 = l2
        self.learning_rate = learning_rate
        self.epochs = epochs

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y).astype(np.int64).ravel()
        if X.ndim != 2 or X.shape[0] != y.shape[0]:
            raise DimensionMismatchError(f"features {X.shape} and labels {y.shape} disagree")
        if X.shape[0] < 1:
            raise PreconditionError("cannot fit a probe on zero samples")
        self.classes_ = np.unique(y)
        self.coef_ = np.zeros(X.shape[1])
        self.degenerate_ = self.classes_.size < 2
        if self.degenerate_:
            logger.warning("Single-class labels (%d); using a constant predictor", int(self.classes_[0]))
            self.intercept_ = 0.0
            return self

        target = (y == self.classes_[1]).astype(np.float64)
        n = X.shape[0]
        w = np.zeros(X.shape[1])
        b = 0.0
        for _ in range(self.epochs):
            error = expit(X @ w + b) - target
            w -= self.learning_rate * (X.T @ error / n + self.l2 * w)
            b -= self.learning_rate * float(error.mean())
        self.coef_ = w
        self.intercept_ = b
        return self

    def decision_function(self, X) -> np.ndarray:
        return np.asarray(X, dtype=np.float64) @ self.coef_ + self.intercept_

    def predict_proba(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if self.degenerate_:
            return np.ones((X.shape[0], 1))
        p = expit(self.decision_function(X))
        return np.column_stack([1.0 - p, p])

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if self.degenerate_:
            return np.full(X.shape[0], self.classes_[0])
        return np.where(self.decision_function(X) >= 0.0, self.classes_[1], self.classes_[0])


def fit_logistic(X, y, hyper: Optional[ProbeHyperparams] = None) -> LogisticProbe:
    """Fit one probe; see LogisticProbe for the objective."""
    hyper = hyper or ProbeHyperparams()
    return LogisticProbe(l2=hyper.l2, learning_rate=hyper.learning_rate, epochs=hyper.epochs).fit(X, y)


def cross_validate(
    X,
    y,
    folds: int,
    rng: Rng,
    hyper: Optional[ProbeHyperparams] = None,
) -> AttributeScore:
    """
    Stratified k-fold accuracy of the probe and of the majority-class baseline.

    Raises:
        PreconditionError: folds < 2 or fewer samples than folds
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y).astype(np.int64).ravel()
    if folds < 2:
        raise PreconditionError(f"need at least 2 folds, got {folds}")
    if y.shape[0] < folds:
        raise PreconditionError(f"need at least {folds} samples for {folds}-fold cross-validation, got {y.shape[0]}")

    splitter = StratifiedKFold(n_splits=folds, shuffle=True, random_state=rng.library_seed())
    accuracies, baselines = [], []
    degenerate = False
    for train, test in splitter.split(X, y):
        probe = fit_logistic(X[train], y[train], hyper)
        degenerate = degenerate or probe.degenerate_
        accuracies.append(float(accuracy_score(y[test], probe.predict(X[test]))))
        baseline = DummyClassifier(strategy="most_frequent").fit(X[train], y[train])
        baselines.append(float(accuracy_score(y[test], baseline.predict(X[test]))))

    return AttributeScore(
        cv_accuracy_mean=float(np.mean(accuracies)),
        cv_accuracy_std=float(np.std(accuracies)),
        baseline_accuracy=float(np.mean(baselines)),
        fold_accuracies=accuracies,
        baseline_fold_accuracies=baselines,
        degenerate=degenerate or np.unique(y).size < 2,
    )


def probe_attributes(
    presence: PresenceMatrix,
    folds: int,
    rng: Rng,
    hyper: Optional[ProbeHyperparams] = None,
) -> ProbeReport:
    """
    Probe every attribute column of `presence.labels`.

    Each attribute gets its own child Rng, so results do not depend on the
    worker count or on scheduling order.
    """
    attributes = presence.attributes
    children = rng.spawn(len(attributes))
    X = presence.values
    n_jobs = min(worker_count(), max(1, len(attributes)))
    logger.info("Probing %d attributes over %d samples (%d folds)", len(attributes), len(presence), folds)
    scores = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(cross_validate)(X, presence.labels[name].to_numpy(), folds, child, hyper)
        for name, child in zip(attributes, children)
    )
    return ProbeReport(folds=folds, samples=len(presence), attributes=dict(zip(attributes, scores)))


def rank_attributes(report: ProbeReport, top: int = 15) -> List[Tuple[str, float]]:
    """Attributes ordered by accuracy margin over the baseline, largest first."""
    margins = [
        (name, score.cv_accuracy_mean - score.baseline_accuracy) for name, score in report.attributes.items()
    ]
    margins.sort(key=lambda item: (-item[1], item[0]))
    return margins[:top]
