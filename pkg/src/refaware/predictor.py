"""Logistic-regression defect predictor and the evaluation measures:
precision/recall/F1/AUC plus effort-aware Recall@20%Effort,
Effort@20%Recall and P_opt."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np
from scipy.stats import rankdata

from .errors import NonFiniteFeature, SingleClassTraining, ZeroTotalChurn


@dataclass
class TrainConfig:
    l2: float = 0.01
    learning_rate: float = 0.1
    iterations: int = 2000
    tolerance: float = 1e-6
    balanced: bool = False  # reweight classes to equal total weight


@dataclass
class Model:
    weights: np.ndarray
    bias: float
    means: np.ndarray
    stds: np.ndarray
    feature_names: list[str] = field(default_factory=list)
    iterations_run: int = 0

    def to_dict(self) -> dict:
        return {
            "weights": self.weights.tolist(),
            "bias": self.bias,
            "means": self.means.tolist(),
            "stds": self.stds.tolist(),
            "feature_names": list(self.feature_names),
            "iterations_run": self.iterations_run,
        }

    @classmethod
    def from_dict(cls, d) -> "Model":
        return cls(
            np.asarray(d["weights"], float), float(d["bias"]), np.asarray(d["means"], float),
            np.asarray(d["stds"], float), list(d.get("feature_names", [])), int(d.get("iterations_run", 0)),
        )


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def loss_and_grad(params, Z, y, l2, sample_weight=None):
    """L2-regularized mean log loss and its gradient.

    ``params`` is the weight vector followed by the bias; the bias is not
    regularized.
    """
    Z = np.asarray(Z, float)
    y = np.asarray(y, float)
    n = len(y)
    sw = np.ones(n) if sample_weight is None else np.asarray(sample_weight, float)
    w, b = params[:-1], params[-1]
    z = Z @ w + b
    # log(1 + e^z) - y z, computed stably
    per = np.logaddexp(0.0, z) - y * z
    total = sw.sum()
    loss = float(sw @ per / total + 0.5 * l2 * w @ w)
    r = sw * (_sigmoid(z) - y) / total
    grad = np.empty_like(params, dtype=float)
    grad[:-1] = Z.T @ r + l2 * w
    grad[-1] = r.sum()
    return loss, grad


def _check_finite(X):
    if not np.all(np.isfinite(X)):
        raise NonFiniteFeature("feature matrix contains NaN or infinity")


def train(X, y, config: TrainConfig | None = None, feature_names=None) -> Model:
    """Standardize, then minimize the regularized log loss by gradient descent."""
    config = config or TrainConfig()
    X = np.asarray(X, float)
    y = np.asarray(y, float)
    if X.ndim != 2 or len(X) != len(y):
        raise ValueError("X must be 2-D with one row per label")
    _check_finite(X)
    if len(y) < 2 or len(set(y.tolist())) < 2:
        raise SingleClassTraining("training labels need both classes")
    means = X.mean(axis=0)
    stds = X.std(axis=0)
    constant = stds == 0
    stds = np.where(constant, 1.0, stds)
    Z = (X - means) / stds
    Z[:, constant] = 0.0

    sw = None
    if config.balanced:
        pos = y.sum()
        sw = np.where(y == 1, 0.5 / pos, 0.5 / (len(y) - pos)) * len(y)
    base = float(np.average(y, weights=sw))
    params = np.zeros(X.shape[1] + 1)
    params[-1] = math.log(base / (1 - base))  # optimum when no feature helps
    it = 0
    for it in range(1, config.iterations + 1):
        _, grad = loss_and_grad(params, Z, y, config.l2, sw)
        grad[:-1][constant] = 0.0
        if np.max(np.abs(grad)) < config.tolerance:
            break
        params -= config.learning_rate * grad
    return Model(params[:-1].copy(), float(params[-1]), means, stds, list(feature_names or []), it)


def predict_proba(model: Model, X) -> np.ndarray:
    X = np.asarray(X, float)
    _check_finite(X)
    Z = (X - model.means) / model.stds
    return _sigmoid(Z @ model.weights + model.bias)


# -- evaluation ---------------------------------------------------------------


def auc(scores, y) -> float:
    """Rank-statistic AUC with average ranks for ties; 0.5 for one class."""
    scores = np.asarray(scores, float)
    y = np.asarray(y).astype(bool)
    n1 = int(y.sum())
    n0 = len(y) - n1
    if n1 == 0 or n0 == 0:
        return 0.5
    ranks = rankdata(scores)
    return float((ranks[y].sum() - n1 * (n1 + 1) / 2) / (n1 * n0))


def classification_metrics(scores, y, threshold: float = 0.5) -> dict[str, float]:
    scores = np.asarray(scores, float)
    y = np.asarray(y).astype(bool)
    if len(scores) == 0 or len(scores) != len(y):
        raise ValueError("scores and labels must be non-empty and of equal length")
    pred = scores >= threshold
    tp = int(np.sum(pred & y))
    fp = int(np.sum(pred & ~y))
    fn = int(np.sum(~pred & y))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return {"precision": precision, "recall": recall, "f1": f1, "auc": auc(scores, y)}


def _ranking(density):
    """Indices by density descending; ties keep input order."""
    return sorted(range(len(density)), key=lambda i: (-density[i], i))


def _area(order, churn, weight, total_churn, total_weight) -> Fraction:
    """Trapezoidal area under the cumulative (effort, found) curve."""
    area = Fraction(0)
    found = Fraction(0)
    for i in order:
        x = churn[i] / total_churn
        step = weight[i] / total_weight
        area += x * (found + step / 2)
        found += step
    return area


def effort_metrics(scores, y, churn, *, effort: float = 0.2, recall: float = 0.2, unit: str = "commit", weights=None) -> dict[str, float]:
    """Effort-aware measures over commits ranked by score/(churn+1).

    ``unit="commit"`` counts buggy commits; ``unit="line"`` weights each buggy
    commit by ``weights`` (default: its churn).
    """
    n = len(scores)
    if not (n == len(y) == len(churn)):
        raise ValueError("scores, labels and churn must have equal length")
    churn_q = [Fraction(c) for c in churn]
    if any(c < 0 for c in churn_q):
        raise ValueError("churn must be non-negative")
    total_churn = sum(churn_q, Fraction(0))
    if total_churn == 0:
        raise ZeroTotalChurn("total churn is zero")
    labels = [1 if v else 0 for v in y]
    if unit == "commit":
        weight = [Fraction(v) for v in labels]
    elif unit == "line":
        base = churn if weights is None else weights
        weight = [Fraction(b) * v for b, v in zip(base, labels)]
    else:
        raise ValueError(f"unknown effort unit {unit!r}")
    total_weight = sum(weight, Fraction(0))

    order = _ranking([float(s) / (float(c) + 1) for s, c in zip(scores, churn)])
    if total_weight == 0:
        return {"recall_at_20_effort": 0.0, "effort_at_20_recall": 0.0, "p_opt": 1.0}

    effort_q = Fraction(effort).limit_denominator(10**9)
    recall_q = Fraction(recall).limit_denominator(10**9)
    if unit == "commit":
        needed = Fraction(math.ceil(recall_q * total_weight))
    else:
        needed = recall_q * total_weight

    cum_churn, cum_weight = Fraction(0), Fraction(0)
    r_at_effort = e_at_recall = None
    for i in order:
        cum_churn += churn_q[i]
        cum_weight += weight[i]
        if r_at_effort is None and cum_churn >= effort_q * total_churn:
            r_at_effort = cum_weight / total_weight
        if e_at_recall is None and cum_weight >= needed:
            e_at_recall = cum_churn / total_churn
    true_density = [float(w) / (float(c) + 1) for w, c in zip(weight, churn)]
    optimal = _ranking(true_density)
    worst = sorted(range(n), key=lambda i: (true_density[i], i))
    a_m = _area(order, churn_q, weight, total_churn, total_weight)
    a_opt = _area(optimal, churn_q, weight, total_churn, total_weight)
    a_worst = _area(worst, churn_q, weight, total_churn, total_weight)
    if a_opt == a_worst:
        p_opt = 1.0
    else:
        p_opt = float(min(max(1 - (a_opt - a_m) / (a_opt - a_worst), 0), 1))
    return {
        "recall_at_20_effort": float(r_at_effort),
        "effort_at_20_recall": float(e_at_recall),
        "p_opt": p_opt,
    }


REPORT_FIELDS = ("precision", "recall", "f1", "auc", "recall_at_20_effort", "effort_at_20_recall", "p_opt")


@dataclass
class EvalReport:
    precision: float
    recall: float
    f1: float
    auc: float
    recall_at_20_effort: float
    effort_at_20_recall: float
    p_opt: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=False) + "\n"

    def to_table(self) -> str:
        width = max(len(f) for f in REPORT_FIELDS)
        return "".join(f"{name:<{width}}  {getattr(self, name):.4f}\n" for name in REPORT_FIELDS)


def evaluate(scores, y, churn, threshold=0.5, unit="commit", weights=None) -> EvalReport:
    values = classification_metrics(scores, y, threshold)
    values.update(effort_metrics(scores, y, churn, unit=unit, weights=weights))
    return EvalReport(**{k: float(values[k]) for k in REPORT_FIELDS})


def alberg_curves(scores, y, churn) -> dict[str, tuple[list[float], list[float]]]:
    """Cumulative (effort, buggy) points of the model, optimal and worst rankings."""
    total_churn = float(sum(churn))
    if total_churn == 0:
        raise ZeroTotalChurn("total churn is zero")
    labels = [1 if v else 0 for v in y]
    total = sum(labels) or 1
    true_density = [v / (c + 1) for v, c in zip(labels, churn)]
    orders = {
        "model": _ranking([float(s) / (c + 1) for s, c in zip(scores, churn)]),
        "optimal": _ranking(true_density),
        "worst": sorted(range(len(labels)), key=lambda i: (true_density[i], i)),
    }
    curves = {}
    for name, order in orders.items():
        xs, ys = [0.0], [0.0]
        for i in order:
            xs.append(xs[-1] + churn[i] / total_churn)
            ys.append(ys[-1] + labels[i] / total)
        curves[name] = (xs, ys)
    return curves
