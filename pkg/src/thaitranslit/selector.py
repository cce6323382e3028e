"""Random forest of CART trees for training-example selection.

Trees split on the weighted Gini criterion at midpoints between consecutive
distinct feature values, evaluating a random subset of ``ceil(sqrt(p))``
features per node. Ties go to the lowest feature index, then the lowest
threshold. Each tree draws its bootstrap sample and feature subsets from its
own generator, seeded from ``(config.seed, tree_index)``, so trees can be
fitted in any order or in parallel with identical results.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .core_data import FEATURE_ORDER
from .kernels import best_split
from .metrics import MetricError, ThresholdMetrics, binary_metrics, roc_auc

FOREST_FORMAT_VERSION = 1
DEFAULT_THRESHOLDS = (0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99)


class SelectorError(ValueError):
    pass


@dataclass(frozen=True)
class ForestConfig:
    n_estimators: int = 500
    min_samples_split: int = 2
    min_samples_leaf: int = 4
    max_depth: int = 10
    max_features: str | int = "sqrt"
    bootstrap: bool = True
    seed: int = 42

    def __post_init__(self):
        if self.n_estimators < 1 or self.min_samples_leaf < 1 or self.max_depth < 1:
            raise SelectorError("n_estimators, min_samples_leaf and max_depth must be >= 1")
        if self.min_samples_split < 2:
            raise SelectorError("min_samples_split must be >= 2")

    def n_split_features(self, n_features: int) -> int:
        if self.max_features == "sqrt":
            return max(1, math.ceil(math.sqrt(n_features)))
        if self.max_features in ("all", None):
            return n_features
        return max(1, min(int(self.max_features), n_features))


@dataclass
class DecisionTree:
    """Flat node arrays; ``feature[i] == -1`` marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray  # weighted positive fraction at the node
    n_samples: np.ndarray
    importances: np.ndarray = field(repr=False)

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def depth(self) -> int:
        best, stack = 0, [(0, 0)]
        while stack:
            node, d = stack.pop()
            best = max(best, d)
            if self.feature[node] >= 0:
                stack += [(self.left[node], d + 1), (self.right[node], d + 1)]
        return best

    def leaves(self) -> np.ndarray:
        return np.flatnonzero(self.feature < 0)

    def apply(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(X)
        node = np.zeros(len(X), dtype=np.int64)
        active = self.feature[node] >= 0
        while active.any():
            rows = np.flatnonzero(active)
            cur = node[rows]
            go_left = X[rows, self.feature[cur]] <= self.threshold[cur]
            node[rows] = np.where(go_left, self.left[cur], self.right[cur])
            active = self.feature[node] >= 0
        return node

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "n_samples": self.n_samples.tolist(),
            "importances": self.importances.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DecisionTree":
        return cls(
            feature=np.asarray(d["feature"], dtype=np.int64),
            threshold=np.asarray(d["threshold"], dtype=np.float64),
            left=np.asarray(d["left"], dtype=np.int64),
            right=np.asarray(d["right"], dtype=np.int64),
            value=np.asarray(d["value"], dtype=np.float64),
            n_samples=np.asarray(d["n_samples"], dtype=np.int64),
            importances=np.asarray(d["importances"], dtype=np.float64),
        )


def _validate(X, y, weights=None):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or len(X) == 0:
        raise SelectorError("need a non-empty 2-D feature matrix")
    if len(y) != len(X):
        raise SelectorError(f"{len(X)} rows but {len(y)} labels")
    if not np.isin(y, (0.0, 1.0)).all():
        raise SelectorError("labels must be 0/1")
    w = np.ones(len(X)) if weights is None else np.asarray(weights, dtype=np.float64)
    if len(w) != len(X) or (w < 0).any():
        raise SelectorError("sample weights must be non-negative, one per row")
    return X, y, w


def tree_rng(seed: int, tree_index: int) -> np.random.Generator:
    return np.random.default_rng([seed, tree_index])


def fit_tree(X, y, weights=None, config: ForestConfig | None = None,
             rng: np.random.Generator | None = None) -> DecisionTree:
    """Grow one CART tree (depth-first, nodes stored in pre-order)."""
    config = config or ForestConfig()
    X, y, w = _validate(X, y, weights)
    rng = rng if rng is not None else tree_rng(config.seed, 0)
    n, p = X.shape
    k = config.n_split_features(p)
    total_w = w.sum()

    feature, threshold, left, right, value, counts = [], [], [], [], [], []
    importances = np.zeros(p)

    def new_node(idx):
        wn = w[idx].sum()
        pos = (w[idx] * y[idx]).sum()
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(pos / wn if wn > 0 else 0.0)
        counts.append(len(idx))
        return len(feature) - 1, wn, pos

    root, _, _ = new_node(np.arange(n))
    stack = [(root, np.arange(n), 0)]
    while stack:
        node, idx, depth = stack.pop()
        wn = w[idx].sum()
        pos = (w[idx] * y[idx]).sum()
        if (depth >= config.max_depth or len(idx) < config.min_samples_split
                or len(idx) < 2 * config.min_samples_leaf or pos <= 0 or pos >= wn):
            continue
        feats = np.sort(rng.choice(p, size=k, replace=False)) if k < p else np.arange(p)
        f, thr, score = best_split(X, y, w, idx, feats, config.min_samples_leaf)
        if f < 0:
            continue
        go_left = X[idx, f] <= thr
        l_idx, r_idx = idx[go_left], idx[~go_left]
        parent_impurity = wn - (pos * pos + (wn - pos) ** 2) / wn
        importances[f] += (parent_impurity - score) / total_w
        feature[node] = int(f)
        threshold[node] = float(thr)
        l_node, _, _ = new_node(l_idx)
        r_node, _, _ = new_node(r_idx)
        left[node], right[node] = l_node, r_node
        # right pushed first so the left subtree is expanded first
        stack.append((r_node, r_idx, depth + 1))
        stack.append((l_node, l_idx, depth + 1))

    return DecisionTree(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        value=np.array(value, dtype=np.float64),
        n_samples=np.array(counts, dtype=np.int64),
        importances=importances,
    )


@dataclass
class Forest:
    trees: list
    config: ForestConfig
    n_features: int
    feature_names: tuple = FEATURE_ORDER

    @property
    def feature_importances(self) -> np.ndarray:
        total = np.sum([t.importances for t in self.trees], axis=0)
        s = total.sum()
        return total / s if s > 0 else total

    def predict_proba(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.n_features:
            raise SelectorError(f"expected {self.n_features} features, got {X.shape[1]}")
        return np.mean([t.predict(X) for t in self.trees], axis=0)

    def to_json(self) -> str:
        doc = {
            "format": "thaitranslit-forest",
            "version": FOREST_FORMAT_VERSION,
            "config": asdict(self.config),
            "n_features": self.n_features,
            "feature_names": list(self.feature_names),
            "feature_importances": self.feature_importances.tolist(),
            "trees": [t.to_dict() for t in self.trees],
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Forest":
        doc = json.loads(text)
        if doc.get("format") != "thaitranslit-forest" or doc.get("version") != FOREST_FORMAT_VERSION:
            raise SelectorError(f"unsupported forest document (version {doc.get('version')!r})")
        return cls(
            trees=[DecisionTree.from_dict(t) for t in doc["trees"]],
            config=ForestConfig(**doc["config"]),
            n_features=doc["n_features"],
            feature_names=tuple(doc["feature_names"]),
        )


def fit_forest(X, y, weights=None, config: ForestConfig | None = None, threads: int = 1) -> Forest:
    config = config or ForestConfig()
    X, y, w = _validate(X, y, weights)
    n = len(X)
    # canonical row order: the fitted forest depends only on the multiset of rows
    order = np.lexsort(np.column_stack([X, y, w]).T[::-1])
    X, y, w = X[order], y[order], w[order]

    def build(i):
        rng = tree_rng(config.seed, i)
        if config.bootstrap:
            rows = rng.integers(0, n, size=n)
            return fit_tree(X[rows], y[rows], w[rows], config, rng)
        return fit_tree(X, y, w, config, rng)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            trees = list(pool.map(build, range(config.n_estimators)))
    else:
        trees = [build(i) for i in range(config.n_estimators)]
    names = FEATURE_ORDER if X.shape[1] == len(FEATURE_ORDER) else tuple(f"f{i}" for i in range(X.shape[1]))
    return Forest(trees, config, X.shape[1], names)


def predict_proba(forest: Forest, x) -> float:
    """Mean leaf positive fraction over the trees, for one feature vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise SelectorError("predict_proba takes a single feature vector")
    return float(forest.predict_proba(x[None, :])[0])


def threshold_sweep(forest: Forest, X_eval, y_eval,
                    thresholds: Sequence[float] = DEFAULT_THRESHOLDS) -> list[ThresholdMetrics]:
    scores = forest.predict_proba(X_eval)
    try:
        auc = roc_auc(scores, y_eval)
    except MetricError as exc:
        raise SelectorError(str(exc)) from None
    return [binary_metrics(scores, y_eval, t, auc=auc) for t in thresholds]


@dataclass
class CVResult:
    folds: list  # per fold: list of ThresholdMetrics, one per threshold
    mean: list
    std: list

    def to_dict(self) -> dict:
        return {
            "folds": [[m.to_dict() for m in fold] for fold in self.folds],
            "mean": [m.to_dict() for m in self.mean],
            "std": [m.to_dict() for m in self.std],
        }


def kfold_cv(X, y, k: int = 5, config: ForestConfig | None = None,
             thresholds: Sequence[float] = (0.5,)) -> CVResult:
    """Seeded k-fold CV; AUC is NaN on folds holding a single class."""
    config = config or ForestConfig()
    X, y, _ = _validate(X, y)
    n = len(X)
    if k < 2 or k > n:
        raise SelectorError(f"need 2 <= k <= N, got k={k}, N={n}")
    perm = np.random.default_rng([config.seed, 0xF01D]).permutation(n)
    folds = np.array_split(perm, k)
    results = []
    for held in folds:
        train = np.setdiff1d(perm, held)
        forest = fit_forest(X[train], y[train], config=config)
        scores = forest.predict_proba(X[held])
        try:
            auc = roc_auc(scores, y[held])
        except MetricError:
            auc = float("nan")
        results.append([binary_metrics(scores, y[held], t, auc=auc) for t in thresholds])

    names = ("precision", "recall", "f1", "accuracy", "auc")
    mean, std = [], []
    for ti, t in enumerate(thresholds):
        table = np.array([[getattr(fold[ti], m) for m in names] for fold in results])
        with np.errstate(invalid="ignore"), _quiet_nan():
            mu = np.nanmean(table, axis=0)
            sd = np.nanstd(table, axis=0, ddof=1) if k > 1 else np.zeros(len(names))
        mean.append(ThresholdMetrics(t, *map(float, mu)))
        std.append(ThresholdMetrics(t, *map(float, sd)))
    return CVResult(results, mean, std)


class _quiet_nan:
    def __enter__(self):
        import warnings
        self._ctx = warnings.catch_warnings()
        self._ctx.__enter__()
        warnings.simplefilter("ignore", RuntimeWarning)

    def __exit__(self, *exc):
        return self._ctx.__exit__(*exc)
