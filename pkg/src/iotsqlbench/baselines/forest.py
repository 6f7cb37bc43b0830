"""Decision tree and bagged random forest, built on numpy.

Trees split on gini impurity with exact threshold search over sorted
feature values.  The forest bootstraps rows per tree and subsamples
sqrt(d) candidate features per node; per-tree seeds derive from
(seed, tree index) so parallel and sequential training agree.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _child_seed(seed: int, index: int) -> int:
    digest = hashlib.sha256(f"{seed}/{index}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


class DecisionTree:
    def __init__(
        self,
        max_depth: int = 16,
        min_samples_split: int = 2,
        max_features: int | None = None,  # None = all features
        seed: int = 0,
    ):
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.max_features = max_features
        self.seed = seed
        # parallel node arrays; children are -1 at leaves
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.leaf_value: list[int] = []

    def fit(self, X: np.ndarray, y: np.ndarray) -> "DecisionTree":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        rng = np.random.default_rng(self.seed)
        self._grow(X, y, np.arange(len(y)), depth=0, rng=rng)
        return self

    def _new_node(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.leaf_value.append(0)
        return len(self.feature) - 1

    def _grow(self, X, y, idx, depth, rng) -> int:
        node = self._new_node()
        labels = y[idx]
        positives = int(labels.sum())
        majority = int(positives * 2 > len(labels))
        self.leaf_value[node] = majority
        if (
            depth >= self.max_depth
            or len(idx) < self.min_samples_split
            or positives == 0
            or positives == len(labels)
        ):
            return node
        split = self._best_split(X, y, idx, rng)
        if split is None:
            return node
        feat, thr = split
        mask = X[idx, feat] <= thr
        left_idx = idx[mask]
        right_idx = idx[~mask]
        if len(left_idx) == 0 or len(right_idx) == 0:
            return node
        self.feature[node] = feat
        self.threshold[node] = thr
        self.left[node] = self._grow(X, y, left_idx, depth + 1, rng)
        self.right[node] = self._grow(X, y, right_idx, depth + 1, rng)
        return node

    def _best_split(self, X, y, idx, rng):
        n_features = X.shape[1]
        if self.max_features is None or self.max_features >= n_features:
            candidates = np.arange(n_features)
        else:
            candidates = np.sort(rng.choice(n_features, size=self.max_features, replace=False))
        labels = y[idx].astype(np.float64)
        n = len(idx)
        total_pos = labels.sum()
        parent_gini = _gini(total_pos, n)
        best = None
        best_score = parent_gini - 1e-12  # require strict improvement
        for feat in candidates:
            values = X[idx, feat]
            order = np.argsort(values, kind="stable")
            v_sorted = values[order]
            y_sorted = labels[order]
            pos_prefix = np.cumsum(y_sorted)
            # split between distinct neighboring values
            boundaries = np.nonzero(v_sorted[1:] > v_sorted[:-1])[0]
            if len(boundaries) == 0:
                continue
            n_left = boundaries + 1
            pos_left = pos_prefix[boundaries]
            n_right = n - n_left
            pos_right = total_pos - pos_left
            gini_left = 1.0 - (pos_left / n_left) ** 2 - (1 - pos_left / n_left) ** 2
            gini_right = 1.0 - (pos_right / n_right) ** 2 - (1 - pos_right / n_right) ** 2
            weighted = (n_left * gini_left + n_right * gini_right) / n
            j = int(np.argmin(weighted))
            if weighted[j] < best_score:
                best_score = float(weighted[j])
                cut = boundaries[j]
                best = (int(feat), float((v_sorted[cut] + v_sorted[cut + 1]) / 2.0))
        return best

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        out = np.zeros(len(X), dtype=bool)
        for i, row in enumerate(X):
            node = 0
            while self.feature[node] >= 0:
                node = self.left[node] if row[self.feature[node]] <= self.threshold[node] else self.right[node]
            out[i] = bool(self.leaf_value[node])
        return out

    def state(self) -> dict:
        return {
            "max_depth": self.max_depth,
            "min_samples_split": self.min_samples_split,
            "max_features": self.max_features,
            "seed": self.seed,
            "feature": self.feature,
            "threshold": self.threshold,
            "left": self.left,
            "right": self.right,
            "leaf_value": self.leaf_value,
        }

    @classmethod
    def from_state(cls, state: dict) -> "DecisionTree":
        tree = cls(
            max_depth=state["max_depth"],
            min_samples_split=state["min_samples_split"],
            max_features=state["max_features"],
            seed=state["seed"],
        )
        tree.feature = list(state["feature"])
        tree.threshold = list(state["threshold"])
        tree.left = list(state["left"])
        tree.right = list(state["right"])
        tree.leaf_value = list(state["leaf_value"])
        return tree


def _gini(pos: float, n: int) -> float:
    if n == 0:
        return 0.0
    p = pos / n
    return 1.0 - p * p - (1.0 - p) * (1.0 - p)


class RandomForest:
    def __init__(
        self,
        n_trees: int = 100,
        max_depth: int = 16,
        min_samples_split: int = 2,
        max_features: str | int | None = "sqrt",
        bootstrap: bool = True,
        seed: int = 0,
    ):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.seed = seed
        self.trees: list[DecisionTree] = []

    def _resolve_max_features(self, n_features: int) -> int | None:
        if self.max_features == "sqrt":
            return max(1, int(np.sqrt(n_features)))
        return self.max_features

    def fit(self, X: np.ndarray, y: np.ndarray) -> "RandomForest":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        k = self._resolve_max_features(X.shape[1])
        self.trees = []
        for t in range(self.n_trees):
            tree_seed = _child_seed(self.seed, t)
            if self.bootstrap:
                rng = np.random.default_rng(_child_seed(self.seed, 10_000_019 + t))
                idx = rng.integers(0, len(y), size=len(y))
            else:
                idx = np.arange(len(y))
            tree = DecisionTree(
                max_depth=self.max_depth,
                min_samples_split=self.min_samples_split,
                max_features=k,
                seed=tree_seed,
            )
            tree.fit(X[idx], y[idx])
            self.trees.append(tree)
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        votes = np.zeros(len(X), dtype=np.int64)
        for tree in self.trees:
            votes += tree.predict(X)
        # strict majority; ties go benign
        return votes * 2 > len(self.trees)

    def state(self) -> dict:
        return {
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "min_samples_split": self.min_samples_split,
            "max_features": self.max_features,
            "bootstrap": self.bootstrap,
            "seed": self.seed,
            "trees": [t.state() for t in self.trees],
        }

    @classmethod
    def from_state(cls, state: dict) -> "RandomForest":
        forest = cls(
            n_trees=state["n_trees"],
            max_depth=state["max_depth"],
            min_samples_split=state["min_samples_split"],
            max_features=state["max_features"],
            bootstrap=state["bootstrap"],
            seed=state["seed"],
        )
        forest.trees = [DecisionTree.from_state(s) for s in state["trees"]]
        return forest
