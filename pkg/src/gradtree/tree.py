"""Binary decision tree container shared by every learner in the package.

A tree predicts a q-dimensional value per sample. Routing is always
``x[feature] <= threshold`` to the left child. What the value means
(regression output, class frequencies, logits over time intervals)
depends on the learner that grew the tree and is recorded in ``meta``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np


@dataclass
class Node:
    value: np.ndarray
    depth: int
    n_samples: int
    feature: Optional[int] = None
    threshold: Optional[float] = None
    left: Optional["Node"] = None
    right: Optional["Node"] = None
    # survival trees with Kaplan-Meier leaves keep the per-interval
    # probability vector alongside the logits the tree was grown with
    distribution: Optional[np.ndarray] = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None


@dataclass
class Tree:
    root: Node
    n_features: int
    output_dim: int
    learner: str
    task: str
    config: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def _validate_matrix(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2:
            raise ValueError("X must be a 2-d array")
        if X.shape[1] != self.n_features:
            raise ValueError(
                f"X has {X.shape[1]} features, tree was grown on {self.n_features}"
            )
        return X

    def leaf_for(self, x: np.ndarray) -> Node:
        node = self.root
        while not node.is_leaf:
            node = node.left if x[node.feature] <= node.threshold else node.right
        return node

    def predict(self, X) -> np.ndarray:
        """Predict an (n_samples, output_dim) value matrix."""
        X = self._validate_matrix(X)
        out = np.empty((X.shape[0], self.output_dim), dtype=float)
        for i in range(X.shape[0]):
            out[i] = self.leaf_for(X[i]).value
        return out

    def apply(self, X) -> np.ndarray:
        """Index (in preorder numbering) of the leaf each row lands in."""
        X = self._validate_matrix(X)
        index = {id(n): i for i, n in enumerate(self.iter_nodes())}
        return np.array([index[id(self.leaf_for(X[i]))] for i in range(X.shape[0])])

    def iter_nodes(self) -> Iterator[Node]:
        """Preorder traversal (root first, left subtree before right)."""
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            if not node.is_leaf:
                stack.append(node.right)
                stack.append(node.left)

    def leaves(self) -> list:
        return [n for n in self.iter_nodes() if n.is_leaf]

    @property
    def n_nodes(self) -> int:
        return sum(1 for _ in self.iter_nodes())

    @property
    def depth(self) -> int:
        return max(n.depth for n in self.iter_nodes())
