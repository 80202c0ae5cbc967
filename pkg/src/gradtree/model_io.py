"""Canonical JSON serialization of fitted trees.

One format for every learner in the package: a flat preorder node
array with children referenced by index (root at index 0), plus the
learner name, task, config snapshot, and metadata. Keys are sorted and
floats use Python's shortest round-trip repr, so saving the same model
twice produces byte-identical files and loading loses nothing.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import ModelFormatError
from .tree import Node, Tree

FORMAT_VERSION = 1

_NODE_KEYS = {"value", "depth", "n_samples", "feature", "threshold", "left", "right"}


def _flatten(tree: Tree) -> list:
    nodes = []

    def visit(node: Node) -> int:
        idx = len(nodes)
        rec = {
            "value": [float(v) for v in np.asarray(node.value).ravel()],
            "depth": node.depth,
            "n_samples": node.n_samples,
            "feature": None if node.feature is None else int(node.feature),
            "threshold": None if node.threshold is None else float(node.threshold),
            "left": None,
            "right": None,
        }
        if node.distribution is not None:
            rec["distribution"] = [float(v) for v in node.distribution]
        nodes.append(rec)
        if not node.is_leaf:
            rec["left"] = visit(node.left)
            rec["right"] = visit(node.right)
        return idx

    visit(tree.root)
    return nodes


def model_to_dict(tree: Tree) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "learner": tree.learner,
        "task": tree.task,
        "n_features": tree.n_features,
        "output_dim": tree.output_dim,
        "config": tree.config,
        "meta": tree.meta,
        "nodes": _flatten(tree),
    }


def save_model(tree: Tree, path) -> None:
    payload = json.dumps(model_to_dict(tree), sort_keys=True, indent=2)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(payload)
        fh.write("\n")


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ModelFormatError(msg)


def model_from_dict(doc: dict) -> Tree:
    _require(isinstance(doc, dict), "model document must be a JSON object")
    _require("format_version" in doc, "missing key 'format_version'")
    version = doc["format_version"]
    _require(
        version == FORMAT_VERSION,
        f"unsupported format_version {version!r}, this build reads {FORMAT_VERSION}",
    )
    for key in ("learner", "task", "n_features", "output_dim", "nodes"):
        _require(key in doc, f"missing key {key!r}")
    raw_nodes = doc["nodes"]
    _require(isinstance(raw_nodes, list) and raw_nodes, "'nodes' must be a non-empty array")

    nodes = []
    for i, rec in enumerate(raw_nodes):
        _require(isinstance(rec, dict), f"node {i} is not an object")
        missing = _NODE_KEYS - set(rec)
        _require(not missing, f"node {i} is missing {sorted(missing)}")
        node = Node(
            value=np.asarray(rec["value"], dtype=float),
            depth=int(rec["depth"]),
            n_samples=int(rec["n_samples"]),
            feature=None if rec["feature"] is None else int(rec["feature"]),
            threshold=None if rec["threshold"] is None else float(rec["threshold"]),
        )
        if rec.get("distribution") is not None:
            node.distribution = np.asarray(rec["distribution"], dtype=float)
        nodes.append(node)

    seen = set()
    for i, rec in enumerate(raw_nodes):
        left, right = rec["left"], rec["right"]
        _require(
            (left is None) == (right is None),
            f"node {i} must have both children or neither",
        )
        if left is None:
            _require(
                rec["feature"] is None and rec["threshold"] is None,
                f"leaf node {i} carries a split",
            )
            continue
        _require(
            rec["feature"] is not None and rec["threshold"] is not None,
            f"internal node {i} lacks feature/threshold",
        )
        for child in (left, right):
            _require(
                isinstance(child, int) and 0 < child < len(raw_nodes),
                f"node {i} has child index {child!r} out of range",
            )
            _require(child not in seen, f"node {child} has two parents")
            seen.add(child)
        nodes[i].left = nodes[left]
        nodes[i].right = nodes[right]
    _require(0 not in seen, "root node 0 may not be a child")
    _require(len(seen) == len(raw_nodes) - 1, "unreachable nodes in 'nodes' array")

    return Tree(
        root=nodes[0],
        n_features=int(doc["n_features"]),
        output_dim=int(doc["output_dim"]),
        learner=str(doc["learner"]),
        task=str(doc["task"]),
        config=doc.get("config", {}),
        meta=doc.get("meta", {}),
    )


def load_model(path) -> Tree:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: not valid JSON ({exc})") from None
    return model_from_dict(doc)
