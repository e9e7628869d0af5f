"""Pruned binary partition trees and their on-disk text form.

A node carries the index of a dyadic subdomain and an estimated count;
children, when present, always come in pairs and their counts sum to the
parent's.  Leaves either sit at the maximum depth or are nodes whose
children were pruned away.

The file format is line-oriented so trees are diffable: a header with
the shape parameters, then one `bits,count` record per node in preorder.
Counts use repr-quality formatting (17 significant digits), so a
save/load round trip reproduces every float exactly.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

from .domain import SubdomainIndex

_FORMAT_TAG = "privhp-tree v1"


class PartitionNode:
    __slots__ = ("index", "count", "left", "right")

    def __init__(self, index: SubdomainIndex, count: float):
        self.index = index
        self.count = count
        self.left: PartitionNode | None = None
        self.right: PartitionNode | None = None

    @property
    def level(self) -> int:
        return self.index.level

    def is_leaf(self) -> bool:
        return self.left is None

    def children(self):
        return (self.left, self.right) if self.left is not None else ()

    def __repr__(self):
        return f"PartitionNode({self.index.bits!r}, {self.count!r})"


@dataclass
class PartitionTree:
    """A decomposition rooted at the whole domain.

    `meta` echoes the build configuration (epsilon, k, ...) when known, so
    downstream reports can cite it; trees built by exact oracles carry
    only what applies.
    """

    root: PartitionNode
    dimension: int
    depth: int
    meta: dict = field(default_factory=dict)

    def nodes(self):
        """All nodes in preorder (parent before children, 0-child first)."""
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            if node.left is not None:
                stack.append(node.right)
                stack.append(node.left)

    def leaves(self) -> list[PartitionNode]:
        """Leaves in left-to-right order; their cells tile the domain."""
        out = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node.left is None:
                out.append(node)
            else:
                stack.append(node.right)
                stack.append(node.left)
        return out

    def node_count(self) -> int:
        return sum(1 for _ in self.nodes())

    def find(self, bits: str) -> PartitionNode | None:
        """Node with the given index bits, or None if pruned away."""
        node = self.root
        for b in bits:
            if node.left is None:
                return None
            node = node.left if b == "0" else node.right
        return node


_META_KEYS = ("epsilon", "k", "L_star", "j", "w_cells", "seed", "n_hint")
_META_INT = {"k", "L_star", "j", "w_cells", "seed", "n_hint"}


def dump_tree(tree: PartitionTree, fp: io.TextIOBase) -> None:
    fp.write(f"# {_FORMAT_TAG}\n")
    fp.write(f"# d={tree.dimension} depth={tree.depth}\n")
    parts = []
    for key in _META_KEYS:
        if tree.meta.get(key) is not None:
            value = tree.meta[key]
            parts.append(f"{key}={value:.17g}" if key == "epsilon" else f"{key}={value}")
    if parts:
        fp.write("# " + " ".join(parts) + "\n")
    for node in tree.nodes():
        fp.write(f"{node.index.bits},{node.count:.17g}\n")


def save_tree(tree: PartitionTree, path) -> None:
    with open(path, "w") as fp:
        dump_tree(tree, fp)


def _parse_meta(line: str, meta: dict) -> None:
    for token in line.split():
        if "=" not in token:
            continue
        key, _, raw = token.partition("=")
        if key in _META_KEYS or key in ("d", "depth"):
            meta[key] = int(raw) if key in _META_INT or key in ("d", "depth") else float(raw)


def load_tree(path) -> PartitionTree:
    """Rebuild a tree from its text form.

    Raises ValueError on files that are not preorder node listings with a
    valid header.
    """
    meta: dict = {}
    nodes: dict[str, PartitionNode] = {}
    root = None
    with open(path) as fp:
        first = fp.readline()
        if _FORMAT_TAG not in first:
            raise ValueError(f"not a partition tree file (missing '{_FORMAT_TAG}' header)")
        for lineno, line in enumerate(fp, start=2):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                _parse_meta(line[1:], meta)
                continue
            bits, _, raw = line.partition(",")
            try:
                count = float(raw)
            except ValueError:
                raise ValueError(f"line {lineno}: bad count {raw!r}") from None
            if bits and any(b not in "01" for b in bits):
                raise ValueError(f"line {lineno}: bad index bits {bits!r}")
            node = PartitionNode(SubdomainIndex(bits), count)
            nodes[bits] = node
            if not bits:
                if root is not None:
                    raise ValueError(f"line {lineno}: duplicate root record")
                root = node
            else:
                parent = nodes.get(bits[:-1])
                if parent is None:
                    raise ValueError(f"line {lineno}: node {bits!r} appears before its parent")
                if bits[-1] == "0":
                    parent.left = node
                else:
                    parent.right = node
    if root is None:
        raise ValueError("tree file contains no root record")
    dimension = meta.pop("d", None)
    depth = meta.pop("depth", None)
    if dimension is None or depth is None:
        raise ValueError("tree file header lacks d= and depth=")
    tree = PartitionTree(root=root, dimension=dimension, depth=depth, meta=meta)
    for node in tree.nodes():
        if (node.left is None) != (node.right is None):
            raise ValueError(f"node {node.index.bits!r} has exactly one child")
    return tree
