"""Reachability trees with RMT weights, and the tree-based decision.

This is the slow structural counterpart of :mod:`ncca.decide`: nodes are kept
individually, so the two procedures share only the weight recurrence.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .ca import ResourceLimitError, as_rule_vector, successors
from .decide import (
    LAST_KEEP,
    PENULTIMATE_KEEP,
    Accepted,
    NonzeroLeafWeight,
    Verdict,
    WeightConflict,
    weight_delta,
)

MAX_UNPRUNED = 16
MAX_PRUNED = 64

Sets = tuple[frozenset[int], frozenset[int], frozenset[int], frozenset[int]]


@dataclass
class TreeNode:
    level: int
    index: int
    weights: tuple[dict[int, int], ...]
    # True when a same-level node contains this one; its subtree is not built.
    pruned: bool = False

    @property
    def gamma(self) -> Sets:
        return tuple(frozenset(w) for w in self.weights)

    @property
    def masks(self) -> tuple[int, ...]:
        return tuple(sum(1 << r for r in w) for w in self.weights)

    def is_empty(self) -> bool:
        return not any(self.weights)


@dataclass
class TreeEdge:
    level: int
    index: int  # index of the child slot at level + 1
    parity: int
    label: Sets

    @property
    def reachable(self) -> bool:
        return any(self.label)


@dataclass
class Violation:
    level: int
    node: int
    k: int
    rmt: int
    weights: tuple[int, int]
    other_node: Optional[int] = None


@dataclass
class ReachabilityTree:
    rules: tuple[int, ...]
    pruned: bool
    levels: list[list[TreeNode]] = field(default_factory=list)
    edges: list[TreeEdge] = field(default_factory=list)
    violations: list[Violation] = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.rules)

    def node(self, level: int, index: int) -> Optional[TreeNode]:
        for node in self.levels[level]:
            if node.index == index:
                return node
        return None

    def edge(self, level: int, index: int) -> Optional[TreeEdge]:
        for e in self.edges:
            if e.level == level and e.index == index:
                return e
        return None

    @property
    def leaves(self) -> list[TreeNode]:
        return self.levels[-1]

    def path_weights(self, rmts: Sequence[int]) -> list[int]:
        """Weights met along an RMT sequence, following its edges from the root.

        The last entry is the weight the sequence leaves at its leaf.
        """
        if len(rmts) != self.n:
            raise ValueError("RMT sequence length must equal n")
        k = rmts[0] // 2
        node = self.levels[0][0]
        out = []
        for i, r in enumerate(rmts):
            if node is None or r not in node.weights[k]:
                raise KeyError(f"RMT {r} not found in set {k} at level {i}")
            w = node.weights[k][r]
            out.append(w)
            bit = (self.rules[i] >> r) & 1
            node = self.node(i + 1, 2 * node.index + bit)
        # The sequence wraps: the leaf holds its first RMT again.
        if node is not None and rmts[0] in node.weights[k]:
            out.append(node.weights[k][rmts[0]])
        return out

    def reachable_states(self) -> set[str]:
        """Next states read off root-to-leaf paths (unpruned trees only)."""
        if self.pruned:
            raise ValueError("pruned trees omit sub-node subtrees")
        return {
            format(leaf.index, f"0{self.n}b")
            for leaf in self.leaves
            if not leaf.is_empty()
        }

    def to_json(self) -> dict:
        return {
            "rules": list(self.rules),
            "pruned": self.pruned,
            "levels": [
                [
                    {
                        "index": node.index,
                        "pruned": node.pruned,
                        "gamma": [sorted(w) for w in node.weights],
                        "weights": [
                            {str(r): w[r] for r in sorted(w)} for w in node.weights
                        ],
                    }
                    for node in level
                ]
                for level in self.levels
            ],
            "edges": [
                {
                    "level": e.level,
                    "index": e.index,
                    "parity": e.parity,
                    "reachable": e.reachable,
                    "label": [sorted(g) for g in e.label],
                }
                for e in self.edges
            ],
            "violations": [
                {
                    "level": v.level,
                    "node": v.node,
                    "k": v.k,
                    "rmt": v.rmt,
                    "weights": list(v.weights),
                    "other_node": v.other_node,
                }
                for v in self.violations
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    def to_dot(self, name: str = "rtree") -> str:
        def fmt_set(ws: dict[int, int]) -> str:
            if not ws:
                return "_"
            return "{" + ", ".join(f"{r}({ws[r]})" for r in sorted(ws)) + "}"

        lines = [f'digraph "{name}" {{', "  node [shape=box];"]
        for level in self.levels:
            for node in sorted(level, key=lambda nd: nd.index):
                body = "\\n".join(
                    f"G{k}: {fmt_set(ws)}" for k, ws in enumerate(node.weights)
                )
                style = ", style=dotted" if node.pruned else ""
                lines.append(
                    f'  "N{node.level}.{node.index}" '
                    f'[label="N{node.level}.{node.index}\\n{body}"{style}];'
                )
        for e in sorted(self.edges, key=lambda e: (e.level, e.index)):
            parent = f"N{e.level}.{e.index // 2}"
            child = f"N{e.level + 1}.{e.index}"
            label = ", ".join(
                "_" if not g else "{" + ",".join(map(str, sorted(g))) + "}"
                for g in e.label
            )
            if e.reachable:
                lines.append(f'  "{parent}" -> "{child}" [label="{e.parity}: {label}"];')
            else:
                lines.append(f'  "{child}" [label="", shape=point, style=invis];')
                lines.append(
                    f'  "{parent}" -> "{child}" [label="{e.parity}", style=dashed];'
                )
        lines.append("}")
        return "\n".join(lines) + "\n"


def _restriction(level: int, n: int):
    if level == n - 2:
        return PENULTIMATE_KEEP
    if level == n - 1:
        return LAST_KEEP
    return None


def _prune(nodes: list[TreeNode]) -> None:
    """Mark every node whose sets sit inside another node's sets.

    Among identical nodes the lowest index survives. A containment where the
    shared RMTs carry different weights is left unpruned; the level-wide
    weight check reports it.
    """
    masks = [node.masks for node in nodes]
    for p, node in enumerate(nodes):
        for q, other in enumerate(nodes):
            if p == q or other.pruned:
                continue
            if any(a & ~b for a, b in zip(masks[p], masks[q])):
                continue
            if masks[p] == masks[q] and other.index > node.index:
                continue
            if all(
                other.weights[k][r] == w
                for k, ws in enumerate(node.weights)
                for r, w in ws.items()
            ):
                node.pruned = True
                break


def build_tree(rv, prune: bool = True, max_cells: Optional[int] = None) -> ReachabilityTree:
    """Build the weighted reachability tree level by level.

    Weight clashes inside a node or between nodes of one level are recorded in
    ``tree.violations`` and construction carries on with the first weight.
    """
    rv = as_rule_vector(rv)
    rules = rv.rules
    n = len(rules)
    if n < 3:
        raise ValueError(f"need at least 3 cells, got {n}")
    cap = max_cells if max_cells is not None else (MAX_PRUNED if prune else MAX_UNPRUNED)
    if n > cap:
        raise ResourceLimitError(
            f"{n} cells exceeds the {'pruned' if prune else 'unpruned'} tree cap {cap}"
        )
    tree = ReachabilityTree(rules=rules, pruned=prune)
    root = TreeNode(0, 0, tuple({2 * k: 0, 2 * k + 1: 0} for k in range(4)))
    tree.levels.append([root])

    for i in range(n):
        rule = rules[i]
        keep = _restriction(i + 1, n)
        children: list[TreeNode] = []
        for node in tree.levels[i]:
            if node.pruned:
                continue
            for parity in (0, 1):
                j = 2 * node.index + parity
                label = tuple(
                    frozenset(r for r in ws if (rule >> r) & 1 == parity)
                    for ws in node.weights
                )
                tree.edges.append(TreeEdge(i, j, parity, label))
                if not any(label):
                    continue
                weights = []
                for k, ws in enumerate(node.weights):
                    out: dict[int, int] = {}
                    for r in sorted(label[k]):
                        w = ws[r] + weight_delta(r, parity)
                        for c in successors(r):
                            if keep is not None and c not in keep[k]:
                                continue
                            if c in out and out[c] != w:
                                tree.violations.append(
                                    Violation(i + 1, j, k, c, (out[c], w))
                                )
                                continue
                            out.setdefault(c, w)
                    weights.append(out)
                children.append(TreeNode(i + 1, j, tuple(weights)))

        seen: dict[tuple[int, int], tuple[int, int]] = {}
        for child in children:
            for k, ws in enumerate(child.weights):
                for r, w in ws.items():
                    first = seen.setdefault((k, r), (w, child.index))
                    if first[0] != w:
                        tree.violations.append(
                            Violation(i + 1, child.index, k, r, (first[0], w), first[1])
                        )
        if prune:
            _prune(children)
        tree.levels.append(children)
    return tree


def tree_decide_ncca(rv, prune: bool = True) -> Verdict:
    """Accept iff weights are unique per level and every leaf weight is 0."""
    rv = as_rule_vector(rv)
    if len(rv) < 4:
        raise ValueError("the tree decision needs n >= 4; use the brute-force oracle")
    tree = build_tree(rv, prune=prune)
    return verdict_from_tree(tree)


def verdict_from_tree(tree: ReachabilityTree) -> Verdict:
    if tree.violations:
        v = tree.violations[0]
        return Verdict(WeightConflict(v.level, v.k, v.rmt, v.weights, v.node))
    for leaf in sorted(tree.leaves, key=lambda nd: nd.index):
        for k, ws in enumerate(leaf.weights):
            for r in sorted(ws):
                if ws[r]:
                    return Verdict(NonzeroLeafWeight(k, r, ws[r]))
    return Verdict(Accepted())


def all_weights(tree: ReachabilityTree) -> Iterable[tuple[int, int, int, int, int]]:
    """(level, node, k, rmt, weight) for every weighted RMT in the tree."""
    for level in tree.levels:
        for node in level:
            for k, ws in enumerate(node.weights):
                for r, w in ws.items():
                    yield node.level, node.index, k, r, w
