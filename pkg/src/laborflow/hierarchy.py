"""Recursive community hierarchy over the labor flow network."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

from .community import louvain
from .network import LaborFlowNetwork, _firm_key
from .util import derive_seed

ROOT_ID = "r"


@dataclass
class TreeNode:
    id: str
    level: int
    firms: tuple
    children: list["TreeNode"] = field(default_factory=list)
    indivisible: bool = False
    stats: dict = field(default_factory=dict)

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def as_dict(self) -> dict:
        d = {
            "id": self.id,
            "level": self.level,
            "firms": [str(f) for f in self.firms],
            "children": [c.as_dict() for c in self.children],
        }
        if self.indivisible:
            d["indivisible"] = True
        if self.stats:
            d["stats"] = dict(sorted(self.stats.items()))
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TreeNode":
        node = cls(
            id=d["id"],
            level=d["level"],
            firms=tuple(d["firms"]),
            indivisible=d.get("indivisible", False),
            stats=dict(d.get("stats", {})),
        )
        node.children = [cls.from_dict(c) for c in d.get("children", [])]
        return node


@dataclass
class CommunityTree:
    """Rooted hierarchy of firm clusters; children partition their parent."""

    root: TreeNode

    def nodes(self):
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def find(self, node_id: str) -> TreeNode:
        for node in self.nodes():
            if node.id == node_id:
                return node
        raise KeyError(f"no tree node with id {node_id!r}")

    @property
    def depth(self) -> int:
        return max(node.level for node in self.nodes())

    def level_nodes(self, k: int) -> list[TreeNode]:
        """Communities forming the level-k partition.

        Nodes at depth k, plus leaves that stopped above k (they persist
        downward so every level partitions the full firm set).
        """
        if k < 0 or k > self.depth:
            raise ValueError(f"level {k} outside 0..{self.depth}")
        out = []
        for node in self.nodes():
            if node.level == k or (node.level < k and node.is_leaf):
                out.append(node)
        return out

    def level_assignment(self, k: int) -> dict:
        assign: dict = {}
        for node in self.level_nodes(k):
            for f in node.firms:
                assign[f] = node.id
        return assign

    def leaf_paths(self) -> dict:
        """firm -> id of the deepest node containing it."""
        paths: dict = {}
        for node in self.nodes():
            if node.is_leaf:
                for f in node.firms:
                    paths[f] = node.id
        return paths

    @classmethod
    def from_paths(cls, paths) -> "CommunityTree":
        """Build a tree from firm -> dot-joined path labels (root excluded).

        Useful for planted ground-truth hierarchies: ``{"A": "0.1"}`` puts
        firm A under root child "0", grandchild "1".
        """
        by_path: dict[tuple, list] = defaultdict(list)
        for firm, path in paths.items():
            key = tuple(path.split(".")) if path else ()
            by_path[key].append(firm)

        def build(prefix: tuple, node_id: str, level: int) -> TreeNode:
            firms = [f for key, fs in by_path.items() if key[:level] == prefix for f in fs]
            firms.sort(key=_firm_key)
            node = TreeNode(id=node_id, level=level, firms=tuple(firms))
            labels = sorted({key[level] for key in by_path if len(key) > level and key[:level] == prefix})
            for idx, label in enumerate(labels):
                node.children.append(build(prefix + (label,), f"{node_id}.{idx}", level + 1))
            return node

        return cls(build((), ROOT_ID, 0))


def detect_hierarchy(
    net: LaborFlowNetwork,
    min_size: int = 10,
    seed: int = 0,
    symmetrize: bool = False,
) -> CommunityTree:
    """Recursively split communities by Louvain until small or indivisible.

    A node with more than ``min_size`` firms is re-clustered on its induced
    subgraph (internal edges only); a single-community result marks it
    indivisible. Child seeds derive from (parent seed, child index).
    """
    if not net.firms:
        raise ValueError("detect_hierarchy needs a non-empty network")

    def split(subnet: LaborFlowNetwork, node: TreeNode, node_seed: int) -> None:
        if len(node.firms) <= min_size:
            return
        part = louvain(subnet, seed=node_seed, symmetrize=symmetrize)
        groups = part.communities()
        if len(groups) <= 1:
            node.indivisible = True
            return
        for label in sorted(groups):
            firms = tuple(sorted(groups[label], key=_firm_key))
            child = TreeNode(id=f"{node.id}.{label}", level=node.level + 1, firms=firms)
            node.children.append(child)
            split(subnet.subgraph(firms), child, derive_seed(node_seed, label))

    root = TreeNode(id=ROOT_ID, level=0, firms=tuple(net.sorted_firms()))
    split(net, root, seed)
    return CommunityTree(root)
