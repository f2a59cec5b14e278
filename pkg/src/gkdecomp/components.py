"""Connected components of the bipartite support graph and the exact
Gacs-Korner common information."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dist import JointDistribution, entropy
from .labeling import LabelingPair


class _DisjointSet:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, a: int) -> int:
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:  # path compression
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1


@dataclass(frozen=True, eq=False)
class ComponentDecomposition:
    component_of_x: np.ndarray
    component_of_y: np.ndarray
    weights: np.ndarray

    @property
    def count(self) -> int:
        return len(self.weights)

    def members(self, c: int) -> tuple[np.ndarray, np.ndarray]:
        return np.flatnonzero(self.component_of_x == c), np.flatnonzero(self.component_of_y == c)


def connected_components(J: JointDistribution) -> ComponentDecomposition:
    """Maximal decomposition of the support graph.

    Nodes ``0..n_x-1`` are x-symbols and ``n_x..n_x+n_y-1`` are y-symbols; an
    edge joins them iff ``P(i, j) > 0`` (no tolerance). Components are numbered
    in order of their smallest x-index. Every component contains at least one
    x-symbol because no column of a valid distribution is zero.
    """
    nx, ny = J.shape
    ds = _DisjointSet(nx + ny)
    for i, j in zip(*np.nonzero(J.p > 0)):
        ds.union(int(i), nx + int(j))

    ids: dict[int, int] = {}
    comp_x = np.empty(nx, dtype=np.int64)
    for i in range(nx):
        comp_x[i] = ids.setdefault(ds.find(i), len(ids))
    comp_y = np.array([ids[ds.find(nx + j)] for j in range(ny)], dtype=np.int64)

    weights = np.zeros(len(ids))
    np.add.at(weights, comp_x, J.p_x)
    return ComponentDecomposition(comp_x, comp_y, weights)


def gk_common_information(J: JointDistribution) -> tuple[float, ComponentDecomposition]:
    dec = connected_components(J)
    return entropy(dec.weights), dec


def gk_labelings(J: JointDistribution) -> LabelingPair:
    """The zero-error labeling pair whose common value is the component index."""
    dec = connected_components(J)
    return LabelingPair(dec.component_of_x, dec.component_of_y, dec.count)
