from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True, eq=False)
class LabelingPair:
    """Functions phi_x on [n_x] and phi_y on [n_y] into the shared range [0, L).

    In the binary case label 0 stands for the sign +1 and label 1 for -1.
    """

    phi_x: np.ndarray
    phi_y: np.ndarray
    L: int

    def __post_init__(self):
        px = np.array(self.phi_x, dtype=np.int64).ravel()
        py = np.array(self.phi_y, dtype=np.int64).ravel()
        if self.L < 1:
            raise ValueError("label range must have size >= 1")
        for name, v in (("phi_x", px), ("phi_y", py)):
            if v.size and (v.min() < 0 or v.max() >= self.L):
                raise ValueError(f"{name} has labels outside [0, {self.L})")
        px.setflags(write=False)
        py.setflags(write=False)
        object.__setattr__(self, "phi_x", px)
        object.__setattr__(self, "phi_y", py)
        object.__setattr__(self, "L", int(self.L))

    @classmethod
    def from_signs(cls, sx, sy) -> "LabelingPair":
        sx, sy = np.asarray(sx), np.asarray(sy)
        if not (np.isin(sx, (-1, 1)).all() and np.isin(sy, (-1, 1)).all()):
            raise ValueError("sign vectors must have entries in {-1, +1}")
        return cls((sx < 0).astype(np.int64), (sy < 0).astype(np.int64), 2)

    @property
    def is_binary(self) -> bool:
        return self.L == 2

    def signs(self) -> tuple[np.ndarray, np.ndarray]:
        if self.L != 2:
            raise ValueError("sign vectors only exist for binary labelings")
        return 1 - 2 * self.phi_x, 1 - 2 * self.phi_y

    def negate_y(self) -> "LabelingPair":
        if self.L != 2:
            raise ValueError("negation only defined for binary labelings")
        return LabelingPair(self.phi_x, 1 - self.phi_y, 2)

    def swap_labels(self) -> "LabelingPair":
        """Flip both sides (0 <-> 1) in the binary case."""
        if self.L != 2:
            raise ValueError("swap only defined for binary labelings")
        return LabelingPair(1 - self.phi_x, 1 - self.phi_y, 2)

    def compact(self) -> "LabelingPair":
        """Renumber used labels to 0..L'-1 in order of first appearance in phi_x then phi_y."""
        order: dict[int, int] = {}
        for v in np.concatenate([self.phi_x, self.phi_y]).tolist():
            order.setdefault(v, len(order))
        remap = np.zeros(self.L, dtype=np.int64)
        for old, new in order.items():
            remap[old] = new
        return LabelingPair(remap[self.phi_x], remap[self.phi_y], max(len(order), 1))

    def same_partition(self, other: "LabelingPair") -> bool:
        """True when both pairs agree up to a bijective relabeling of the range."""
        return (
            np.array_equal(self.compact().phi_x, other.compact().phi_x)
            and np.array_equal(self.compact().phi_y, other.compact().phi_y)
        )

    def to_dict(self) -> dict:
        return {"L": self.L, "phi_x": self.phi_x.tolist(), "phi_y": self.phi_y.tolist()}

    @classmethod
    def from_dict(cls, doc: dict) -> "LabelingPair":
        px, py = doc["phi_x"], doc["phi_y"]
        L = doc.get("L")
        if L is None:
            L = max(max(px, default=0), max(py, default=0)) + 1
        return cls(px, py, L)


def load_labeling(path) -> LabelingPair:
    return LabelingPair.from_dict(json.loads(Path(path).read_text()))
