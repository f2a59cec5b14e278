"""Finite joint distributions and the entropy primitives used everywhere else.

All entropies are in bits. A :class:`JointDistribution` never has a zero row
or zero column: those symbols are stripped at load time because the
normalizations downstream divide by the marginals.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

SUM_TOL = 1e-9
LOAD_TOL = 1e-6
# Below this deviation the input is taken as already normalized, so that
# save -> load round-trips bit-identically.
RENORM_TOL = 1e-12


class DistributionError(ValueError):
    """Raised for matrices that cannot be turned into a joint distribution."""


def _as_vector(p) -> np.ndarray:
    return np.asarray(p, dtype=np.float64).ravel()


def check_prob_vector(p, tol: float = SUM_TOL) -> np.ndarray:
    """Return ``p`` as a float array after checking it is a probability vector."""
    v = _as_vector(p)
    if v.size == 0:
        raise DistributionError("empty probability vector")
    if np.any(v < 0):
        raise DistributionError("negative entry")
    if abs(v.sum() - 1.0) > tol:
        raise DistributionError(f"probabilities sum to {v.sum()!r}, not 1")
    return v


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Probability matrix ``p`` (rows index X, columns index Y) with labels."""

    p: np.ndarray
    x_labels: tuple[str, ...]
    y_labels: tuple[str, ...]

    def __post_init__(self):
        p = np.array(self.p, dtype=np.float64, copy=True)
        if p.ndim != 2 or p.size == 0:
            raise DistributionError("empty matrix")
        if not np.all(np.isfinite(p)):
            raise DistributionError("non-finite entry")
        if np.any(p < 0):
            raise DistributionError("negative entry")
        if abs(p.sum() - 1.0) > SUM_TOL:
            raise DistributionError(f"entries sum to {p.sum()!r}, not 1")
        if np.any(p.sum(axis=1) <= 0) or np.any(p.sum(axis=0) <= 0):
            raise DistributionError("zero marginal; use from_matrix to strip it")
        if len(self.x_labels) != p.shape[0] or len(self.y_labels) != p.shape[1]:
            raise DistributionError("label count does not match matrix shape")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "x_labels", tuple(str(s) for s in self.x_labels))
        object.__setattr__(self, "y_labels", tuple(str(s) for s in self.y_labels))

    @classmethod
    def from_matrix(
        cls,
        matrix,
        x_labels: Sequence[str] | None = None,
        y_labels: Sequence[str] | None = None,
    ) -> "JointDistribution":
        """Validate, renormalize and strip zero-marginal symbols.

        Inputs whose total deviates from 1 by at most ``LOAD_TOL`` are rescaled;
        anything further off is rejected.
        """
        try:
            p = np.array(matrix, dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise DistributionError(f"matrix is not numeric: {exc}") from None
        if p.ndim == 1 and p.size:
            p = p.reshape(1, -1)
        if p.ndim != 2 or p.size == 0:
            raise DistributionError("empty matrix")
        if not np.all(np.isfinite(p)):
            raise DistributionError("non-finite entry")
        if np.any(p < 0):
            i, j = np.argwhere(p < 0)[0]
            raise DistributionError(f"negative entry at ({i + 1}, {j + 1})")
        total = p.sum()
        if abs(total - 1.0) > LOAD_TOL:
            raise DistributionError(f"entries sum to {total!r}; deviation exceeds {LOAD_TOL}")
        if abs(total - 1.0) > RENORM_TOL:
            p = p / total

        xl = list(x_labels) if x_labels is not None else [str(i + 1) for i in range(p.shape[0])]
        yl = list(y_labels) if y_labels is not None else [str(j + 1) for j in range(p.shape[1])]
        if len(xl) != p.shape[0] or len(yl) != p.shape[1]:
            raise DistributionError("label count does not match matrix shape")

        rows = p.sum(axis=1) > 0
        cols = p.sum(axis=0) > 0
        if not rows.all() or not cols.all():
            dropped_x = [xl[i] for i in np.flatnonzero(~rows)]
            dropped_y = [yl[j] for j in np.flatnonzero(~cols)]
            warnings.warn(
                f"stripped zero-marginal symbols x={dropped_x} y={dropped_y}",
                stacklevel=2,
            )
            p = p[rows][:, cols]
            xl = [s for s, keep in zip(xl, rows) if keep]
            yl = [s for s, keep in zip(yl, cols) if keep]
        return cls(p, tuple(xl), tuple(yl))

    @property
    def shape(self) -> tuple[int, int]:
        return self.p.shape

    @property
    def n_x(self) -> int:
        return self.p.shape[0]

    @property
    def n_y(self) -> int:
        return self.p.shape[1]

    @property
    def p_x(self) -> np.ndarray:
        return self.p.sum(axis=1)

    @property
    def p_y(self) -> np.ndarray:
        return self.p.sum(axis=0)

    def to_json(self) -> str:
        return json.dumps(
            {
                "x_labels": list(self.x_labels),
                "y_labels": list(self.y_labels),
                "p": self.p.tolist(),
            }
        )


def marginals(J: JointDistribution) -> tuple[np.ndarray, np.ndarray]:
    return J.p_x, J.p_y


def entropy(p) -> float:
    """Shannon entropy in bits, with 0 log(1/0) = 0."""
    v = _as_vector(p)
    nz = v[v > 0]
    # clamp: a marginal can round to a hair above 1
    return max(0.0, float((nz * np.log2(1.0 / nz)).sum()))


def binary_entropy(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"binary_entropy needs 0 <= p <= 1, got {p}")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def conditional_entropy_matrix(m: np.ndarray) -> float:
    """H(row | column) for a nonnegative joint matrix ``m`` (need not sum to 1)."""
    m = np.asarray(m, dtype=np.float64)
    col = m.sum(axis=0)
    mask = m > 0
    ratio = np.divide(np.broadcast_to(col, m.shape), m, out=np.ones_like(m), where=mask)
    return float((m[mask] * np.log2(ratio[mask])).sum())


def conditional_entropy(J: JointDistribution, side: str = "X|Y") -> float:
    """H(X|Y) (``side="X|Y"``) or H(Y|X) (``side="Y|X"``)."""
    side = side.replace("-given-", "|").replace(" ", "")
    if side == "X|Y":
        return conditional_entropy_matrix(J.p)
    if side == "Y|X":
        return conditional_entropy_matrix(J.p.T)
    raise ValueError(f"unknown side {side!r}")


def joint_entropy(J: JointDistribution) -> float:
    return entropy(J.p)


# ----------------------------------------------------------------------------
# file formats


def _parse_json(text: str, origin: str) -> JointDistribution:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DistributionError(f"{origin}:{exc.lineno}: {exc.msg}") from None
    if isinstance(doc, list):
        doc = {"p": doc}
    if not isinstance(doc, dict) or "p" not in doc:
        raise DistributionError(f"{origin}: expected an object with key 'p'")
    rows = doc["p"]
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise DistributionError(f"{origin}: 'p' must be a non-empty list of rows")
    width = len(rows[0])
    for k, r in enumerate(rows):
        if len(r) != width:
            raise DistributionError(f"{origin}: row {k + 1} has {len(r)} entries, expected {width}")
    return JointDistribution.from_matrix(rows, doc.get("x_labels"), doc.get("y_labels"))


def _parse_csv(text: str, origin: str) -> JointDistribution:
    rows = []
    for lineno, rec in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not rec or all(not c.strip() for c in rec):
            continue
        try:
            rows.append([float(c) for c in rec])
        except ValueError:
            raise DistributionError(f"{origin}:{lineno}: non-numeric value in {rec!r}") from None
        if len(rows[-1]) != len(rows[0]):
            raise DistributionError(f"{origin}:{lineno}: ragged row")
    if not rows:
        raise DistributionError(f"{origin}: empty matrix")
    return JointDistribution.from_matrix(rows)


def load_distribution(source, format: str | None = None) -> JointDistribution:
    """Load from a path or from literal text.

    ``format`` is ``"matrix-json"`` or ``"csv"``; when omitted it is inferred
    from the file suffix (or from the first character of literal text).
    """
    text, origin = None, "<text>"
    if isinstance(source, Path) or (
        isinstance(source, str) and "\n" not in source and os.path.exists(source)
    ):
        path = Path(source)
        text, origin = path.read_text(), str(path)
        if format is None:
            format = "csv" if path.suffix.lower() == ".csv" else "matrix-json"
    else:
        text = str(source)
        if format is None:
            format = "matrix-json" if text.lstrip()[:1] in "[{" else "csv"
    if format in ("matrix-json", "json"):
        return _parse_json(text, origin)
    if format == "csv":
        return _parse_csv(text, origin)
    raise ValueError(f"unknown format {format!r}")


def save_distribution(J: JointDistribution, path) -> None:
    Path(path).write_text(J.to_json() + "\n")
