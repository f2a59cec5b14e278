"""Everything a labeling pair implies: disagreement, helper rates, objectives,
cut sets and the achievable rate regions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .dist import (
    JointDistribution,
    binary_entropy,
    conditional_entropy_matrix,
    entropy,
)
from .labeling import LabelingPair

__all__ = [
    "LabelingPair",
    "DecompositionReport",
    "RateRegion",
    "label_joint",
    "disagreement_probability",
    "helper_rate_general",
    "helper_rate_binary",
    "label_entropies",
    "residual_entropy",
    "lagrangian_objective",
    "matrix_objective_binary",
    "conductance_ratio",
    "cut_sets",
    "rate_region_binary",
    "rate_region_general",
    "decomposition_report",
]


def _check(J: JointDistribution, L: LabelingPair) -> None:
    if L.phi_x.size != J.n_x or L.phi_y.size != J.n_y:
        raise ValueError(
            f"labeling has sizes ({L.phi_x.size}, {L.phi_y.size}) but distribution is {J.shape}"
        )


def _one_hot(labels: np.ndarray, L: int) -> np.ndarray:
    m = np.zeros((labels.size, L))
    m[np.arange(labels.size), labels] = 1.0
    return m


def label_joint(J: JointDistribution, L: LabelingPair) -> np.ndarray:
    """L x L matrix of P(phi_x(X) = a, phi_y(Y) = b)."""
    _check(J, L)
    return _one_hot(L.phi_x, L.L).T @ J.p @ _one_hot(L.phi_y, L.L)


def disagreement_probability(J: JointDistribution, L: LabelingPair) -> float:
    _check(J, L)
    mask = L.phi_x[:, None] != L.phi_y[None, :]
    perr = min(1.0, float(J.p[mask].sum()))
    if L.is_binary:
        sx, sy = L.signs()
        bilinear = 0.5 * (1.0 - sx @ J.p @ sy)
        assert abs(bilinear - perr) <= 1e-12, (perr, bilinear)
    return perr


def label_entropies(J: JointDistribution, L: LabelingPair) -> tuple[float, float]:
    """(H(phi_x(X)), H(phi_y(Y)))."""
    m = label_joint(J, L)
    return entropy(m.sum(axis=1)), entropy(m.sum(axis=0))


def residual_entropy(p_marg: np.ndarray, labels: np.ndarray) -> float:
    """H(X | phi(X)) for a deterministic labeling of a single variable."""
    group = np.zeros(labels.max() + 1 if labels.size else 1)
    np.add.at(group, labels, p_marg)
    g = group[labels]
    nz = p_marg > 0
    return float((p_marg[nz] * np.log2(g[nz] / p_marg[nz])).sum())


def helper_rate_general(J: JointDistribution, L: LabelingPair) -> float:
    """H(phi_x(X) | phi_y(Y))."""
    return conditional_entropy_matrix(label_joint(J, L))


def helper_rate_binary(J: JointDistribution, L: LabelingPair) -> float:
    """h(P_err), the rate of a helper that only flags disagreements."""
    if not L.is_binary:
        raise ValueError("binary helper rate requires L = 2")
    return binary_entropy(disagreement_probability(J, L))


def lagrangian_objective(J: JointDistribution, L: LabelingPair, lam: float) -> float:
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    m = label_joint(J, L)
    return entropy(m.sum(axis=1)) - lam * conditional_entropy_matrix(m)


def matrix_objective_binary(J: JointDistribution, sx, sy, lam: float) -> float:
    """h((1 + sx' P 1)/2) - lam * h((1 - sx' P sy)/2) for sign vectors sx, sy."""
    sx = np.asarray(sx, dtype=float)
    sy = np.asarray(sy, dtype=float)
    if not (np.isin(sx, (-1, 1)).all() and np.isin(sy, (-1, 1)).all()):
        raise ValueError("sign vectors must have entries in {-1, +1}")
    p_plus = 0.5 * (1.0 + sx @ J.p @ np.ones(J.n_y))
    p_err = 0.5 * (1.0 - sx @ J.p @ sy)
    clip = lambda t: min(1.0, max(0.0, t))  # noqa: E731
    return binary_entropy(clip(p_plus)) - lam * binary_entropy(clip(p_err))


def conductance_ratio(J: JointDistribution, L: LabelingPair) -> float | None:
    """P(phi_x = +1) / P_err subject to P(phi_x = +1) <= 1/2.

    Returns ``math.inf`` for a nonempty side with zero cut, and ``None`` when
    the constraint is violated or the +1 side is empty with zero cut.
    """
    if not L.is_binary:
        raise ValueError("conductance ratio requires L = 2")
    side = float(J.p_x[L.phi_x == 0].sum())
    if side > 0.5 + 1e-12:
        return None
    perr = disagreement_probability(J, L)
    if perr == 0.0:
        return math.inf if side > 0 else None
    return side / perr


def cut_sets(J: JointDistribution, L: LabelingPair) -> tuple[tuple[int, ...], tuple[int, ...], float, float]:
    """Symbols that can take part in a disagreement, and the entropies of the
    collapsed variables X_cut, Y_cut (every symbol outside the cut set is
    merged into one value)."""
    _check(J, L)
    bad = (J.p > 0) & (L.phi_x[:, None] != L.phi_y[None, :])
    sx = np.flatnonzero(bad.any(axis=1))
    sy = np.flatnonzero(bad.any(axis=0))
    return (
        tuple(int(i) for i in sx),
        tuple(int(j) for j in sy),
        collapsed_entropy(J.p_x, sx),
        collapsed_entropy(J.p_y, sy),
    )


def collapsed_entropy(p_marg: np.ndarray, keep) -> float:
    inside = np.zeros(p_marg.size, dtype=bool)
    inside[np.asarray(keep, dtype=np.int64)] = True
    return entropy(np.concatenate([p_marg[inside], [p_marg[~inside].sum()]]))


@dataclass(frozen=True)
class RateRegion:
    """Corner points are (R_X, R_Y, R_H); the dominant face is one (alpha, R_X, R_Y, R_H) row per alpha."""

    corner_points: tuple[tuple[float, float, float], ...]
    dominant_face: tuple[tuple[float, float, float, float], ...] = ()
    alpha_grid: tuple[float, ...] = ()

    def face_slope(self) -> float | None:
        if len(self.corner_points) < 2:
            return None
        (x0, y0, _), (x1, y1, _) = self.corner_points[:2]
        # a face narrower than rounding noise is vertical
        if abs(x1 - x0) <= 1e-12:
            return None
        return (y1 - y0) / (x1 - x0)

    def to_csv(self) -> str:
        lines = ["alpha,R_X,R_Y,R_H"]
        lines += [f"{a:.6f},{rx:.6f},{ry:.6f},{rh:.6f}" for a, rx, ry, rh in self.dominant_face]
        return "\n".join(lines) + "\n"


def _source_terms(J: JointDistribution, L: LabelingPair):
    m = label_joint(J, L)
    h_fx, h_fy = entropy(m.sum(axis=1)), entropy(m.sum(axis=0))
    h_x_fx = residual_entropy(J.p_x, L.phi_x)
    h_y_fy = residual_entropy(J.p_y, L.phi_y)
    return m, h_fx, h_fy, h_x_fx, h_y_fy


def rate_region_binary(J: JointDistribution, L: LabelingPair, alpha_grid: Iterable[float] | None = None) -> RateRegion:
    """Region achieved by binary labelings with a helper of rate h(P_err).

    The dominant face runs from the X-side corner (H(X|phi_x), H(Y)) at
    alpha = 0 to the Y-side corner (H(X), H(Y|phi_y)) at alpha = 1, with sum
    rate H(X|phi_x) + H(Y|phi_y) + alpha H(phi_x) + (1 - alpha) H(phi_y).
    """
    if not L.is_binary:
        raise ValueError("binary rate region requires L = 2")
    grid = tuple(np.linspace(0.0, 1.0, 101)) if alpha_grid is None else tuple(float(a) for a in alpha_grid)
    _, h_fx, h_fy, h_x_fx, h_y_fy = _source_terms(J, L)
    rh = helper_rate_binary(J, L)
    face = tuple((a, h_x_fx + a * h_fx, h_y_fy + (1.0 - a) * h_fy, rh) for a in grid)
    corners = ((h_x_fx, h_y_fy + h_fy, rh), (h_x_fx + h_fx, h_y_fy, rh))
    return RateRegion(corners, face, grid)


def rate_region_general(J: JointDistribution, L: LabelingPair) -> RateRegion:
    """The X-side corner (H(X|phi_x), H(Y), H(phi_x|phi_y)) and its mirror."""
    m, h_fx, h_fy, h_x_fx, h_y_fy = _source_terms(J, L)
    corners = (
        (h_x_fx, h_y_fy + h_fy, conditional_entropy_matrix(m)),
        (h_x_fx + h_fx, h_y_fy, conditional_entropy_matrix(m.T)),
    )
    return RateRegion(corners)


@dataclass(frozen=True)
class DecompositionReport:
    H_phiX: float
    H_phiY: float
    H_X_given_phiX: float
    H_Y_given_phiY: float
    P_err: float
    helper_rate_binary: float | None
    helper_rate_general: float
    lagrangian_at: dict = field(default_factory=dict)
    conductance_ratio: float | None = None
    S_X: tuple[int, ...] = ()
    S_Y: tuple[int, ...] = ()
    H_X_cut: float = 0.0
    H_Y_cut: float = 0.0

    def as_dict(self) -> dict:
        out = dict(self.__dict__)
        out["lagrangian_at"] = {str(k): v for k, v in self.lagrangian_at.items()}
        if out["conductance_ratio"] == math.inf:
            out["conductance_ratio"] = "infinite"
        elif out["conductance_ratio"] is None and self.helper_rate_binary is not None:
            out["conductance_ratio"] = "undefined"
        out["S_X"], out["S_Y"] = list(self.S_X), list(self.S_Y)
        return out


def decomposition_report(
    J: JointDistribution, L: LabelingPair, lambdas: Iterable[float] = (0.0, 1.0, 10.0)
) -> DecompositionReport:
    m, h_fx, h_fy, h_x_fx, h_y_fy = _source_terms(J, L)
    h_cond = conditional_entropy_matrix(m)
    sx, sy, hxc, hyc = cut_sets(J, L)
    return DecompositionReport(
        H_phiX=h_fx,
        H_phiY=h_fy,
        H_X_given_phiX=h_x_fx,
        H_Y_given_phiY=h_y_fy,
        P_err=disagreement_probability(J, L),
        helper_rate_binary=helper_rate_binary(J, L) if L.is_binary else None,
        helper_rate_general=h_cond,
        lagrangian_at={float(lam): h_fx - float(lam) * h_cond for lam in lambdas},
        conductance_ratio=conductance_ratio(J, L) if L.is_binary else None,
        S_X=sx,
        S_Y=sy,
        H_X_cut=hxc,
        H_Y_cut=hyc,
    )
