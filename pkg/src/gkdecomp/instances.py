"""Reference distributions and labelings, plus seeded random generators."""

from __future__ import annotations

import numpy as np

from .dist import JointDistribution
from .labeling import LabelingPair


def block_example() -> JointDistribution:
    """Two disjoint 2x2 blocks of mass 1/8 per cell."""
    p = np.array(
        [
            [1, 1, 0, 0],
            [1, 1, 0, 0],
            [0, 0, 1, 1],
            [0, 0, 1, 1],
        ],
        dtype=float,
    ) / 8
    return JointDistribution.from_matrix(p)


def perturbed_block_example(delta: float = 0.1) -> JointDistribution:
    """Block example with an edge of weight delta/8 joining x=2 and y=3."""
    if not 0 <= delta <= 1:
        raise ValueError("delta must lie in [0, 1]")
    p = np.array(
        [
            [1, 1, 0, 0],
            [1, 1 - delta, delta, 0],
            [0, 0, 1, 1],
            [0, 0, 1, 1],
        ],
        dtype=float,
    ) / 8
    return JointDistribution.from_matrix(p)


def epsilon_example(eps: float = 0.2) -> JointDistribution:
    """3x2 distribution: x=1 -> y=1, x=3 -> y=2 with mass (1-eps)/2 each, x=2 split evenly."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    a, b = (1 - eps) / 2, eps / 2
    return JointDistribution.from_matrix([[a, 0.0], [b, b], [0.0, a]])


def point_mass() -> JointDistribution:
    return JointDistribution.from_matrix([[1.0]])


def independent_uniform(n: int = 2, m: int | None = None) -> JointDistribution:
    m = n if m is None else m
    return JointDistribution.from_matrix(np.full((n, m), 1.0 / (n * m)))


def identity_coupling(n: int = 2) -> JointDistribution:
    return JointDistribution.from_matrix(np.eye(n) / n)


def block_labeling() -> LabelingPair:
    """phi_x = phi_y = (+1, +1, -1, -1) on the 4x4 examples."""
    f = np.array([0, 0, 1, 1])
    return LabelingPair(f, f, 2)


def epsilon_labeling() -> LabelingPair:
    """phi_x: {1,2} -> +1, 3 -> -1; phi_y: 1 -> +1, 2 -> -1."""
    return LabelingPair([0, 0, 1], [0, 1], 2)


def random_distribution(
    rng: np.random.Generator, n_x: int, n_y: int, sparsity: float = 0.0
) -> JointDistribution:
    """Dirichlet(1) weights on a random support; every row and column keeps a cell."""
    while True:
        mask = rng.random((n_x, n_y)) >= sparsity
        if mask.any(axis=1).all() and mask.any(axis=0).all():
            break
    w = rng.exponential(size=(n_x, n_y)) * mask
    return JointDistribution.from_matrix(w / w.sum())


def planted_components(
    rng: np.random.Generator, sizes: list[tuple[int, int]], shuffle: bool = True
) -> JointDistribution:
    """Block-diagonal distribution with one full-support block per ``sizes`` entry.

    The blocks are disjoint components; rows and columns are permuted when
    ``shuffle`` is set.
    """
    n_x = sum(a for a, _ in sizes)
    n_y = sum(b for _, b in sizes)
    w = np.zeros((n_x, n_y))
    r = c = 0
    for a, b in sizes:
        w[r : r + a, c : c + b] = rng.exponential(size=(a, b))
        r, c = r + a, c + b
    if shuffle:
        w = w[rng.permutation(n_x)][:, rng.permutation(n_y)]
    return JointDistribution.from_matrix(w / w.sum())


def random_labeling(rng: np.random.Generator, n_x: int, n_y: int, L: int = 2) -> LabelingPair:
    return LabelingPair(rng.integers(0, L, n_x), rng.integers(0, L, n_y), L)
