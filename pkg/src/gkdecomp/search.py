"""Finding good labeling pairs.

Two routes: exhaustive enumeration of binary labelings (the oracle, feasible
up to ``n_x + n_y <= 24``) and the spectral threshold heuristic built on the
second singular pair of Q, which also drives a greedy recursion for more than
two labels.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .components import gk_common_information
from .dist import JointDistribution
from .labeling import LabelingPair
from .objectives import (
    conductance_ratio,
    disagreement_probability,
    helper_rate_general,
    label_entropies,
    lagrangian_objective,
)
from .spectral import second_singular_pair

BRUTE_LIMIT = 24
TIE_TOL = 1e-12
DEGENERACY_TOL = 1e-12
DEFAULT_LAMBDA_GRID = tuple(2.0**k for k in range(-4, 11))


class SearchLimitError(ValueError):
    pass


@dataclass(frozen=True)
class Objective:
    """``kind`` is ``"lagrangian"`` (uses ``lam``), ``"constrained"`` (uses
    ``epsilon``) or ``"conductance"``."""

    kind: str = "lagrangian"
    lam: float = 1.0
    epsilon: float = 0.0

    def __post_init__(self):
        if self.kind not in ("lagrangian", "constrained", "conductance"):
            raise ValueError(f"unknown objective kind {self.kind!r}")
        if self.lam < 0 or self.epsilon < 0:
            raise ValueError("lambda and epsilon must be nonnegative")

    @property
    def label(self) -> str:
        if self.kind == "lagrangian":
            return f"lagrangian({self.lam:g})"
        if self.kind == "constrained":
            return f"constrained({self.epsilon:g})"
        return "conductance"

    def evaluate(self, J: JointDistribution, L: LabelingPair) -> float:
        """Scalar objective; infeasible labelings score ``-inf``."""
        if self.kind == "lagrangian":
            return lagrangian_objective(J, L, self.lam)
        if self.kind == "constrained":
            if helper_rate_general(J, L) > self.epsilon + TIE_TOL:
                return -math.inf
            return label_entropies(J, L)[0]
        r = conductance_ratio(J, L)
        return -math.inf if r is None else r


@dataclass(frozen=True)
class SearchResult:
    labeling: LabelingPair
    objective_value: float
    objective_kind: str
    method: str
    runtime_ms: float
    warnings: tuple[str, ...] = field(default=())


# ----------------------------------------------------------------------------
# vectorized evaluation over many binary labelings


def _xlogx(a: np.ndarray) -> np.ndarray:
    out = np.zeros_like(a)
    np.multiply(a, np.log2(a, out=np.zeros_like(a), where=a > 0), out=out, where=a > 0)
    return out


def _pair_tables(P: np.ndarray, A: np.ndarray, B: np.ndarray):
    """Label-joint quadrants for every (row of A, row of B).

    ``A`` (cx x n_x) and ``B`` (cy x n_y) hold 0/1 indicators of label 0
    (sign +1). Each quadrant is a product of indicator matrices so cells
    with no support come out as exact zeros.
    """
    A1, B1 = 1.0 - A, 1.0 - B
    PB, PB1 = P @ B.T, P @ B1.T
    return A @ PB, A @ PB1, A1 @ PB, A1 @ PB1


def _score(P: np.ndarray, A: np.ndarray, B: np.ndarray, obj: Objective):
    """(objective, P_err) arrays of shape (len(A), len(B))."""
    m00, m01, m10, m11 = _pair_tables(P, A, B)
    rx0, rx1 = m00 + m01, m10 + m11
    cy0, cy1 = m00 + m10, m01 + m11
    perr = m01 + m10
    h_fx = -(_xlogx(rx0) + _xlogx(rx1))
    h_fy = -(_xlogx(cy0) + _xlogx(cy1))
    h_joint = -(_xlogx(m00) + _xlogx(m01) + _xlogx(m10) + _xlogx(m11))
    h_cond = np.maximum(h_joint - h_fy, 0.0)
    if obj.kind == "lagrangian":
        val = h_fx - obj.lam * h_cond
    elif obj.kind == "constrained":
        val = np.where(h_cond <= obj.epsilon + TIE_TOL, h_fx, -np.inf)
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(perr > 0, rx0 / perr, np.where(rx0 > 0, np.inf, -np.inf))
        val = np.where(rx0 <= 0.5 + TIE_TOL, ratio, -np.inf)
    return val, perr


def _all_assignments(n: int, fix_first: bool) -> np.ndarray:
    """Rows are 0/1 label-0 indicators in lexicographic order of the label
    vectors (symbol 0 is the most significant position, label 0 first)."""
    free = n - 1 if fix_first else n
    codes = np.arange(2**free, dtype=np.int64)
    shifts = np.arange(free - 1, -1, -1, dtype=np.int64)
    labels = (codes[:, None] >> shifts[None, :]) & 1
    if fix_first:
        labels = np.hstack([np.zeros((labels.shape[0], 1), dtype=np.int64), labels])
    return (1 - labels).astype(np.float64)


def _select(values: np.ndarray, perr: np.ndarray) -> int:
    """Best flat index: max objective (within TIE_TOL), then smallest P_err,
    then the first index (lexicographically smallest labeling)."""
    best = np.max(values)
    tied = np.flatnonzero(values >= best - TIE_TOL) if np.isfinite(best) else np.flatnonzero(values == best)
    pe = perr[tied]
    tied = tied[pe <= pe.min() + 1e-15]
    return int(tied[0])


def _brute(J: JointDistribution, obj: Objective) -> tuple[LabelingPair, dict]:
    nx, ny = J.shape
    if nx + ny > BRUTE_LIMIT:
        raise SearchLimitError(f"brute force limited to n_x + n_y <= {BRUTE_LIMIT}, got {nx + ny}")
    A = _all_assignments(nx, fix_first=True)
    B = _all_assignments(ny, fix_first=False)
    values = np.empty((len(A), len(B)))
    perr = np.empty_like(values)
    chunk = max(1, (1 << 20) // len(B))
    for s in range(0, len(A), chunk):
        values[s : s + chunk], perr[s : s + chunk] = _score(J.p, A[s : s + chunk], B, obj)
    idx = _select(values.ravel(), perr.ravel())
    ia, ib = divmod(idx, len(B))
    L = LabelingPair((A[ia] == 0).astype(np.int64), (B[ib] == 0).astype(np.int64), 2)
    return L, {"candidates": values.size}


def _result(J, L, obj: Objective, method: str, t0: float, warnings=()) -> SearchResult:
    return SearchResult(
        labeling=L,
        objective_value=obj.evaluate(J, L),
        objective_kind=obj.label,
        method=method,
        runtime_ms=(time.perf_counter() - t0) * 1e3,
        warnings=tuple(warnings),
    )


def brute_force(J: JointDistribution, obj: Objective) -> SearchResult:
    t0 = time.perf_counter()
    L, _ = _brute(J, obj)
    return _result(J, L, obj, "brute-force", t0)


def brute_force_lagrangian(J: JointDistribution, lam: float) -> SearchResult:
    """Global maximum of H(phi_x) - lam H(phi_x|phi_y) over binary labelings.

    phi_x(0) is pinned to label 0 since relabeling both sides changes nothing.
    """
    return brute_force(J, Objective("lagrangian", lam=lam))


def brute_force_constrained(J: JointDistribution, epsilon: float) -> SearchResult:
    """Global maximum of H(phi_x) over binary labelings with H(phi_x|phi_y) <= epsilon.

    The constant labeling is always feasible, so a result always exists.
    """
    return brute_force(J, Objective("constrained", epsilon=epsilon))


# ----------------------------------------------------------------------------
# spectral heuristic


def best_response_phi_y(J: JointDistribution, phi_x, L: int | None = None) -> np.ndarray:
    """phi_y(j) = argmax_c P(phi_x(X) = c, Y = j); ties go to the smaller label.

    For fixed phi_x this minimizes the disagreement probability.
    """
    phi_x = np.asarray(phi_x, dtype=np.int64)
    L = int(phi_x.max()) + 1 if L is None else L
    mass = np.zeros((L, J.n_y))
    np.add.at(mass, phi_x, J.p)
    return np.argmax(mass, axis=0).astype(np.int64)


def _threshold_labels(vec: np.ndarray) -> list[np.ndarray]:
    """Label vectors (label 0 where vec > t) for every midpoint t between
    consecutive distinct sorted entries."""
    vals = np.unique(vec)
    cuts = (vals[:-1] + vals[1:]) / 2
    return [np.where(vec > t, 0, 1).astype(np.int64) for t in cuts]


def _unique_rows(rows: list[np.ndarray], n: int) -> np.ndarray:
    seen, out = set(), []
    for r in rows:
        key = r.tobytes()
        if key not in seen:
            seen.add(key)
            out.append(r)
    return np.array(out, dtype=np.int64).reshape(-1, n)


def spectral_candidates(J: JointDistribution) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Candidate phi_x and phi_y label vectors from thresholding the second
    singular pair of Q.

    Thresholds run over u, v themselves and over the rescaled functions
    u / sqrt(p_X), v / sqrt(p_Y), which are constant on exact components.
    Complements and constant labelings are included.
    """
    notes = []
    s2, u, v, s3 = second_singular_pair(J)
    if min(J.shape) > 2 and abs(s2 - s3) <= DEGENERACY_TOL:
        notes.append(f"sigma_2 = {s2:.12g} is degenerate with sigma_3; singular vector not unique")
    fx, fy = u / np.sqrt(J.p_x), v / np.sqrt(J.p_y)
    xs = [np.zeros(J.n_x, np.int64)] + _threshold_labels(u) + _threshold_labels(fx)
    ys = [np.zeros(J.n_y, np.int64)] + _threshold_labels(v) + _threshold_labels(fy)
    xs += [1 - r for r in xs]
    ys += [1 - r for r in ys]
    return _unique_rows(xs, J.n_x), _unique_rows(ys, J.n_y), notes


def spectral_threshold_search(
    J: JointDistribution,
    objective: Objective | str = "lagrangian",
    lam: float = 1.0,
    epsilon: float = 0.0,
) -> SearchResult:
    """Threshold the second singular vectors of Q and keep the best pair.

    Every phi_x candidate is paired with every thresholded phi_y and with its
    own best response. The winner is sign-normalized so that
    P(phi_x = +1) <= 1/2.
    """
    t0 = time.perf_counter()
    obj = objective if isinstance(objective, Objective) else Objective(objective, lam, epsilon)
    xs, ys, notes = spectral_candidates(J)
    A = (xs == 0).astype(np.float64)
    B = (ys == 0).astype(np.float64)
    values, perr = _score(J.p, A, B, obj)

    br = np.array([best_response_phi_y(J, r, 2) for r in xs])
    br_values = np.empty(len(xs))
    br_perr = np.empty(len(xs))
    for k in range(len(xs)):
        v, pe = _score(J.p, A[k : k + 1], (br[k : k + 1] == 0).astype(np.float64), obj)
        br_values[k], br_perr[k] = v[0, 0], pe[0, 0]

    flat_v = np.concatenate([values.ravel(), br_values])
    flat_p = np.concatenate([perr.ravel(), br_perr])
    idx = _select(flat_v, flat_p)
    if idx < values.size:
        ia, ib = divmod(idx, len(ys))
        L = LabelingPair(xs[ia], ys[ib], 2)
    else:
        k = idx - values.size
        L = LabelingPair(xs[k], br[k], 2)
    if J.p_x[L.phi_x == 0].sum() > 0.5 + TIE_TOL:
        L = L.swap_labels()
    return _result(J, L, obj, "spectral", t0, notes)


def _restrict(J: JointDistribution, rows: np.ndarray, cols: np.ndarray):
    """Conditional sub-distribution on a block, with the kept row/column
    indices (symbols whose mass inside the block is zero are dropped)."""
    sub = J.p[np.ix_(rows, cols)]
    total = sub.sum()
    if total <= 0:
        return None
    keep_r = sub.sum(axis=1) > 0
    keep_c = sub.sum(axis=0) > 0
    sub = sub[keep_r][:, keep_c] / total
    return JointDistribution(sub, tuple(map(str, rows[keep_r])), tuple(map(str, cols[keep_c]))), rows[keep_r], cols[keep_c]


def recursive_spectral(J: JointDistribution, k: int, lam: float = 1.0) -> LabelingPair:
    """Greedy multi-label extension of the spectral search.

    Each round tries the spectral split on every current block (restricted
    and renormalized) and applies the split that raises the global
    Lagrangian the most. Stops at ``k`` labels or when no split improves.
    Symbols that have no mass inside their own block stay on the unsplit side.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    L = LabelingPair(np.zeros(J.n_x, np.int64), np.zeros(J.n_y, np.int64), 1)
    current = lagrangian_objective(J, L, lam)
    while L.L < k:
        best = None
        for b in range(L.L):
            rows = np.flatnonzero(L.phi_x == b)
            cols = np.flatnonzero(L.phi_y == b)
            if rows.size == 0 or cols.size == 0:
                continue
            restricted = _restrict(J, rows, cols)
            if restricted is None:
                continue
            sub, kr, kc = restricted
            if sub.n_x + sub.n_y < 3:
                continue
            split = spectral_threshold_search(sub, Objective("lagrangian", lam=lam)).labeling
            if np.all(split.phi_x == split.phi_x[0]) and np.all(split.phi_y == split.phi_y[0]):
                continue
            px, py = L.phi_x.copy(), L.phi_y.copy()
            px[kr[split.phi_x == 1]] = L.L
            py[kc[split.phi_y == 1]] = L.L
            cand = LabelingPair(px, py, L.L + 1)
            val = lagrangian_objective(J, cand, lam)
            if val > current + TIE_TOL and (best is None or val > best[0] + TIE_TOL):
                best = (val, cand)
        if best is None:
            break
        current, L = best
    return L


# ----------------------------------------------------------------------------
# sweeps


def lambda_max_estimate(J: JointDistribution, lambda_grid: Sequence[float] = DEFAULT_LAMBDA_GRID) -> float | None:
    """Smallest grid lambda from which on (for every larger grid value) the
    brute-force Lagrangian optimum has zero disagreement and H(phi_x) = H(K).

    Returns ``None`` if even the largest grid value does not qualify. Only
    instances whose components can be split into two sides reach H(K) with
    binary labelings, so H(K) is compared after restricting to the best
    two-sided grouping of components when there are more than two.
    """
    grid = sorted(float(l) for l in lambda_grid)
    target = binary_gk_entropy(J)
    ok = []
    for lam in grid:
        res = brute_force_lagrangian(J, lam)
        L = res.labeling
        ok.append(
            disagreement_probability(J, L) == 0.0 and abs(label_entropies(J, L)[0] - target) <= 1e-9
        )
    if not ok[-1]:
        return None
    i = len(ok) - 1
    while i > 0 and ok[i - 1]:
        i -= 1
    return grid[i]


def binary_gk_entropy(J: JointDistribution) -> float:
    """Largest H(phi_x) over zero-error binary labelings: the best split of
    the components into two groups (equals H(K) when there are <= 2)."""
    hk, dec = gk_common_information(J)
    if dec.count <= 2:
        return hk
    w = dec.weights
    best = 0.0
    for mask in range(1, 2 ** (dec.count - 1)):
        side = sum(w[c] for c in range(dec.count) if mask >> c & 1)
        q = min(max(side, 0.0), 1.0)
        if 0 < q < 1:
            best = max(best, -q * math.log2(q) - (1 - q) * math.log2(1 - q))
    return best


@dataclass(frozen=True)
class TradeoffPoint:
    param: float
    H_phiX: float
    helper_rate: float
    P_err: float
    method: str


def tradeoff_sweep(
    J: JointDistribution,
    grid: Iterable[float],
    param: str = "epsilon",
    method: str = "brute",
) -> list[TradeoffPoint]:
    """Trace (H(phi_x), H(phi_x|phi_y)) over an epsilon or lambda grid.

    For the brute-force constrained frontier the achieved entropy must be
    nondecreasing in epsilon; a violation raises ``AssertionError``.
    """
    if param not in ("epsilon", "lambda"):
        raise ValueError("param must be 'epsilon' or 'lambda'")
    if method not in ("brute", "spectral"):
        raise ValueError("method must be 'brute' or 'spectral'")
    points = []
    for g in sorted(float(v) for v in grid):
        obj = Objective("constrained", epsilon=g) if param == "epsilon" else Objective("lagrangian", lam=g)
        res = brute_force(J, obj) if method == "brute" else spectral_threshold_search(J, obj)
        L = res.labeling
        points.append(
            TradeoffPoint(
                g,
                label_entropies(J, L)[0],
                helper_rate_general(J, L),
                disagreement_probability(J, L),
                res.method,
            )
        )
    if method == "brute" and param == "epsilon":
        hs = [p.H_phiX for p in points]
        assert all(b >= a - 1e-9 for a, b in zip(hs, hs[1:])), "constrained frontier not monotone"
    return points


def tradeoff_csv(points: Sequence[TradeoffPoint], param: str = "epsilon") -> str:
    lines = [f"{param},H_phiX,helper_rate,P_err,method"]
    lines += [f"{p.param:.6f},{p.H_phiX:.6f},{p.helper_rate:.6f},{p.P_err:.6f},{p.method}" for p in points]
    return "\n".join(lines) + "\n"
