"""End-to-end zero-error simulation of the decomposition-based coding schemes.

Each ``run_*`` function samples nothing itself: it takes a :class:`SampleBlock`,
entropy-codes every stream with static models derived from the true
distribution, decodes from the serialized bundle, and checks bit-exact
recovery. Rates are reported per stream next to their single-letter targets.

Random generator: NumPy ``PCG64`` seeded with the 64-bit seed; one
``Generator.random(n)`` call drives inverse-CDF sampling over the row-major
flattened joint.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..components import connected_components
from ..dist import JointDistribution, binary_entropy, conditional_entropy_matrix, entropy
from ..labeling import LabelingPair
from ..objectives import collapsed_entropy, cut_sets, label_joint, residual_entropy
from .arith import ConditionalModel, decode_entropy, encode_entropy
from .bundle import EncodedBundle

RATE_REL_TOL = 0.03
RATE_ABS_TOL = 0.05


class DecodeError(RuntimeError):
    """Decoded block differs from the source block or leaves the support."""


@dataclass(frozen=True, eq=False)
class SampleBlock:
    n: int
    x: np.ndarray
    y: np.ndarray
    seed: int


def sample(J: JointDistribution, n: int, seed: int) -> SampleBlock:
    if n < 1:
        raise ValueError("block length must be >= 1")
    gen = np.random.Generator(np.random.PCG64(seed))
    flat = J.p.ravel()
    cdf = np.cumsum(flat)
    cdf[-1] = 1.0
    idx = np.searchsorted(cdf, gen.random(n), side="right")
    # round-off can put a draw on a zero cell at the very end; move it back
    last = int(np.flatnonzero(flat > 0)[-1])
    idx = np.minimum(idx, last)
    x, y = np.divmod(idx, J.n_y)
    return SampleBlock(n, x.astype(np.int64), y.astype(np.int64), seed)


@dataclass(frozen=True)
class StreamRate:
    name: str
    bits: int
    rate: float
    target: float

    def within(self, rel: float = RATE_REL_TOL, abs_: float = RATE_ABS_TOL) -> bool:
        return abs(self.rate - self.target) <= rel * self.target + abs_


@dataclass(frozen=True, eq=False)
class SchemeRun:
    bundle: EncodedBundle
    x: np.ndarray
    y: np.ndarray
    rates: tuple[StreamRate, ...]
    errors: np.ndarray | None = None
    omniscient_errors: np.ndarray | None = None

    def rate(self, name: str) -> StreamRate:
        for r in self.rates:
            if r.name == name:
                return r
        raise KeyError(name)

    @property
    def terminal_sum_rate(self) -> float:
        """Total rate arriving at the terminal (helper-input streams excluded)."""
        return sum(r.rate for r in self.rates if not r.name.endswith("-cut"))

    @property
    def terminal_sum_target(self) -> float:
        return sum(r.target for r in self.rates if not r.name.endswith("-cut"))


# ----------------------------------------------------------------------------
# models


def _given_label(p_marg: np.ndarray, labels: np.ndarray, L: int) -> ConditionalModel:
    table = np.zeros((L, p_marg.size))
    table[labels, np.arange(p_marg.size)] = p_marg
    return ConditionalModel(table)


def _bernoulli(eps: float) -> ConditionalModel:
    return ConditionalModel.unconditional([1.0 - eps, eps])


def _collapse_map(n: int, cut) -> np.ndarray:
    """Symbol -> collapsed index: 0 outside the cut set, 1 + k for cut[k]."""
    m = np.zeros(n, dtype=np.int64)
    m[np.asarray(cut, dtype=np.int64)] = np.arange(1, len(cut) + 1)
    return m


def _collapsed_probs(p_marg: np.ndarray, cut) -> np.ndarray:
    cut = np.asarray(cut, dtype=np.int64)
    inside = np.zeros(p_marg.size, dtype=bool)
    inside[cut] = True
    return np.concatenate([[p_marg[~inside].sum()], p_marg[cut]])


class _Coder:
    """Collects encoded streams and their rate targets."""

    def __init__(self, n: int):
        self.n = n
        self.streams = {}
        self.targets = {}

    def add(self, name, seq, model, target, contexts=None):
        self.streams[name] = encode_entropy(seq, model, contexts)
        self.targets[name] = target

    def rates(self) -> tuple[StreamRate, ...]:
        return tuple(
            StreamRate(k, s.bit_length, s.bit_length / self.n, self.targets[k]) for k, s in self.streams.items()
        )


def _check(J: JointDistribution, block: SampleBlock, x: np.ndarray, y: np.ndarray) -> None:
    if x.shape != block.x.shape or y.shape != block.y.shape:
        raise DecodeError("decoded block has the wrong length")
    if np.any(J.p[x, y] <= 0):
        raise DecodeError("decoded pair outside the support")
    if not (np.array_equal(x, block.x) and np.array_equal(y, block.y)):
        raise DecodeError("decoded block differs from the source block")


def _check_labeling(J: JointDistribution, L: LabelingPair) -> None:
    if L.phi_x.size != J.n_x or L.phi_y.size != J.n_y:
        raise ValueError("labeling does not match the distribution's alphabets")


# ----------------------------------------------------------------------------
# Gacs-Korner scheme


def encode_gk(J: JointDistribution, block: SampleBlock) -> tuple[EncodedBundle, tuple[StreamRate, ...]]:
    dec = connected_components(J)
    kx = dec.component_of_x[block.x]
    c = _Coder(block.n)
    c.add("common", kx, ConditionalModel.unconditional(dec.weights), entropy(dec.weights))
    c.add("x-residual", block.x, _given_label(J.p_x, dec.component_of_x, dec.count),
          residual_entropy(J.p_x, dec.component_of_x), kx)
    c.add("y-residual", block.y, _given_label(J.p_y, dec.component_of_y, dec.count),
          residual_entropy(J.p_y, dec.component_of_y), kx)
    return EncodedBundle("gk", block.n, block.seed, c.streams), c.rates()


def decode_gk(bundle: EncodedBundle, J: JointDistribution):
    dec = connected_components(J)
    n = bundle.n
    k = decode_entropy(bundle.streams["common"], ConditionalModel.unconditional(dec.weights), n)
    x = decode_entropy(bundle.streams["x-residual"], _given_label(J.p_x, dec.component_of_x, dec.count), n, k)
    y = decode_entropy(bundle.streams["y-residual"], _given_label(J.p_y, dec.component_of_y, dec.count), n, k)
    return x, y


def run_gk_scheme(J: JointDistribution, block: SampleBlock) -> SchemeRun:
    """Send the component index once, each source's position inside its component separately."""
    bundle, rates = encode_gk(J, block)
    bundle = EncodedBundle.from_bytes(bundle.to_bytes())
    x, y = decode_gk(bundle, J)
    _check(J, block, x, y)
    return SchemeRun(bundle, x, y, rates)


# ----------------------------------------------------------------------------
# helper schemes
#
# Corner "x": the X encoder sends X given phi_x(X), the Y encoder sends Y in
# full, and the helper conveys phi_x(X) relative to phi_y(Y). Corner "y" is
# the mirror image.


def _sides(J: JointDistribution, L: LabelingPair, block: SampleBlock, corner: str):
    """Return (p_full, labels_full, seq_full, p_res, labels_res, seq_res) for a corner."""
    if corner == "x":
        return J.p_y, L.phi_y, block.y, J.p_x, L.phi_x, block.x
    if corner == "y":
        return J.p_x, L.phi_x, block.x, J.p_y, L.phi_y, block.y
    raise ValueError("corner must be 'x' or 'y'")


def _order(corner: str, full, res):
    return (res, full) if corner == "x" else (full, res)


def _names(corner: str):
    return ("y-full", "x-residual") if corner == "x" else ("x-full", "y-residual")


def error_sequence(L: LabelingPair, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Omniscient helper: e_i = 1 iff phi_x(x_i) != phi_y(y_i)."""
    return (L.phi_x[x] != L.phi_y[y]).astype(np.int64)


def _perr(J: JointDistribution, L: LabelingPair) -> float:
    m = label_joint(J, L)
    return float(m.sum() - np.trace(m)) if L.L > 1 else 0.0


def encode_binary_helper(J, L, block, corner="x"):
    _check_labeling(J, L)
    if not L.is_binary:
        raise ValueError("the binary-helper scheme needs L = 2")
    eps = float(J.p[L.phi_x[:, None] != L.phi_y[None, :]].sum())
    p_full, _, seq_full, p_res, lab_res, seq_res = _sides(J, L, block, corner)
    full_name, res_name = _names(corner)
    c = _Coder(block.n)
    c.add(res_name, seq_res, _given_label(p_res, lab_res, 2), residual_entropy(p_res, lab_res), lab_res[seq_res])
    c.add(full_name, seq_full, ConditionalModel.unconditional(p_full), entropy(p_full))
    e = error_sequence(L, block.x, block.y)
    c.add("helper", e, _bernoulli(eps), binary_entropy(min(eps, 1.0)))
    return EncodedBundle("binary-helper", block.n, block.seed, c.streams, corner), c.rates(), e


def decode_binary_helper(bundle: EncodedBundle, J: JointDistribution, L: LabelingPair):
    """Recover the fully coded source, derive its label, flip it where the
    helper flags a disagreement, then decode the residual in that context."""
    corner, n = bundle.corner, bundle.n
    eps = float(J.p[L.phi_x[:, None] != L.phi_y[None, :]].sum())
    dummy = SampleBlock(n, np.zeros(0, np.int64), np.zeros(0, np.int64), 0)
    p_full, lab_full, _, p_res, lab_res, _ = _sides(J, L, dummy, corner)
    full_name, res_name = _names(corner)
    full = decode_entropy(bundle.streams[full_name], ConditionalModel.unconditional(p_full), n)
    e = decode_entropy(bundle.streams["helper"], _bernoulli(eps), n)
    label = lab_full[full] ^ e
    res = decode_entropy(bundle.streams[res_name], _given_label(p_res, lab_res, 2), n, label)
    return _order(corner, full, res)


def run_binary_helper_scheme(J, L, block, corner: str = "x") -> SchemeRun:
    bundle, rates, e = encode_binary_helper(J, L, block, corner)
    bundle = EncodedBundle.from_bytes(bundle.to_bytes())
    x, y = decode_binary_helper(bundle, J, L)
    _check(J, block, x, y)
    return SchemeRun(bundle, x, y, rates, errors=e, omniscient_errors=e)


def _label_conditional(J: JointDistribution, L: LabelingPair, corner: str) -> np.ndarray:
    """Table[b, a] = P(target label a, other label b) for the helper model."""
    m = label_joint(J, L)
    return m.T if corner == "x" else m


def encode_general_helper(J, L, block, corner="x"):
    _check_labeling(J, L)
    p_full, lab_full, seq_full, p_res, lab_res, seq_res = _sides(J, L, block, corner)
    full_name, res_name = _names(corner)
    table = _label_conditional(J, L, corner)
    c = _Coder(block.n)
    c.add(res_name, seq_res, _given_label(p_res, lab_res, L.L), residual_entropy(p_res, lab_res), lab_res[seq_res])
    c.add(full_name, seq_full, ConditionalModel.unconditional(p_full), entropy(p_full))
    c.add("helper", lab_res[seq_res], ConditionalModel(table), conditional_entropy_matrix(table.T),
          lab_full[seq_full])
    return EncodedBundle("general-helper", block.n, block.seed, c.streams, corner), c.rates()


def decode_general_helper(bundle: EncodedBundle, J: JointDistribution, L: LabelingPair):
    corner, n = bundle.corner, bundle.n
    dummy = SampleBlock(n, np.zeros(0, np.int64), np.zeros(0, np.int64), 0)
    p_full, lab_full, _, p_res, lab_res, _ = _sides(J, L, dummy, corner)
    full_name, res_name = _names(corner)
    full = decode_entropy(bundle.streams[full_name], ConditionalModel.unconditional(p_full), n)
    label = decode_entropy(bundle.streams["helper"], ConditionalModel(_label_conditional(J, L, corner)), n,
                           lab_full[full])
    res = decode_entropy(bundle.streams[res_name], _given_label(p_res, lab_res, L.L), n, label)
    return _order(corner, full, res)


def run_general_helper_scheme(J, L, block, corner: str = "x") -> SchemeRun:
    """Helper codes the target label conditioned on the other side's label."""
    bundle, rates = encode_general_helper(J, L, block, corner)
    bundle = EncodedBundle.from_bytes(bundle.to_bytes())
    x, y = decode_general_helper(bundle, J, L)
    _check(J, block, x, y)
    return SchemeRun(bundle, x, y, rates)


def limited_helper_errors(J: JointDistribution, L: LabelingPair, xcut: np.ndarray, ycut: np.ndarray) -> np.ndarray:
    """Error flags computed from the collapsed observations only.

    A symbol outside its cut set never takes part in a disagreement, so
    e_i = 0 unless both collapsed values name actual symbols.
    """
    sx, sy, _, _ = cut_sets(J, L)
    tx = np.concatenate([[-1], L.phi_x[list(sx)]]).astype(np.int64)
    ty = np.concatenate([[-2], L.phi_y[list(sy)]]).astype(np.int64)
    both = (xcut > 0) & (ycut > 0)
    return (both & (tx[xcut] != ty[ycut])).astype(np.int64)


def _fix_table(J, L, corner):
    """Helper correction model at flagged positions: target label given the other, off-diagonal only."""
    t = _label_conditional(J, L, corner).copy()
    np.fill_diagonal(t, 0.0)
    return t


def encode_limited_helper(J, L, block, corner="x"):
    _check_labeling(J, L)
    sx, sy, hxc, hyc = cut_sets(J, L)
    p_full, lab_full, seq_full, p_res, lab_res, seq_res = _sides(J, L, block, corner)
    full_name, res_name = _names(corner)
    c = _Coder(block.n)

    # sources -> helper
    mx, my = _collapse_map(J.n_x, sx), _collapse_map(J.n_y, sy)
    c.add("x-cut", mx[block.x], ConditionalModel.unconditional(_collapsed_probs(J.p_x, sx)), hxc)
    c.add("y-cut", my[block.y], ConditionalModel.unconditional(_collapsed_probs(J.p_y, sy)), hyc)
    xcut = decode_entropy(c.streams["x-cut"], ConditionalModel.unconditional(_collapsed_probs(J.p_x, sx)), block.n)
    ycut = decode_entropy(c.streams["y-cut"], ConditionalModel.unconditional(_collapsed_probs(J.p_y, sy)), block.n)
    e = limited_helper_errors(J, L, xcut, ycut)

    # sources and helper -> terminal
    eps = _perr(J, L)
    c.add(res_name, seq_res, _given_label(p_res, lab_res, L.L), residual_entropy(p_res, lab_res), lab_res[seq_res])
    c.add(full_name, seq_full, ConditionalModel.unconditional(p_full), entropy(p_full))
    c.add("helper", e, _bernoulli(eps), binary_entropy(min(eps, 1.0)))
    if L.L > 2:
        # at flagged positions the helper knows both symbols, hence both labels
        pos = np.flatnonzero(e)
        xs = np.array([0] + list(sx))[xcut[pos]]
        ys = np.array([0] + list(sy))[ycut[pos]]
        tgt, oth = (L.phi_x[xs], L.phi_y[ys]) if corner == "x" else (L.phi_y[ys], L.phi_x[xs])
        fix = _fix_table(J, L, corner)
        c.add("helper-fix", tgt, ConditionalModel(fix), conditional_entropy_matrix(fix.T), oth)
    return EncodedBundle("limited-helper", block.n, block.seed, c.streams, corner), c.rates(), e


def decode_limited_helper(bundle: EncodedBundle, J: JointDistribution, L: LabelingPair):
    corner, n = bundle.corner, bundle.n
    dummy = SampleBlock(n, np.zeros(0, np.int64), np.zeros(0, np.int64), 0)
    p_full, lab_full, _, p_res, lab_res, _ = _sides(J, L, dummy, corner)
    full_name, res_name = _names(corner)
    full = decode_entropy(bundle.streams[full_name], ConditionalModel.unconditional(p_full), n)
    e = decode_entropy(bundle.streams["helper"], _bernoulli(_perr(J, L)), n)
    label = lab_full[full].copy()
    if L.L > 2:
        pos = np.flatnonzero(e)
        label[pos] = decode_entropy(bundle.streams["helper-fix"], ConditionalModel(_fix_table(J, L, corner)),
                                    pos.size, label[pos])
    else:
        label ^= e
    res = decode_entropy(bundle.streams[res_name], _given_label(p_res, lab_res, L.L), n, label)
    return _order(corner, full, res)


def run_limited_helper_scheme(J, L, block, corner: str = "x") -> SchemeRun:
    """The helper only sees X_cut and Y_cut, yet produces the omniscient error flags."""
    bundle, rates, e = encode_limited_helper(J, L, block, corner)
    omni = error_sequence(L, block.x, block.y)
    if not np.array_equal(e, omni):
        raise DecodeError("limited helper error flags differ from the omniscient helper's")
    bundle = EncodedBundle.from_bytes(bundle.to_bytes())
    x, y = decode_limited_helper(bundle, J, L)
    _check(J, block, x, y)
    return SchemeRun(bundle, x, y, rates, errors=e, omniscient_errors=omni)


def decode_bundle(bundle: EncodedBundle, J: JointDistribution, L: LabelingPair | None = None):
    if bundle.scheme == "gk":
        return decode_gk(bundle, J)
    if L is None:
        raise ValueError(f"scheme {bundle.scheme!r} needs a labeling")
    if bundle.scheme == "binary-helper":
        return decode_binary_helper(bundle, J, L)
    if bundle.scheme == "general-helper":
        return decode_general_helper(bundle, J, L)
    return decode_limited_helper(bundle, J, L)


def run_scheme(scheme: str, J, L, block, corner: str = "x") -> SchemeRun:
    if scheme == "gk":
        return run_gk_scheme(J, block)
    if scheme == "binary-helper":
        return run_binary_helper_scheme(J, L, block, corner)
    if scheme == "general-helper":
        return run_general_helper_scheme(J, L, block, corner)
    if scheme == "limited-helper":
        return run_limited_helper_scheme(J, L, block, corner)
    raise ValueError(f"unknown scheme {scheme!r}")
