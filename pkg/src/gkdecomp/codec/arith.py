"""Static arithmetic coding with known (optionally context-dependent) models.

A 32-bit integer coder with carry-less underflow handling (pending bits).
Probabilities are quantized to integer frequencies summing to ``2**FREQ_BITS``;
every symbol with positive probability keeps a frequency of at least 1, and
zero-probability symbols cannot be coded.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

STATE_BITS = 32
FULL = (1 << STATE_BITS) - 1
HALF = 1 << (STATE_BITS - 1)
QUARTER = 1 << (STATE_BITS - 2)
FREQ_BITS = 20
TOTAL = 1 << FREQ_BITS


class CodingError(ValueError):
    pass


def quantize(probs) -> np.ndarray:
    """Integer frequencies summing to TOTAL, positive exactly where probs > 0."""
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 1 or p.size == 0 or np.any(p < 0) or p.sum() <= 0:
        raise CodingError("model row must be a nonnegative, nonzero vector")
    p = p / p.sum()
    freq = np.where(p > 0, np.maximum(1, np.floor(p * TOTAL)), 0).astype(np.int64)
    if (p > 0).sum() > TOTAL:
        raise CodingError("alphabet too large for frequency precision")
    diff = TOTAL - int(freq.sum())
    # hand the rounding slack to (or take it from) the most probable symbol
    k = int(np.argmax(p))
    freq[k] += diff
    if freq[k] < 1:
        raise CodingError("cannot quantize model")
    return freq


@dataclass(frozen=True, eq=False)
class ConditionalModel:
    """Row ``c`` of ``table`` is the symbol distribution in context ``c``."""

    table: np.ndarray

    def __post_init__(self):
        t = np.atleast_2d(np.asarray(self.table, dtype=np.float64))
        object.__setattr__(self, "table", t)
        cums = []
        for row in t:
            if row.sum() <= 0:
                cums.append(None)
                continue
            f = quantize(row)
            cums.append([0] + np.cumsum(f).tolist())
        object.__setattr__(self, "_cums", cums)

    @classmethod
    def unconditional(cls, probs) -> "ConditionalModel":
        return cls(np.asarray(probs, dtype=np.float64)[None, :])

    @property
    def n_symbols(self) -> int:
        return self.table.shape[1]

    def entropy_of(self, seq, contexts=None) -> float:
        """Ideal code length in bits, -sum log2 p(symbol | context)."""
        seq = np.asarray(seq, dtype=np.int64)
        ctx = np.zeros_like(seq) if contexts is None else np.asarray(contexts, dtype=np.int64)
        row_sums = self.table.sum(axis=1)
        p = self.table[ctx, seq] / row_sums[ctx]
        return float(-np.log2(p).sum())


@dataclass(frozen=True)
class CodedStream:
    data: bytes
    bit_length: int


def encode_entropy(seq, model: ConditionalModel, contexts=None) -> CodedStream:
    """Arithmetic-code ``seq`` under ``model``; ``contexts[i]`` selects the row for symbol i."""
    syms = np.asarray(seq, dtype=np.int64).tolist()
    ctxs = [0] * len(syms) if contexts is None else np.asarray(contexts, dtype=np.int64).tolist()
    if len(ctxs) != len(syms):
        raise CodingError("contexts and sequence differ in length")
    cums = model._cums
    n_sym = model.n_symbols

    low, high, pending = 0, FULL, 0
    bits: list[int] = []
    emit = bits.append
    for i, (s, c) in enumerate(zip(syms, ctxs)):
        if not 0 <= s < n_sym or not 0 <= c < len(cums) or cums[c] is None:
            raise CodingError(f"symbol {s} in context {c} at position {i} outside model support")
        cum = cums[c]
        lo, hi = cum[s], cum[s + 1]
        if lo == hi:
            raise CodingError(f"symbol {s} in context {c} at position {i} outside model support")
        rng = high - low + 1
        high = low + (rng * hi >> FREQ_BITS) - 1
        low = low + (rng * lo >> FREQ_BITS)
        while True:
            if high < HALF:
                emit(0)
                if pending:
                    bits.extend([1] * pending)
                    pending = 0
            elif low >= HALF:
                emit(1)
                if pending:
                    bits.extend([0] * pending)
                    pending = 0
                low -= HALF
                high -= HALF
            elif low >= QUARTER and high < HALF + QUARTER:
                pending += 1
                low -= QUARTER
                high -= QUARTER
            else:
                break
            low <<= 1
            high = (high << 1) | 1
    pending += 1
    if low < QUARTER:
        emit(0)
        bits.extend([1] * pending)
    else:
        emit(1)
        bits.extend([0] * pending)
    data = np.packbits(np.array(bits, dtype=np.uint8)).tobytes() if bits else b""
    return CodedStream(data, len(bits))


def decode_entropy(stream: CodedStream, model: ConditionalModel, n: int, contexts=None) -> np.ndarray:
    """Invert :func:`encode_entropy` for ``n`` symbols.

    Bits past the recorded length read as zero. Corrupted input decodes to
    some sequence; it never raises unless it would land on an empty context.
    """
    ctxs = [0] * n if contexts is None else np.asarray(contexts, dtype=np.int64).tolist()
    if len(ctxs) != n:
        raise CodingError("contexts and symbol count differ")
    raw = np.unpackbits(np.frombuffer(stream.data, dtype=np.uint8))[: stream.bit_length].tolist()
    nbits = len(raw)
    cums = model._cums

    pos = 0
    code = 0
    for _ in range(STATE_BITS):
        code = (code << 1) | (raw[pos] if pos < nbits else 0)
        pos += 1
    low, high = 0, FULL
    out = [0] * n
    for i in range(n):
        cum = cums[ctxs[i]] if 0 <= ctxs[i] < len(cums) else None
        if cum is None:
            raise CodingError(f"context {ctxs[i]} at position {i} has no model")
        rng = high - low + 1
        count = (((code - low + 1) << FREQ_BITS) - 1) // rng
        # only corrupted input can leave [0, TOTAL)
        count = min(max(count, 0), TOTAL - 1)
        s = bisect_right(cum, count) - 1
        out[i] = s
        high = low + (rng * cum[s + 1] >> FREQ_BITS) - 1
        low = low + (rng * cum[s] >> FREQ_BITS)
        while True:
            if high < HALF:
                pass
            elif low >= HALF:
                low -= HALF
                high -= HALF
                code -= HALF
            elif low >= QUARTER and high < HALF + QUARTER:
                low -= QUARTER
                high -= QUARTER
                code -= QUARTER
            else:
                break
            low <<= 1
            high = (high << 1) | 1
            code = (code << 1) | (raw[pos] if pos < nbits else 0)
            pos += 1
    return np.array(out, dtype=np.int64)
