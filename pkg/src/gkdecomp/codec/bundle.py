"""Container for a set of coded streams.

Layout (all integers big-endian)::

    magic    4 bytes  b"GKSB"
    version  u8       1
    scheme   u8       0 gk, 1 binary-helper, 2 general-helper, 3 limited-helper
    corner   u8       0 X-side, 1 Y-side
    n        u64      block length
    seed     u64
    count    u16      number of streams
    count x { name_len u8, name utf-8, bit_length u64 }
    payload: each stream's ceil(bit_length / 8) bytes, in directory order

Padding bits in the last byte of a stream are zero and are not counted in
``bit_length``.
"""

from __future__ import annotations

import os
import struct
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from .arith import CodedStream

MAGIC = b"GKSB"
VERSION = 1
SCHEMES = ("gk", "binary-helper", "general-helper", "limited-helper")
CORNERS = ("x", "y")
_HEADER = struct.Struct(">4sBBBQQH")
_ENTRY = struct.Struct(">Q")


class BundleError(ValueError):
    pass


@dataclass(frozen=True)
class EncodedBundle:
    scheme: str
    n: int
    seed: int
    streams: dict[str, CodedStream] = field(default_factory=dict)
    corner: str = "x"

    @property
    def bit_lengths(self) -> dict[str, int]:
        return {k: s.bit_length for k, s in self.streams.items()}

    def rate(self, name: str) -> float:
        return self.streams[name].bit_length / self.n

    def to_bytes(self) -> bytes:
        if self.scheme not in SCHEMES:
            raise BundleError(f"unknown scheme {self.scheme!r}")
        out = [_HEADER.pack(MAGIC, VERSION, SCHEMES.index(self.scheme), CORNERS.index(self.corner),
                            self.n, self.seed & (2**64 - 1), len(self.streams))]
        for name, s in self.streams.items():
            raw = name.encode()
            out.append(bytes([len(raw)]) + raw + _ENTRY.pack(s.bit_length))
        for s in self.streams.values():
            nbytes = (s.bit_length + 7) // 8
            out.append(s.data[:nbytes].ljust(nbytes, b"\0"))
        return b"".join(out)

    @classmethod
    def from_bytes(cls, blob: bytes) -> "EncodedBundle":
        if len(blob) < _HEADER.size:
            raise BundleError("truncated header")
        magic, version, scheme, corner, n, seed, count = _HEADER.unpack_from(blob)
        if magic != MAGIC:
            raise BundleError("bad magic")
        if version != VERSION:
            raise BundleError(f"unsupported version {version}")
        if scheme >= len(SCHEMES) or corner >= len(CORNERS):
            raise BundleError("bad scheme or corner tag")
        pos = _HEADER.size
        directory = []
        for _ in range(count):
            if pos >= len(blob):
                raise BundleError("truncated directory")
            ln = blob[pos]
            name = blob[pos + 1 : pos + 1 + ln].decode()
            pos += 1 + ln
            (bits,) = _ENTRY.unpack_from(blob, pos)
            pos += _ENTRY.size
            directory.append((name, bits))
        streams = {}
        for name, bits in directory:
            nbytes = (bits + 7) // 8
            if pos + nbytes > len(blob):
                raise BundleError(f"truncated payload for stream {name!r}")
            streams[name] = CodedStream(blob[pos : pos + nbytes], bits)
            pos += nbytes
        return cls(SCHEMES[scheme], n, seed, streams, CORNERS[corner])


def write_bundle(bundle: EncodedBundle, path) -> None:
    """Atomic write: temp file in the target directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(bundle.to_bytes())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_bundle(path) -> EncodedBundle:
    return EncodedBundle.from_bytes(Path(path).read_bytes())
