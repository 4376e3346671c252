"""On-disk graph container and edge-list ingestion.

A graph named ``base`` is stored as a small family of files:

    base.gyh   header, 40 bytes:
                 bytes  0..3   magic b"SEMG"
                 bytes  4..7   zero padding
                 bytes  8..15  format version, u64 LE (currently 1)
                 bytes 16..23  vertex count n, u64 LE
                 bytes 24..31  edge count m, u64 LE
                 bytes 32..39  flags, u64 LE (bit 0: directed)
    base.gyi   per-vertex index, packed little-endian records:
                 undirected: u32 degree, u64 byte offset into base.adj
                 directed:   u32 out degree, u64 out offset,
                             u32 in degree,  u64 in offset (into base.iadj)
    base.adj   out-adjacency lists, u64 LE neighbor ids, concatenated in
               vertex order; each list sorted ascending, deduplicated,
               no self loops
    base.iadj  in-adjacency lists, directed graphs only, same layout
    base.ids   original vertex ids, one per line; line i holds the id that
               was remapped to dense id i (first-appearance order)

For an undirected graph m counts undirected edges; every edge is stored in
both endpoints' lists, so degrees sum to 2m. For a directed graph m counts
arcs. Adjacency files are only ever opened read-only after ingestion; the
index is held in memory (about 12 bytes per vertex, 24 when directed) and
degree queries never touch the disk.
"""

from __future__ import annotations

import io
import os
import struct
from dataclasses import dataclass
from typing import IO, Iterable, Union

import numpy as np

from .errors import (
    BadMagicError,
    BadVersionError,
    DomainError,
    EdgeListParseError,
    IndexConsistencyError,
    TruncatedIndexError,
    VertexRangeError,
)

MAGIC = b"SEMG"
VERSION = 1
HEADER_SIZE = 40
FLAG_DIRECTED = 1

_HEADER_TAIL = struct.Struct("<QQQQ")

TextSource = Union[str, os.PathLike, IO[str], Iterable[str]]


@dataclass(frozen=True)
class GraphHeader:
    version: int
    n: int
    m: int
    flags: int

    @property
    def directed(self) -> bool:
        return bool(self.flags & FLAG_DIRECTED)

    def pack(self) -> bytes:
        return MAGIC + b"\x00" * 4 + _HEADER_TAIL.pack(self.version, self.n, self.m, self.flags)


class VertexIndex:
    """In-memory index: degree and adjacency byte offset per vertex.

    Arrays are immutable after construction so a handle can be shared
    across threads without copies.
    """

    def __init__(self, out_deg, out_off, in_deg=None, in_off=None):
        self.out_deg = out_deg
        self.out_off = out_off
        self.in_deg = in_deg
        self.in_off = in_off
        for arr in (out_deg, out_off, in_deg, in_off):
            if arr is not None:
                arr.setflags(write=False)

    @property
    def nbytes(self) -> int:
        total = self.out_deg.nbytes + self.out_off.nbytes
        if self.in_deg is not None:
            total += self.in_deg.nbytes + self.in_off.nbytes
        return total


class GraphHandle:
    """Opened, validated graph. Immutable; all reads go through the index."""

    def __init__(self, base: str, header: GraphHeader, index: VertexIndex):
        self.base = str(base)
        self.header = header
        self.index = index
        self._original_ids = None

    @property
    def n(self) -> int:
        return self.header.n

    @property
    def m(self) -> int:
        return self.header.m

    @property
    def directed(self) -> bool:
        return self.header.directed

    @property
    def adj_path(self) -> str:
        return self.base + ".adj"

    @property
    def iadj_path(self) -> str:
        return self.base + ".iadj"

    def degree(self, v: int, direction: str = "out") -> int:
        if not 0 <= v < self.n:
            raise VertexRangeError(f"vertex {v} out of range [0, {self.n})")
        if direction not in ("out", "in", "both"):
            raise ValueError(f"unknown direction {direction!r}")
        if not self.directed:
            # one stored list per vertex; in == out == both
            return int(self.index.out_deg[v])
        if direction == "out":
            return int(self.index.out_deg[v])
        if direction == "in":
            return int(self.index.in_deg[v])
        return int(self.index.out_deg[v]) + int(self.index.in_deg[v])

    def list_span(self, v: int, direction: str = "out") -> tuple[str, int, int]:
        """(file path, byte offset, byte length) of v's adjacency list."""
        if not 0 <= v < self.n:
            raise VertexRangeError(f"vertex {v} out of range [0, {self.n})")
        if direction == "in" and self.directed:
            return self.iadj_path, int(self.index.in_off[v]), int(self.index.in_deg[v]) * 8
        return self.adj_path, int(self.index.out_off[v]), int(self.index.out_deg[v]) * 8

    def original_ids(self) -> np.ndarray:
        """Original input id for each dense vertex id (remap table)."""
        if self._original_ids is None:
            path = self.base + ".ids"
            with open(path, "r") as fh:
                vals = [int(line) for line in fh if line.strip()]
            if len(vals) != self.n:
                raise IndexConsistencyError(
                    f"remap table has {len(vals)} entries, header says n={self.n}"
                )
            self._original_ids = np.asarray(vals, dtype=np.int64)
            self._original_ids.setflags(write=False)
        return self._original_ids

    def __repr__(self):
        kind = "directed" if self.directed else "undirected"
        return f"GraphHandle({self.base!r}, n={self.n}, m={self.m}, {kind})"


# ----------------------------------------------------------------------
# ingestion
# ----------------------------------------------------------------------


def _iter_lines(source: TextSource):
    if isinstance(source, (str, os.PathLike)):
        with open(source, "r") as fh:
            yield from fh
    elif isinstance(source, io.TextIOBase) or hasattr(source, "read"):
        yield from source
    else:
        yield from source


def _parse_edges(source: TextSource):
    """Parse "u v" lines, remapping ids to 0..n-1 by first appearance.

    Returns (us, vs, original_ids). Self loops are registered as vertices
    but dropped as edges.
    """
    idmap: dict[int, int] = {}
    original: list[int] = []
    us: list[int] = []
    vs: list[int] = []
    for lineno, raw in enumerate(_iter_lines(source), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise EdgeListParseError(lineno, f"expected two fields, got {len(parts)}")
        try:
            a = int(parts[0])
            b = int(parts[1])
        except ValueError:
            raise EdgeListParseError(lineno, f"non-integer vertex id in {line!r}") from None
        if a < 0 or b < 0:
            raise EdgeListParseError(lineno, "vertex ids must be nonnegative")
        ua = idmap.get(a)
        if ua is None:
            ua = idmap[a] = len(original)
            original.append(a)
        ub = idmap.get(b)
        if ub is None:
            ub = idmap[b] = len(original)
            original.append(b)
        if ua == ub:
            continue
        us.append(ua)
        vs.append(ub)
    return us, vs, original


def _dedup_pairs(us: np.ndarray, vs: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Unique (u, v) pairs sorted lexicographically."""
    if n >= 2**32:
        raise DomainError("graphs with 2^32 or more vertices are not supported")
    keys = us.astype(np.uint64) * np.uint64(max(n, 1)) + vs.astype(np.uint64)
    keys = np.unique(keys)
    u = (keys // np.uint64(max(n, 1))).astype(np.int64)
    v = (keys % np.uint64(max(n, 1))).astype(np.int64)
    return u, v


def _csr_from_pairs(u: np.ndarray, v: np.ndarray, n: int):
    """Degrees, byte offsets, and the concatenated neighbor array.

    Pairs must already be sorted by (u, v); neighbor lists come out
    sorted ascending.
    """
    deg = np.bincount(u, minlength=n).astype(np.uint32)
    off = np.zeros(n, dtype=np.uint64)
    if n:
        np.cumsum(deg[:-1] * np.uint64(8), out=off[1:])
    return deg, off, v.astype("<u8")


def _write_files(base: str, header: GraphHeader, out, inn, original: list[int]):
    out_deg, out_off, out_nbrs = out
    with open(base + ".gyh", "wb") as fh:
        fh.write(header.pack())
    with open(base + ".gyi", "wb") as fh:
        if header.directed:
            in_deg, in_off, _ = inn
            rec = np.zeros(
                header.n,
                dtype=np.dtype(
                    [("od", "<u4"), ("oo", "<u8"), ("id", "<u4"), ("io", "<u8")], align=False
                ),
            )
            rec["od"] = out_deg
            rec["oo"] = out_off
            rec["id"] = in_deg
            rec["io"] = in_off
        else:
            rec = np.zeros(header.n, dtype=np.dtype([("od", "<u4"), ("oo", "<u8")], align=False))
            rec["od"] = out_deg
            rec["oo"] = out_off
        fh.write(rec.tobytes())
    with open(base + ".adj", "wb") as fh:
        fh.write(out_nbrs.tobytes())
    if header.directed:
        with open(base + ".iadj", "wb") as fh:
            fh.write(inn[2].tobytes())
    with open(base + ".ids", "w") as fh:
        fh.write("\n".join(str(x) for x in original))
        if original:
            fh.write("\n")


def ingest_edge_list(source: TextSource, out_base: str, directed: bool = False) -> GraphHandle:
    """Build the on-disk container from a whitespace-separated edge list.

    ``source`` may be a path, an open text file, or any iterable of lines.
    Lines starting with '#' and blank lines are skipped. Duplicate edges
    and self loops are dropped. Ids are remapped densely by first
    appearance and the remap table is written next to the graph.
    Single-threaded by design; returns an opened handle.
    """
    us, vs, original = _parse_edges(source)
    n = len(original)
    ua = np.asarray(us, dtype=np.int64)
    va = np.asarray(vs, dtype=np.int64)

    if directed:
        u, v = _dedup_pairs(ua, va, n)
        m = len(u)
        out = _csr_from_pairs(u, v, n)
        # in-lists: same arc set keyed by destination
        order = np.lexsort((u, v))
        inn = _csr_from_pairs(v[order], u[order], n)
        flags = FLAG_DIRECTED
    else:
        lo = np.minimum(ua, va)
        hi = np.maximum(ua, va)
        a, b = _dedup_pairs(lo, hi, n)
        m = len(a)
        both_u = np.concatenate([a, b])
        both_v = np.concatenate([b, a])
        order = np.lexsort((both_v, both_u))
        out = _csr_from_pairs(both_u[order], both_v[order], n)
        inn = None
        flags = 0

    header = GraphHeader(version=VERSION, n=n, m=m, flags=flags)
    _write_files(str(out_base), header, out, inn, original)
    return open_graph(out_base)


# ----------------------------------------------------------------------
# opening and validation
# ----------------------------------------------------------------------


def _read_header(base: str) -> GraphHeader:
    with open(base + ".gyh", "rb") as fh:
        blob = fh.read()
    if len(blob) < HEADER_SIZE or blob[:4] != MAGIC:
        raise BadMagicError(f"{base}.gyh does not look like a graph header")
    version, n, m, flags = _HEADER_TAIL.unpack(blob[8:HEADER_SIZE])
    if version != VERSION:
        raise BadVersionError(f"unsupported format version {version}")
    return GraphHeader(version=version, n=n, m=m, flags=flags)


def _validate_lists(deg, off, path, what):
    sizes = deg.astype(np.uint64) * np.uint64(8)
    if len(off) > 1:
        deltas = off[1:] - off[:-1]
        if np.any(off[1:] < off[:-1]):
            raise IndexConsistencyError(f"{what} offsets are not nondecreasing")
        if np.any(deltas != sizes[:-1]):
            raise IndexConsistencyError(f"{what} offset deltas disagree with degrees")
    if len(off):
        if off[0] != 0:
            raise IndexConsistencyError(f"{what} lists must start at offset 0")
        expected = int(off[-1] + sizes[-1])
    else:
        expected = 0
    actual = os.path.getsize(path)
    if actual != expected:
        raise IndexConsistencyError(
            f"{what} file is {actual} bytes, index requires {expected}"
        )


def open_graph(base: str) -> GraphHandle:
    """Open and validate a stored graph. The handle is immutable."""
    base = str(base)
    header = _read_header(base)
    rec_size = 24 if header.directed else 12
    index_bytes = os.path.getsize(base + ".gyi")
    if index_bytes < header.n * rec_size:
        raise TruncatedIndexError(
            f"index holds {index_bytes} bytes, need {header.n * rec_size}"
        )
    if index_bytes != header.n * rec_size:
        raise IndexConsistencyError(
            f"index is {index_bytes} bytes, expected exactly {header.n * rec_size}"
        )
    if header.directed:
        dt = np.dtype([("od", "<u4"), ("oo", "<u8"), ("id", "<u4"), ("io", "<u8")], align=False)
        rec = np.fromfile(base + ".gyi", dtype=dt)
        index = VertexIndex(
            rec["od"].astype(np.uint32),
            rec["oo"].astype(np.uint64),
            rec["id"].astype(np.uint32),
            rec["io"].astype(np.uint64),
        )
    else:
        dt = np.dtype([("od", "<u4"), ("oo", "<u8")], align=False)
        rec = np.fromfile(base + ".gyi", dtype=dt)
        index = VertexIndex(rec["od"].astype(np.uint32), rec["oo"].astype(np.uint64))

    _validate_lists(index.out_deg, index.out_off, base + ".adj", "out-adjacency")
    out_sum = int(index.out_deg.sum())
    if header.directed:
        _validate_lists(index.in_deg, index.in_off, base + ".iadj", "in-adjacency")
        in_sum = int(index.in_deg.sum())
        if out_sum != header.m or in_sum != header.m:
            raise IndexConsistencyError(
                f"degree sums ({out_sum} out, {in_sum} in) disagree with m={header.m}"
            )
    else:
        if out_sum != 2 * header.m:
            raise IndexConsistencyError(
                f"degree sum {out_sum} disagrees with 2*m={2 * header.m}"
            )
    return GraphHandle(base, header, index)
