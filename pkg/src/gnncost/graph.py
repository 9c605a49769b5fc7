"""Immutable CSR graph topology, ingestion, and synthetic generators.

The graph store is intentionally minimal: offsets/targets arrays plus
train/val/test id lists. Feature values are never materialized; the cost
model only needs feature *widths*, which live in the dataset metadata.

Adjacency semantics: row v holds the targets of the edges that were read
as "v dst". Cost accounting assumes symmetrized (undirected) graphs, where
a row is simultaneously the in- and out-neighborhood.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from . import rng

_MAX_ID = (1 << 62)  # ids must fit int64 with headroom for n*n keying


class ParseError(ValueError):
    """Malformed edge-list or mask line; message carries the line number."""


class IdRangeError(ValueError):
    """Vertex id negative or too large for the dense-id representation."""


class FormatError(ValueError):
    """Binary graph stream with bad magic, truncation, or broken invariants."""


@dataclass(frozen=True)
class DatasetMeta:
    """Expected dataset statistics used to validate an ingested graph.

    Counts refer to the symmetrized, deduplicated, self-loop-free form of
    the upstream release. feature_dim is the input feature width d0 and is
    carried for cost configuration, not validated against topology.
    """

    name: str
    expected_n: Optional[int] = None
    expected_m: Optional[int] = None
    feature_dim: Optional[int] = None
    num_classes: Optional[int] = None

    def __post_init__(self):
        for fname in ("expected_n", "expected_m"):
            v = getattr(self, fname)
            if v is not None and v <= 0:
                raise ValueError(f"{fname} must be positive when provided")


# Upstream-exact counts for the datasets the CLI knows by name. The
# published summary tables round these (and for some datasets count edges
# under a different convention); validation always compares against the
# exact counts below with the stated tolerance.
DATASET_PRESETS = {
    "pubmed": DatasetMeta("pubmed", expected_n=19717, expected_m=88648,
                          feature_dim=500, num_classes=3),
    "ogbn-arxiv": DatasetMeta("ogbn-arxiv", expected_n=169343, expected_m=None,
                              feature_dim=128, num_classes=40),
}


@dataclass(frozen=True)
class VertexSet:
    """Sorted, deduplicated vertex id list with a split role tag."""

    ids: np.ndarray
    role: str = "generic"

    _ROLES = ("train", "val", "test", "seed", "generic")

    def __post_init__(self):
        ids = np.asarray(self.ids, dtype=np.int64)
        if ids.ndim != 1:
            raise ValueError("vertex ids must be one-dimensional")
        if ids.size and (np.any(np.diff(ids) <= 0) or ids[0] < 0):
            ids = np.unique(ids)
            if ids.size and ids[0] < 0:
                raise ValueError("vertex ids must be nonnegative")
        object.__setattr__(self, "ids", ids)
        self.ids.flags.writeable = False
        if self.role not in self._ROLES:
            raise ValueError(f"unknown role {self.role!r}")

    def __len__(self) -> int:
        return int(self.ids.size)

    def check_range(self, n: int) -> None:
        if self.ids.size and self.ids[-1] >= n:
            raise ValueError(f"vertex id {int(self.ids[-1])} out of range for n={n}")


@dataclass(frozen=True)
class CsrGraph:
    """Compressed sparse row graph over dense 0-based vertex ids.

    n: vertex count, m: directed edge count. offsets has length n+1,
    targets has length m and is strictly ascending within each row
    (duplicates and self-loops are removed by every constructor).
    """

    n: int
    m: int
    offsets: np.ndarray
    targets: np.ndarray
    directed_flag: bool = False
    train: Optional[VertexSet] = None
    val: Optional[VertexSet] = None
    test: Optional[VertexSet] = None

    def __post_init__(self):
        object.__setattr__(self, "offsets", np.asarray(self.offsets, dtype=np.int64))
        object.__setattr__(self, "targets", np.asarray(self.targets, dtype=np.int64))
        self.offsets.flags.writeable = False
        self.targets.flags.writeable = False
        self.validate()

    def validate(self) -> None:
        n, m = self.n, self.m
        if n < 0 or m < 0:
            raise ValueError("negative vertex or edge count")
        if self.offsets.shape != (n + 1,):
            raise ValueError(f"offsets length {self.offsets.size} != n+1 = {n + 1}")
        if self.targets.shape != (m,):
            raise ValueError(f"targets length {self.targets.size} != m = {m}")
        if n == 0:
            if m != 0 or self.offsets[0] != 0:
                raise ValueError("empty graph must have m=0")
            return
        if self.offsets[0] != 0 or self.offsets[n] != m:
            raise ValueError("offsets must start at 0 and end at m")
        if np.any(np.diff(self.offsets) < 0):
            raise ValueError("offsets must be nondecreasing")
        if m:
            if self.targets.min() < 0 or self.targets.max() >= n:
                raise ValueError("edge target out of range")
            # strictly ascending inside each row (sorted + dedup)
            inner = np.ones(m, dtype=bool)
            starts = self.offsets[:-1]
            inner[starts[starts < m]] = False
            if np.any(np.diff(self.targets)[inner[1:]] <= 0):
                raise ValueError("row adjacency must be sorted and deduplicated")
        for vs in (self.train, self.val, self.test):
            if vs is not None:
                vs.check_range(n)

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.offsets)

    def neighbors(self, v: int) -> np.ndarray:
        return self.targets[self.offsets[v]:self.offsets[v + 1]]

    def structurally_equal(self, other: "CsrGraph") -> bool:
        return (self.n == other.n and self.m == other.m
                and np.array_equal(self.offsets, other.offsets)
                and np.array_equal(self.targets, other.targets))

    def with_masks(self, train=None, val=None, test=None) -> "CsrGraph":
        return CsrGraph(self.n, self.m, self.offsets, self.targets,
                        self.directed_flag,
                        train if train is not None else self.train,
                        val if val is not None else self.val,
                        test if test is not None else self.test)


def row_ranges(offsets: np.ndarray, vertices: np.ndarray,
               counts: np.ndarray) -> np.ndarray:
    """Concatenated index ranges offsets[v] .. offsets[v]+counts for each v.

    The workhorse for gathering the adjacency of a whole vertex frontier in
    one indexing operation; zero-count vertices contribute nothing.
    """
    nz = counts > 0
    vertices, counts = vertices[nz], counts[nz]
    total = int(counts.sum())
    if total == 0:
        return np.zeros(0, dtype=np.int64)
    starts = offsets[vertices]
    out = np.ones(total, dtype=np.int64)
    ends = np.cumsum(counts)
    out[0] = starts[0]
    out[ends[:-1]] = starts[1:] - (starts[:-1] + counts[:-1] - 1)
    return np.cumsum(out)


def _csr_from_pairs(src: np.ndarray, dst: np.ndarray, n: int,
                    symmetrize: bool) -> tuple[np.ndarray, np.ndarray, int]:
    """Dedup, drop self-loops, optionally symmetrize, and sort into CSR."""
    if symmetrize and src.size:
        src, dst = np.concatenate([src, dst]), np.concatenate([dst, src])
    keep = src != dst
    src, dst = src[keep], dst[keep]
    if src.size == 0:
        return np.zeros(n + 1, dtype=np.int64), np.zeros(0, dtype=np.int64), 0
    if n > (1 << 31):
        raise IdRangeError(f"graph too large for dense keying: n={n}")
    key = np.unique(src.astype(np.uint64) * np.uint64(n) + dst.astype(np.uint64))
    src = (key // np.uint64(n)).astype(np.int64)
    dst = (key % np.uint64(n)).astype(np.int64)
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=offsets[1:])
    return offsets, dst, int(dst.size)


def ingest_edge_list(lines: Iterable[str], symmetrize: bool = True,
                     meta: Optional[DatasetMeta] = None) -> CsrGraph:
    """Build a CsrGraph from "src dst" text lines.

    Lines starting with '#' and blank lines are ignored. Duplicate edges
    and self-loops are dropped; with symmetrize every (u,v) also yields
    (v,u). n is 1 + the largest id seen, or meta.expected_n if larger.

    Raises ParseError (with line number) on malformed lines and
    IdRangeError on negative or oversized ids.
    """
    src: list[int] = []
    dst: list[int] = []
    for lineno, line in enumerate(lines, 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        parts = s.split()
        if len(parts) != 2:
            raise ParseError(f"line {lineno}: expected two tokens, got {len(parts)}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"line {lineno}: non-integer vertex id") from None
        if u < 0 or v < 0:
            raise IdRangeError(f"line {lineno}: negative vertex id")
        if u >= _MAX_ID or v >= _MAX_ID:
            raise IdRangeError(f"line {lineno}: vertex id exceeds supported range")
        src.append(u)
        dst.append(v)

    n = 0
    if src:
        n = 1 + max(max(src), max(dst))
    if meta is not None and meta.expected_n is not None:
        n = max(n, meta.expected_n)
    srcs = np.asarray(src, dtype=np.int64)
    dsts = np.asarray(dst, dtype=np.int64)
    offsets, targets, m = _csr_from_pairs(srcs, dsts, n, symmetrize)
    return CsrGraph(n, m, offsets, targets, directed_flag=not symmetrize)


def load_edge_list(path, symmetrize: bool = True,
                   meta: Optional[DatasetMeta] = None) -> CsrGraph:
    with open(path, "r", encoding="ascii") as f:
        return ingest_edge_list(f, symmetrize=symmetrize, meta=meta)


_MAGIC = b"GCSR"
_VERSION = 1


def save_binary_csr(graph: CsrGraph, stream) -> None:
    """Write the little-endian GCSR binary image of `graph` to `stream`."""
    stream.write(_MAGIC)
    stream.write(bytes([_VERSION, 0, 0, 0]))
    stream.write(struct.pack("<QQ", graph.n, graph.m))
    stream.write(graph.offsets.astype("<u8").tobytes())
    stream.write(graph.targets.astype("<u8").tobytes())


def load_binary_csr(stream) -> CsrGraph:
    """Read a GCSR binary image; inverse of save_binary_csr.

    Raises FormatError on bad magic, truncation, trailing bytes, or any
    CSR invariant violation in the decoded arrays.
    """
    head = stream.read(8)
    if len(head) < 8 or head[:4] != _MAGIC:
        raise FormatError("bad magic; not a GCSR stream")
    if head[4] != _VERSION:
        raise FormatError(f"unsupported GCSR version {head[4]}")
    counts = stream.read(16)
    if len(counts) < 16:
        raise FormatError("truncated GCSR stream (header)")
    n, m = struct.unpack("<QQ", counts)
    if n >= _MAX_ID or m >= _MAX_ID:
        raise FormatError("GCSR counts out of supported range")
    body = stream.read()
    want = 8 * (n + 1) + 8 * m
    if len(body) < want:
        raise FormatError("truncated GCSR stream (arrays)")
    if len(body) > want:
        raise FormatError("trailing bytes after GCSR arrays")
    offsets = np.frombuffer(body, dtype="<u8", count=n + 1).astype(np.int64)
    targets = np.frombuffer(body, dtype="<u8", offset=8 * (n + 1), count=m).astype(np.int64)
    try:
        return CsrGraph(int(n), int(m), offsets, targets)
    except ValueError as e:
        raise FormatError(f"GCSR invariant violation: {e}") from None


def save_binary_csr_file(graph: CsrGraph, path) -> None:
    with open(path, "wb") as f:
        save_binary_csr(graph, f)


def load_binary_csr_file(path) -> CsrGraph:
    with open(path, "rb") as f:
        return load_binary_csr(f)


def _topup_pairs(n: int, target: int, draw_endpoint, seed: int) -> np.ndarray:
    """Collect exactly `target` distinct undirected pairs, deterministically.

    draw_endpoint(key, count) -> int64 array of vertex ids. Each round draws
    a batch of candidate pairs; new distinct pairs are kept in draw order so
    the truncation to `target` is unbiased.
    """
    have = np.zeros(0, dtype=np.uint64)
    for rnd in range(64):
        need = target - have.size
        if need <= 0:
            break
        batch = need + need // 4 + 16
        a = draw_endpoint(rng.fold(seed, rnd, 0), batch)
        b = draw_endpoint(rng.fold(seed, rnd, 1), batch)
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        ok = lo != hi
        cand = lo[ok].astype(np.uint64) * np.uint64(n) + hi[ok].astype(np.uint64)
        # dedup within the round, preserving draw order
        uniq, first = np.unique(cand, return_index=True)
        new = ~np.isin(uniq, have, assume_unique=True)
        fresh, order = uniq[new], np.argsort(first[new], kind="stable")
        have = np.union1d(have, fresh[order][:need])
    if have.size != target:
        raise ValueError("synthetic generator failed to reach target edge count")
    return have


def generate_synthetic(kind: str, n: int, avg_degree: float, seed: int) -> CsrGraph:
    """Deterministic symmetrized random graph with a fixed edge budget.

    kind "erdos_renyi" draws endpoints uniformly; "power_law" draws them
    with heavy-tailed weights (Chung-Lu style), so low-id vertices become
    hubs. Exactly round(n*avg_degree/2) distinct undirected pairs are kept,
    hence m = n*avg_degree up to rounding.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    if avg_degree < 0:
        raise ValueError("avg_degree must be nonnegative")
    target = int(round(n * avg_degree / 2))
    capacity = n * (n - 1) // 2
    if target > capacity:
        raise ValueError(f"requested {target} edges exceeds capacity {capacity}")
    kind_tag = {"erdos_renyi": 1, "power_law": 2}.get(kind)
    if kind_tag is None:
        raise ValueError(f"unknown synthetic kind {kind!r}")
    root = rng.fold(0x53594E54, kind_tag, n, int(avg_degree * 1024), seed)

    if kind == "erdos_renyi":
        def draw(key, count):
            return rng.randints(key, count, n)
    elif kind == "power_law":
        weights = (np.arange(1, n + 1, dtype=np.float64)) ** -0.75
        cdf = np.cumsum(weights)
        cdf /= cdf[-1]

        def draw(key, count):
            u = rng.uniform01(rng.hash_array(key, np.arange(count, dtype=np.uint64)))
            return np.searchsorted(cdf, u).astype(np.int64)

    if target == 0:
        return CsrGraph(n, 0, np.zeros(n + 1, dtype=np.int64), np.zeros(0, dtype=np.int64))
    keys = _topup_pairs(n, target, draw, root)
    lo = (keys // np.uint64(n)).astype(np.int64)
    hi = (keys % np.uint64(n)).astype(np.int64)
    offsets, targets, m = _csr_from_pairs(lo, hi, n, symmetrize=True)
    return CsrGraph(n, m, offsets, targets)


@dataclass(frozen=True)
class MetaCheck:
    field: str
    expected: int
    observed: int
    ok: bool


@dataclass(frozen=True)
class MetaReport:
    checks: tuple[MetaCheck, ...]
    tolerance: float

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def lines(self) -> list[str]:
        out = []
        for c in self.checks:
            tag = "PASS" if c.ok else "FAIL"
            out.append(f"{tag} {c.field}: observed {c.observed} expected {c.expected} "
                       f"(tolerance {self.tolerance:.0%})")
        if not self.checks:
            out.append("PASS (no expected counts in metadata)")
        return out


def validate_against_meta(graph: CsrGraph, meta: DatasetMeta,
                          tolerance: float = 0.01) -> MetaReport:
    """Compare graph counts with expected metadata, within a rounding tolerance."""
    checks = []
    if meta.expected_n is not None:
        ok = abs(graph.n - meta.expected_n) <= tolerance * meta.expected_n
        checks.append(MetaCheck("n", meta.expected_n, graph.n, ok))
    if meta.expected_m is not None:
        ok = abs(graph.m - meta.expected_m) <= tolerance * meta.expected_m
        checks.append(MetaCheck("m", meta.expected_m, graph.m, ok))
    return MetaReport(tuple(checks), tolerance)


def load_mask(lines: Iterable[str], role: str, n: Optional[int] = None) -> VertexSet:
    """Read one vertex id per line into a VertexSet with the given role."""
    ids = []
    for lineno, line in enumerate(lines, 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        try:
            v = int(s)
        except ValueError:
            raise ParseError(f"line {lineno}: non-integer vertex id") from None
        if v < 0:
            raise IdRangeError(f"line {lineno}: negative vertex id")
        ids.append(v)
    vs = VertexSet(np.asarray(ids, dtype=np.int64), role=role)
    if n is not None:
        vs.check_range(n)
    return vs


def load_mask_file(path, role: str, n: Optional[int] = None) -> VertexSet:
    with open(path, "r", encoding="ascii") as f:
        return load_mask(f, role, n)


def synthetic_train_mask(n: int, fraction: float, seed: int) -> VertexSet:
    """Pseudo-random train split: vertex v is selected iff hash(seed, v) < fraction."""
    if not 0 < fraction <= 1:
        raise ValueError("train fraction must be in (0, 1]")
    u = rng.uniform01(rng.hash_array(rng.fold(0x4D41534B, seed), np.arange(n, dtype=np.uint64)))
    return VertexSet(np.nonzero(u < fraction)[0].astype(np.int64), role="train")
