"""K-way vertex partitions and boundary profiling.

The built-in partitioner is a streaming linear deterministic greedy: visit
vertices in BFS order from the highest-degree vertex and place each one on
the part that holds most of its already-placed neighbors, damped by how
full that part is. It needs no external solver and is fully deterministic;
partitions produced by external tools can be imported from the standard
one-part-id-per-line file format.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from . import rng
from .graph import CsrGraph, row_ranges


@dataclass(frozen=True)
class PartitionAssignment:
    """Vertex -> part map with a balance bound.

    max part size must stay within ceil((1+slack) * n / k); imports that
    are trusted for sizes use slack=inf and are only range-checked.
    """

    part_of: np.ndarray
    k: int
    slack: float = 0.05

    def __post_init__(self):
        object.__setattr__(self, "part_of", np.asarray(self.part_of, dtype=np.int32))
        self.part_of.flags.writeable = False
        if self.k < 1:
            raise ValueError("k must be >= 1")
        n = self.n
        if n:
            lo, hi = int(self.part_of.min()), int(self.part_of.max())
            if lo < 0 or hi >= self.k:
                raise ValueError(f"part id out of range [0, {self.k})")
        if math.isfinite(self.slack):
            cap = capacity(n, self.k, self.slack)
            sizes = self.sizes()
            if sizes.size and int(sizes.max()) > cap:
                raise ValueError(f"part size {int(sizes.max())} exceeds capacity {cap}")

    @property
    def n(self) -> int:
        return int(self.part_of.size)

    def sizes(self) -> np.ndarray:
        return np.bincount(self.part_of, minlength=self.k)


@dataclass(frozen=True)
class BoundaryProfile:
    """Per-part remote in-neighbor counts plus the global edge cut.

    remote_in_count[w] is the number of distinct vertices outside part w
    that have at least one edge into part w (counted once per destination
    part, however many local neighbors they touch). edge_cut counts
    undirected crossing edges; halo_total is the sum of remote counts.
    """

    remote_in_count: np.ndarray
    edge_cut: int
    halo_total: int
    remote_in_sets: Optional[tuple[np.ndarray, ...]] = None


def capacity(n: int, k: int, slack: float) -> int:
    if not math.isfinite(slack):
        return n
    return math.ceil((1.0 + slack) * n / k)


def bfs_order(graph: CsrGraph) -> np.ndarray:
    """Level-order BFS visit sequence, restarting at the unvisited vertex of
    highest degree (ties to the lowest id); within a level ids ascend."""
    n = graph.n
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    by_degree = np.lexsort((np.arange(n), -graph.degrees))
    visited = np.zeros(n, dtype=bool)
    order = np.empty(n, dtype=np.int64)
    filled = 0
    cursor = 0
    while filled < n:
        while visited[by_degree[cursor]]:
            cursor += 1
        frontier = np.array([by_degree[cursor]], dtype=np.int64)
        visited[frontier] = True
        while frontier.size:
            order[filled:filled + frontier.size] = frontier
            filled += frontier.size
            counts = graph.degrees[frontier]
            nbrs = graph.targets[row_ranges(graph.offsets, frontier, counts)]
            nbrs = np.unique(nbrs)
            nbrs = nbrs[~visited[nbrs]]
            visited[nbrs] = True
            frontier = nbrs
    return order


def partition_streaming(graph: CsrGraph, k: int, slack: float = 0.05,
                        seed: int = 0) -> PartitionAssignment:
    """Streaming greedy k-way partition (deterministic; `seed` is accepted
    for interface symmetry with the random baseline but unused).

    Each vertex v, visited in BFS order, goes to the part maximizing
    |assigned_neighbors(v) in part| * (1 - size/capacity), skipping full
    parts; ties break toward the lowest part id.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    n = graph.n
    if k > n:
        raise ValueError(f"k={k} exceeds vertex count {n}")
    if slack < 0:
        raise ValueError("slack must be nonnegative")
    part_of = np.full(n, -1, dtype=np.int64)
    if k == 1:
        return PartitionAssignment(np.zeros(n, dtype=np.int32), 1, slack)
    cap = capacity(n, k, slack)
    sizes = np.zeros(k, dtype=np.int64)
    offsets, targets = graph.offsets, graph.targets
    for v in bfs_order(graph):
        nbr_parts = part_of[targets[offsets[v]:offsets[v + 1]]]
        nbr_parts = nbr_parts[nbr_parts >= 0]
        gain = np.bincount(nbr_parts, minlength=k).astype(np.float64)
        score = gain * (1.0 - sizes / cap)
        score[sizes >= cap] = -1.0
        w = int(np.argmax(score))  # argmax takes the lowest index on ties
        part_of[v] = w
        sizes[w] += 1
    return PartitionAssignment(part_of, k, slack)


def random_partition_baseline(graph: CsrGraph, k: int, seed: int) -> PartitionAssignment:
    """Uniform random balanced assignment: shuffle vertices, deal round-robin."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > graph.n:
        raise ValueError(f"k={k} exceeds vertex count {graph.n}")
    perm = rng.permutation(rng.fold(0x52414E44, seed), np.arange(graph.n, dtype=np.int64))
    part_of = np.empty(graph.n, dtype=np.int32)
    part_of[perm] = np.arange(graph.n, dtype=np.int64) % k
    return PartitionAssignment(part_of, k, slack=0.0)


def import_partition(lines: Iterable[str], n: int, k: int) -> PartitionAssignment:
    """Read a one-part-id-per-line partition file (line i = part of vertex i).

    Sizes are trusted (slack=inf); ids are validated against [0, k).
    """
    parts = np.empty(n, dtype=np.int64)
    count = 0
    for lineno, line in enumerate(lines, 1):
        s = line.strip()
        if not s:
            continue
        if count >= n:
            raise ValueError(f"line {lineno}: more than n={n} part ids")
        try:
            p = int(s)
        except ValueError:
            raise ValueError(f"line {lineno}: non-integer part id") from None
        if not 0 <= p < k:
            raise ValueError(f"line {lineno}: part id {p} out of range [0, {k})")
        parts[count] = p
        count += 1
    if count != n:
        raise ValueError(f"expected {n} part ids, found {count}")
    return PartitionAssignment(parts, k, slack=math.inf)


def import_partition_file(path, n: int, k: int) -> PartitionAssignment:
    with open(path, "r", encoding="ascii") as f:
        return import_partition(f, n, k)


def save_partition(assignment: PartitionAssignment, stream) -> None:
    for p in assignment.part_of:
        stream.write(f"{int(p)}\n")


def boundary_profile(graph: CsrGraph, assignment: PartitionAssignment,
                     keep_sets: bool = False) -> BoundaryProfile:
    """Remote in-neighbor sets, per part, plus the undirected edge cut.

    An edge (u -> v) with part(u) != part(v) makes u a remote in-neighbor
    of part(v); each such u is counted once per destination part.
    """
    if assignment.n != graph.n:
        raise ValueError("assignment does not cover this graph")
    k, n, m = assignment.k, graph.n, graph.m
    if m == 0 or k == 1:
        counts = np.zeros(k, dtype=np.int64)
        sets = tuple(np.zeros(0, dtype=np.int64) for _ in range(k)) if keep_sets else None
        return BoundaryProfile(counts, 0, 0, sets)
    part = assignment.part_of.astype(np.int64)
    src = np.repeat(np.arange(n, dtype=np.int64), graph.degrees)
    dst = graph.targets
    crossing = part[src] != part[dst]
    csrc, cdst = src[crossing], dst[crossing]
    # unique (destination part, source vertex) pairs
    pair = np.unique(part[cdst].astype(np.uint64) * np.uint64(n) + csrc.astype(np.uint64))
    pair_part = (pair // np.uint64(n)).astype(np.int64)
    counts = np.bincount(pair_part, minlength=k)
    lo, hi = np.minimum(csrc, cdst), np.maximum(csrc, cdst)
    edge_cut = int(np.unique(lo.astype(np.uint64) * np.uint64(n) + hi.astype(np.uint64)).size)
    sets = None
    if keep_sets:
        remote = (pair % np.uint64(n)).astype(np.int64)
        splits = np.searchsorted(pair_part, np.arange(1, k))
        sets = tuple(np.sort(chunk) for chunk in np.split(remote, splits))
    return BoundaryProfile(counts, edge_cut, int(counts.sum()), sets)
