"""Mini-batch construction: epoch planning and the three samplers.

Only topology and counts are produced; no features are gathered. A
micro-batch records, per GNN layer, how many vertices and edges the layer
would process, which is exactly what the cost model consumes.

Layer indexing follows the compute direction: index L = seed vertices,
index 0 = input frontier. layer_edges[i] counts the sampled edges between
layer i sources and layer i+1 destinations.

All sampling is without replacement and capped at the vertex degree.
Random choices are keyed deterministic draws (see rng module): neighbor
selection for vertex v during (epoch, iteration, worker) at a given layer
depends only on that key, never on scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import rng
from .graph import CsrGraph, VertexSet, row_ranges
from .partition import PartitionAssignment, partition_streaming

NS_DOMAIN = 0x4E53  # neighbor draws
PLAN_DOMAIN = 0x504C  # epoch shuffles
CLUSTER_DOMAIN = 0x434C  # cluster picks
SAINT_DOMAIN = 0x5341  # saint node/walk draws


@dataclass(frozen=True)
class ModelArch:
    """GNN architecture parameters that the cost formulas read.

    dims has length L+1: input width first, class count last. fanouts (one
    per layer, mini-batch only) cap how many in-neighbors a vertex draws.
    eta is the backward-pass cost multiplier entering as (1 + eta).
    """

    kind: str  # graphsage | gcn | gat
    dims: tuple[int, ...]
    heads: int = 1
    aggregator: str = "mean"  # graphsage only: mean | gcn | pool
    fanouts: Optional[tuple[int, ...]] = None
    eta: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if self.fanouts is not None:
            object.__setattr__(self, "fanouts", tuple(int(f) for f in self.fanouts))
        if self.kind not in ("graphsage", "gcn", "gat"):
            raise ValueError(f"unknown model kind {self.kind!r}")
        if len(self.dims) < 2:
            raise ValueError("dims must hold at least input and output widths")
        if any(d < 1 for d in self.dims):
            raise ValueError("all layer widths must be >= 1")
        if self.kind == "gat":
            if self.heads < 1:
                raise ValueError("gat requires heads >= 1")
        elif self.heads != 1:
            raise ValueError("heads is a gat-only parameter")
        if self.kind == "graphsage" and self.aggregator not in ("mean", "gcn", "pool"):
            raise ValueError(f"unknown graphsage aggregator {self.aggregator!r}")
        if self.fanouts is not None:
            if len(self.fanouts) != self.layers:
                raise ValueError("fanouts must have one entry per layer")
            if any(f < 0 for f in self.fanouts):
                raise ValueError("fanouts must be nonnegative")
        if self.eta < 0:
            raise ValueError("eta must be nonnegative")

    @property
    def layers(self) -> int:
        return len(self.dims) - 1


@dataclass(frozen=True)
class MicroBatch:
    """Per-layer vertex/edge counts for one (iteration, worker) batch.

    kind "neighborhood" batches shrink toward the seeds; "subgraph"
    batches (cluster and saint samplers) run every layer on the same
    induced subgraph, so all their per-layer counts coincide.
    """

    worker: int
    iteration: int
    layer_vertices: tuple[int, ...]
    layer_edges: tuple[int, ...]
    input_frontier: VertexSet
    kind: str = "neighborhood"

    def __post_init__(self):
        if len(self.layer_vertices) != len(self.layer_edges) + 1:
            raise ValueError("layer_vertices must be one longer than layer_edges")
        if any(c < 0 for c in self.layer_vertices + self.layer_edges):
            raise ValueError("negative layer count")
        if self.layer_vertices[0] != len(self.input_frontier):
            raise ValueError("layer_vertices[0] must match the input frontier size")
        if self.kind == "subgraph":
            if len(set(self.layer_vertices)) > 1 or len(set(self.layer_edges)) > 1:
                raise ValueError("subgraph batches must have uniform layer counts")

    @property
    def layers(self) -> int:
        return len(self.layer_edges)


@dataclass(frozen=True)
class EpochPlan:
    """Deterministic assignment of shuffled train vertices to seed sets.

    seeds[i][w] is the seed VertexSet of worker w at iteration i; sets
    within an iteration are disjoint and every train vertex seeds exactly
    once per epoch.
    """

    iterations: int
    workers: int
    global_batch: int
    rng_root: int
    seeds: tuple[tuple[VertexSet, ...], ...]

    def validate(self, train: VertexSet) -> None:
        chunks = [s.ids for it in self.seeds for s in it]
        allids = np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.int64)
        if np.unique(allids).size != allids.size:
            raise ValueError("seed sets overlap")
        if not np.array_equal(np.sort(allids), train.ids):
            raise ValueError("seed sets do not cover the train set")


def plan_epoch(train: VertexSet, batch_size: int, workers: int,
               rng_root: int) -> EpochPlan:
    """Shuffle the train set, cut it into batches, deal each batch
    round-robin to the workers. The last iteration may be smaller."""
    if len(train) == 0:
        raise ValueError("train set is empty")
    if workers < 1 or batch_size < workers:
        raise ValueError("need batch_size >= workers >= 1")
    shuffled = rng.permutation(rng.fold(PLAN_DOMAIN, rng_root), train.ids)
    iterations = -(-len(train) // batch_size)
    seeds = []
    for i in range(iterations):
        batch = shuffled[i * batch_size:(i + 1) * batch_size]
        seeds.append(tuple(VertexSet(batch[w::workers], role="seed")
                           for w in range(workers)))
    plan = EpochPlan(iterations, workers, batch_size, rng_root, tuple(seeds))
    plan.validate(train)
    return plan


def _batch_key(rng_root: int, epoch: int, iteration: int, worker: int) -> tuple[int, ...]:
    return (rng_root, epoch, iteration, worker)


def _sample_in_neighbors(graph: CsrGraph, frontier: np.ndarray, fanout: int,
                         layer: int, stream_key: tuple[int, ...]):
    """Draw min(degree, fanout) distinct neighbors for every frontier vertex.

    Selection takes the fanout smallest keyed hash priorities over each
    vertex's adjacency slots, which is a uniform without-replacement draw
    and depends only on (stream_key, layer, vertex, slot).

    Returns (sampled vertex ids with duplicates across sources, edge count).
    """
    deg = graph.degrees[frontier]
    take = np.minimum(deg, fanout)
    edge_count = int(take.sum())
    if edge_count == 0:
        return np.zeros(0, dtype=np.int64), 0

    full = deg <= fanout
    picked = [graph.targets[row_ranges(graph.offsets, frontier[full], deg[full])]]

    sub = ~full
    if np.any(sub):
        verts = frontier[sub]
        degs = deg[sub]
        pos = row_ranges(graph.offsets, verts, degs)
        seg = np.repeat(np.arange(verts.size, dtype=np.int64), degs)
        slot = pos - np.repeat(graph.offsets[verts], degs)
        key = rng.fold(NS_DOMAIN, *stream_key, layer)
        pri = rng.hash_array(key, np.repeat(verts, degs), slot)
        order = np.lexsort((pri, seg))
        seg_starts = np.zeros(verts.size, dtype=np.int64)
        np.cumsum(degs[:-1], out=seg_starts[1:])
        rank = np.arange(seg.size, dtype=np.int64) - np.repeat(seg_starts, degs)
        chosen = order[rank < fanout]
        picked.append(graph.targets[pos[chosen]])
    return np.concatenate(picked), edge_count


def neighborhood_sample(graph: CsrGraph, seeds: VertexSet,
                        fanouts: Sequence[int], stream_key: tuple[int, ...],
                        worker: int = 0, iteration: int = 0) -> MicroBatch:
    """Layered neighbor expansion from the seeds down to the input frontier.

    At layer l the frontier vertices each draw up to fanouts[l-1] distinct
    in-neighbors; the next frontier is the union of the current one (a
    vertex always keeps its own previous-layer feature) and the draws.
    layer_edges counts sampled (neighbor -> vertex) pairs before the union.
    """
    if len(seeds) == 0:
        raise ValueError("seeds must be nonempty")
    fanouts = tuple(int(f) for f in fanouts)
    layers = len(fanouts)
    frontier = seeds.ids
    layer_vertices = [0] * (layers + 1)
    layer_edges = [0] * layers
    layer_vertices[layers] = frontier.size
    for l in range(layers, 0, -1):
        sampled, edge_count = _sample_in_neighbors(
            graph, frontier, fanouts[l - 1], l, stream_key)
        layer_edges[l - 1] = edge_count
        if sampled.size:
            frontier = np.unique(np.concatenate([frontier, sampled]))
        layer_vertices[l - 1] = frontier.size
    return MicroBatch(worker, iteration, tuple(layer_vertices), tuple(layer_edges),
                      VertexSet(frontier), kind="neighborhood")


def _induced_edge_count(graph: CsrGraph, members: np.ndarray) -> int:
    """Directed edges of the subgraph induced by a sorted member array."""
    if members.size == 0:
        return 0
    inside = np.zeros(graph.n, dtype=bool)
    inside[members] = True
    nbrs = graph.targets[row_ranges(graph.offsets, members, graph.degrees[members])]
    return int(np.count_nonzero(inside[nbrs]))


def _subgraph_batch(graph: CsrGraph, members: np.ndarray, layers: int,
                    worker: int, iteration: int) -> MicroBatch:
    members = np.unique(members)
    edges = _induced_edge_count(graph, members)
    return MicroBatch(worker, iteration,
                      (int(members.size),) * (layers + 1), (edges,) * layers,
                      VertexSet(members), kind="subgraph")


def cluster_batch(graph: CsrGraph, clusters: PartitionAssignment, q: int,
                  stream_key: tuple[int, ...], layers: int = 1,
                  worker: int = 0, iteration: int = 0) -> MicroBatch:
    """Union of q uniformly drawn clusters with its induced subgraph."""
    if not 1 <= q <= clusters.k:
        raise ValueError(f"q must be in [1, {clusters.k}]")
    if clusters.n != graph.n:
        raise ValueError("cluster assignment does not cover this graph")
    key = rng.fold(CLUSTER_DOMAIN, *stream_key)
    chosen = rng.select_smallest(key, np.arange(clusters.k, dtype=np.int64), q)
    members = np.nonzero(np.isin(clusters.part_of, chosen))[0].astype(np.int64)
    return _subgraph_batch(graph, members, layers, worker, iteration)


def saint_node_sample(graph: CsrGraph, budget: int, stream_key: tuple[int, ...],
                      layers: int = 1, worker: int = 0,
                      iteration: int = 0) -> MicroBatch:
    """Degree-proportional without-replacement node sample, induced subgraph.

    Uses exponential race keys (-log(u)/degree), so inclusion probability is
    proportional to degree; zero-degree vertices are drawn only when the
    budget exceeds the number of positive-degree vertices.
    """
    if not 1 <= budget <= graph.n:
        raise ValueError(f"budget must be in [1, {graph.n}]")
    key = rng.fold(SAINT_DOMAIN, *stream_key, 0)
    ids = np.arange(graph.n, dtype=np.int64)
    u = rng.uniform01(rng.hash_array(key, ids))
    deg = graph.degrees.astype(np.float64)
    with np.errstate(divide="ignore"):
        race = np.where(deg > 0, -np.log(u) / np.maximum(deg, 1e-300), np.inf)
    order = np.lexsort((ids, race))
    members = order[:budget]
    return _subgraph_batch(graph, members, layers, worker, iteration)


def saint_walk_sample(graph: CsrGraph, roots: int, walk_len: int,
                      stream_key: tuple[int, ...], layers: int = 1,
                      worker: int = 0, iteration: int = 0) -> MicroBatch:
    """Random-walk sample: distinct uniform roots, each walking walk_len
    steps over out-edges (stopping at dead ends); batch = visited set."""
    if roots < 1:
        raise ValueError("roots must be >= 1")
    if roots > graph.n:
        raise ValueError(f"roots={roots} exceeds vertex count {graph.n}")
    if walk_len < 0:
        raise ValueError("walk_len must be nonnegative")
    key = rng.fold(SAINT_DOMAIN, *stream_key, 1)
    start = rng.select_smallest(key, np.arange(graph.n, dtype=np.int64), roots)
    visited = [start]
    current = start
    walker = np.arange(start.size, dtype=np.int64)
    for step in range(1, walk_len + 1):
        deg = graph.degrees[current]
        alive = deg > 0
        if not np.any(alive):
            break
        current, walker = current[alive], walker[alive]
        deg = deg[alive]
        stepkey = rng.fold(SAINT_DOMAIN, *stream_key, 2, step)
        pick = rng.hash_array(stepkey, walker) % deg.astype(np.uint64)
        current = graph.targets[graph.offsets[current] + pick.astype(np.int64)]
        visited.append(current)
    members = np.unique(np.concatenate(visited))
    return _subgraph_batch(graph, members, layers, worker, iteration)


@dataclass(frozen=True)
class SamplerConfig:
    """Which sampler to run per (iteration, worker) cell and its knobs."""

    algorithm: str = "neighborhood"  # neighborhood | cluster | saint_node | saint_walk
    batch_size: int = 1024
    rng_root: int = 0
    cluster_count: int = 32
    q: int = 1
    cluster_slack: float = 0.05
    budget: Optional[int] = None
    roots: Optional[int] = None
    walk_len: int = 2

    _ALGORITHMS = ("neighborhood", "cluster", "saint_node", "saint_walk")

    def __post_init__(self):
        if self.algorithm not in self._ALGORITHMS:
            raise ValueError(f"unknown sampler algorithm {self.algorithm!r}")


def sample_epoch(graph: CsrGraph, plan: EpochPlan, arch: ModelArch,
                 config: SamplerConfig, epoch: int = 0,
                 clusters: Optional[PartitionAssignment] = None) -> list[MicroBatch]:
    """One epoch of micro-batches, one per (iteration, worker) cell.

    Neighborhood sampling expands each cell's seed set (cells whose seed
    set is empty yield no batch); the subgraph samplers draw one subgraph
    per cell under their own rules. Batches are ordered by (iteration,
    worker) and are a pure function of (rng_root, epoch, config).
    """
    algo = config.algorithm
    if algo == "neighborhood":
        if arch.fanouts is None:
            raise ValueError("neighborhood sampling requires arch.fanouts")
    elif algo == "cluster" and clusters is None:
        clusters = partition_streaming(graph, config.cluster_count,
                                       config.cluster_slack, seed=plan.rng_root)
    batches = []
    for i in range(plan.iterations):
        for w in range(plan.workers):
            key = _batch_key(plan.rng_root, epoch, i, w)
            if algo == "neighborhood":
                seeds = plan.seeds[i][w]
                if len(seeds) == 0:
                    continue
                batches.append(neighborhood_sample(graph, seeds, arch.fanouts,
                                                   key, worker=w, iteration=i))
            elif algo == "cluster":
                batches.append(cluster_batch(graph, clusters, config.q, key,
                                             layers=arch.layers, worker=w, iteration=i))
            elif algo == "saint_node":
                if config.budget is None:
                    raise ValueError("saint_node requires a budget")
                batches.append(saint_node_sample(graph, config.budget, key,
                                                 layers=arch.layers, worker=w, iteration=i))
            else:
                if config.roots is None:
                    raise ValueError("saint_walk requires a root count")
                batches.append(saint_walk_sample(graph, config.roots, config.walk_len,
                                                 key, layers=arch.layers,
                                                 worker=w, iteration=i))
    return batches
