"""Communication and computation cost formulas for both training pipelines.

Full-graph training pays, per epoch and per layer, one feature vector for
every remote in-neighbor of every partition (gamma_fg), and processes every
vertex and edge of the graph at every layer (theta_fg). Mini-batch training
pays input-feature gathering for the non-local part of each micro-batch's
bottom frontier (gamma_mb) and processes the sampled per-layer counts
(theta_mb). Both compute costs carry a (1 + eta) backward-pass factor.

FLOP convention (one fused multiply-add = 2 FLOPs):

    gcn             edge 2*d_in            vertex 2*d_in*d_out
    graphsage mean  edge 2*d_in            vertex 4*d_in*d_out (self + neighbor weights)
    graphsage gcn   edge 2*d_in            vertex 2*d_in*d_out (single weight)
    graphsage pool  edge 2*d_in + 2*d_in^2 vertex 4*d_in*d_out
    gat             edge 4*heads*d_out + 5*heads (attention logits + activation)
                    vertex 2*d_in*heads*d_out    (shared projection)

Layer l (1-based) consumes width d_in = dims[l-1] and produces d_out =
dims[l]; the per-layer vertex cost is charged to the layer's source
frontier, whose features are the ones being transformed.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .graph import CsrGraph
from .partition import BoundaryProfile, PartitionAssignment, boundary_profile
from .sampling import EpochPlan, MicroBatch, ModelArch, SamplerConfig, sample_epoch


@dataclass(frozen=True)
class OptimizationKnobs:
    """Communication-side optimization knobs for the full-graph pipeline.

    boundary_sampling_rate: fraction of boundary vertices communicated per
    epoch. quantization_bits: message scalar width. overlap_fraction: share
    of communication hidden behind computation; reported as exposed volume,
    never applied to the transferred byte count.
    """

    boundary_sampling_rate: float = 1.0
    quantization_bits: int = 32
    overlap_fraction: float = 0.0

    def __post_init__(self):
        if not 0 < self.boundary_sampling_rate <= 1:
            raise ValueError("boundary_sampling_rate must be in (0, 1]")
        if self.quantization_bits not in (4, 8, 16, 32):
            raise ValueError("quantization_bits must be one of 4, 8, 16, 32")
        if not 0 <= self.overlap_fraction <= 1:
            raise ValueError("overlap_fraction must be in [0, 1]")

    @property
    def volume_scale(self) -> float:
        return self.boundary_sampling_rate * (self.quantization_bits / 32)


@dataclass(frozen=True)
class CostConfig:
    """Epoch counts, scalar width, and communicated feature widths.

    comm_dims lists the feature width communicated at each layer of the
    full-graph pipeline; when None it is derived from the architecture by
    comm_dims_mode: "input" charges the width each layer consumes
    (dims[l-1]), "output" the width it produces (dims[l]).
    """

    epochs_fg: int = 1
    epochs_mb: int = 1
    bytes_per_scalar: int = 4
    comm_dims: Optional[tuple[int, ...]] = None
    comm_dims_mode: str = "input"
    knobs: OptimizationKnobs = field(default_factory=OptimizationKnobs)

    def __post_init__(self):
        if self.epochs_fg < 1 or self.epochs_mb < 1:
            raise ValueError("epoch counts must be >= 1")
        if self.bytes_per_scalar not in (1, 2, 4, 8):
            raise ValueError("bytes_per_scalar must be one of 1, 2, 4, 8")
        if self.comm_dims_mode not in ("input", "output"):
            raise ValueError("comm_dims_mode must be 'input' or 'output'")
        if self.comm_dims is not None:
            object.__setattr__(self, "comm_dims", tuple(int(d) for d in self.comm_dims))
            if any(d < 1 for d in self.comm_dims):
                raise ValueError("comm_dims entries must be >= 1")

    def resolved_comm_dims(self, arch: ModelArch) -> tuple[int, ...]:
        if self.comm_dims is not None:
            if len(self.comm_dims) != arch.layers:
                raise ValueError("comm_dims must have one entry per layer")
            return self.comm_dims
        if self.comm_dims_mode == "input":
            return arch.dims[:-1]
        return arch.dims[1:]


def _backward_factor(eta: float):
    f = 1 + eta
    return int(f) if float(f).is_integer() else f


def flops_edge(arch: ModelArch, layer: int) -> int:
    """FLOPs to generate and aggregate one message over one edge at `layer`."""
    _check_layer(arch, layer)
    d_in, d_out = arch.dims[layer - 1], arch.dims[layer]
    if arch.kind == "gcn":
        return 2 * d_in
    if arch.kind == "graphsage":
        if arch.aggregator == "pool":
            return 2 * d_in + 2 * d_in * d_in
        return 2 * d_in
    # gat: per-edge attention logit over both projected endpoints + activation
    return 4 * arch.heads * d_out + 5 * arch.heads


def flops_vertex(arch: ModelArch, layer: int) -> int:
    """FLOPs to compute one vertex's new representation at `layer`."""
    _check_layer(arch, layer)
    d_in, d_out = arch.dims[layer - 1], arch.dims[layer]
    if arch.kind == "gcn":
        return 2 * d_in * d_out
    if arch.kind == "graphsage":
        if arch.aggregator == "gcn":
            return 2 * d_in * d_out
        return 4 * d_in * d_out
    return 2 * d_in * arch.heads * d_out


def _check_layer(arch: ModelArch, layer: int) -> None:
    if not 1 <= layer <= arch.layers:
        raise ValueError(f"layer must be in [1, {arch.layers}]")


def comm_cost_fg(profile: BoundaryProfile, config: CostConfig,
                 arch: ModelArch):
    """Full-graph communication volume in bytes, over epochs_fg epochs.

    Every layer moves one feature vector per remote in-neighbor of every
    part; boundary sampling and quantization scale the volume.
    """
    dims = config.resolved_comm_dims(arch)
    base = config.epochs_fg * int(profile.halo_total) * sum(dims) * config.bytes_per_scalar
    scale = config.knobs.volume_scale
    return base if scale == 1 else base * scale


def comm_cost_fg_by_layer(profile: BoundaryProfile, config: CostConfig,
                          arch: ModelArch) -> list:
    dims = config.resolved_comm_dims(arch)
    scale = config.knobs.volume_scale
    out = []
    for d in dims:
        base = config.epochs_fg * int(profile.halo_total) * d * config.bytes_per_scalar
        out.append(base if scale == 1 else base * scale)
    return out


def comm_cost_mb(batches: Sequence[MicroBatch], assignment: PartitionAssignment,
                 d0: int, config: CostConfig) -> int:
    """Mini-batch input-gathering volume in bytes, over epochs_mb epochs.

    Each batch pays d0 scalars for every bottom-frontier vertex outside its
    worker's own partition. The full-graph knobs do not apply here.
    """
    total = 0
    for b in batches:
        if b.worker >= assignment.k:
            raise ValueError(f"batch worker {b.worker} >= k={assignment.k}")
        ids = b.input_frontier.ids
        total += int(np.count_nonzero(assignment.part_of[ids] != b.worker))
    return config.epochs_mb * total * d0 * config.bytes_per_scalar


def compute_cost_fg(graph: CsrGraph, arch: ModelArch, config: CostConfig):
    """Full-graph training FLOPs over epochs_fg epochs: every layer
    processes all m edges and transforms all n vertex features."""
    if graph.n == 0:
        raise ValueError("graph is empty")
    per_epoch = sum(graph.m * flops_edge(arch, l) + graph.n * flops_vertex(arch, l)
                    for l in range(1, arch.layers + 1))
    return config.epochs_fg * per_epoch * _backward_factor(arch.eta)


def compute_cost_mb(batches: Sequence[MicroBatch], arch: ModelArch,
                    config: CostConfig):
    """Mini-batch training FLOPs over epochs_mb epochs, summed over the
    sampled per-layer counts of every micro-batch."""
    total = 0
    for b in batches:
        if b.layers != arch.layers:
            raise ValueError(f"batch has {b.layers} layers, arch has {arch.layers}")
        total += sum(b.layer_edges[l - 1] * flops_edge(arch, l)
                     + b.layer_vertices[l - 1] * flops_vertex(arch, l)
                     for l in range(1, arch.layers + 1))
    return config.epochs_mb * total * _backward_factor(arch.eta)


def sampling_work(batches: Sequence[MicroBatch]) -> int:
    """Abstract sampling op count for one epoch: every frontier vertex
    examined plus every neighbor drawn."""
    return sum(sum(b.layer_vertices) + sum(b.layer_edges) for b in batches)


@dataclass(frozen=True)
class CostReport:
    """All cost outputs for one configuration, with provenance echo.

    Ratios are None (JSON null, empty CSV cell) when their denominator is
    zero. gamma_fg_exposed annotates how much full-graph communication is
    left exposed after computation overlap; volumes are never reduced by it.
    """

    gamma_fg: float
    gamma_mb: int
    theta_fg: float
    theta_mb: float
    gamma_ratio: Optional[float]
    theta_ratio: Optional[float]
    gamma_fg_exposed: float
    sampling_work: int
    sampling_fraction: Optional[float]
    edge_cut: int
    halo_total: int
    breakdown: dict
    provenance: dict

    SCALAR_FIELDS = (
        "gamma_fg", "gamma_mb", "gamma_ratio", "gamma_fg_exposed",
        "theta_fg", "theta_mb", "theta_ratio",
        "sampling_work", "sampling_fraction", "edge_cut", "halo_total",
    )

    PROVENANCE_CSV_FIELDS = (
        "dataset", "n", "m", "k", "workers", "algorithm", "batch_size",
        "rng_root", "epochs_fg", "epochs_mb", "bytes_per_scalar",
        "comm_dims_mode", "boundary_sampling_rate", "quantization_bits",
        "overlap_fraction", "iterations", "num_batches",
    )

    def to_json_dict(self) -> dict:
        out = {name: getattr(self, name) for name in self.SCALAR_FIELDS}
        out["breakdown"] = self.breakdown
        out["provenance"] = self.provenance
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n"

    def csv_row(self) -> dict:
        row = {name: getattr(self, name) for name in self.SCALAR_FIELDS}
        for name in self.PROVENANCE_CSV_FIELDS:
            row[name] = self.provenance.get(name)
        return row

    @classmethod
    def csv_columns(cls) -> list[str]:
        return list(cls.PROVENANCE_CSV_FIELDS) + list(cls.SCALAR_FIELDS)


def reports_to_csv(reports: Sequence[CostReport]) -> str:
    cols = CostReport.csv_columns()
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    writer.writeheader()
    for r in reports:
        row = {k: ("" if v is None else v) for k, v in r.csv_row().items()}
        writer.writerow(row)
    return buf.getvalue()


def _ratio(num, den) -> Optional[float]:
    return None if den == 0 else num / den


def analyze(graph: CsrGraph, assignment: PartitionAssignment, arch: ModelArch,
            plan: EpochPlan, sampler: SamplerConfig, config: CostConfig,
            provenance: Optional[dict] = None) -> CostReport:
    """Run one sampled epoch and evaluate all four costs on the same
    hyperparameters, as one deterministic report."""
    if assignment.n != graph.n:
        raise ValueError("assignment does not cover this graph")
    if plan.workers != assignment.k:
        raise ValueError(f"plan workers {plan.workers} != partition k {assignment.k}")
    profile = boundary_profile(graph, assignment)
    batches = sample_epoch(graph, plan, arch, sampler)

    gamma_fg = comm_cost_fg(profile, config, arch)
    gamma_mb = comm_cost_mb(batches, assignment, arch.dims[0], config)
    theta_fg = compute_cost_fg(graph, arch, config)
    theta_mb = compute_cost_mb(batches, arch, config)
    work = sampling_work(batches)
    per_epoch_cfg = CostConfig(1, 1, config.bytes_per_scalar, config.comm_dims,
                               config.comm_dims_mode, config.knobs)
    theta_mb_epoch = compute_cost_mb(batches, arch, per_epoch_cfg)

    layers = arch.layers
    frontier_by_layer = [sum(b.layer_vertices[l] for b in batches)
                         for l in range(layers + 1)]
    edges_by_layer = [sum(b.layer_edges[l] for b in batches) for l in range(layers)]
    gamma_mb_by_worker = [0] * assignment.k
    theta_mb_by_worker = [0] * assignment.k
    gamma_mb_by_iteration = [0] * plan.iterations
    theta_mb_by_iteration = [0] * plan.iterations
    back = _backward_factor(arch.eta)
    for b in batches:
        ids = b.input_frontier.ids
        remote = int(np.count_nonzero(assignment.part_of[ids] != b.worker))
        gamma_term = config.epochs_mb * remote * arch.dims[0] * config.bytes_per_scalar
        theta_term = config.epochs_mb * back * sum(
            b.layer_edges[l - 1] * flops_edge(arch, l)
            + b.layer_vertices[l - 1] * flops_vertex(arch, l)
            for l in range(1, layers + 1))
        gamma_mb_by_worker[b.worker] += gamma_term
        theta_mb_by_worker[b.worker] += theta_term
        gamma_mb_by_iteration[b.iteration] += gamma_term
        theta_mb_by_iteration[b.iteration] += theta_term

    breakdown = {
        "gamma_fg_by_layer": comm_cost_fg_by_layer(profile, config, arch),
        "theta_fg_by_layer": [config.epochs_fg * back *
                              (graph.m * flops_edge(arch, l) + graph.n * flops_vertex(arch, l))
                              for l in range(1, layers + 1)],
        "gamma_mb_by_worker": gamma_mb_by_worker,
        "theta_mb_by_worker": theta_mb_by_worker,
        "gamma_mb_by_iteration": gamma_mb_by_iteration,
        "theta_mb_by_iteration": theta_mb_by_iteration,
        "remote_in_count_by_part": [int(c) for c in profile.remote_in_count],
        "frontier_vertices_by_layer": frontier_by_layer,
        "sampled_edges_by_layer": edges_by_layer,
    }
    prov = {
        "n": graph.n, "m": graph.m,
        "k": assignment.k, "workers": plan.workers,
        "algorithm": sampler.algorithm, "batch_size": plan.global_batch,
        "rng_root": plan.rng_root,
        "iterations": plan.iterations, "num_batches": len(batches),
        "epochs_fg": config.epochs_fg, "epochs_mb": config.epochs_mb,
        "bytes_per_scalar": config.bytes_per_scalar,
        "comm_dims_mode": config.comm_dims_mode,
        "comm_dims": list(config.resolved_comm_dims(arch)),
        "boundary_sampling_rate": config.knobs.boundary_sampling_rate,
        "quantization_bits": config.knobs.quantization_bits,
        "overlap_fraction": config.knobs.overlap_fraction,
        "arch": {"kind": arch.kind, "dims": list(arch.dims), "heads": arch.heads,
                 "aggregator": arch.aggregator,
                 "fanouts": list(arch.fanouts) if arch.fanouts is not None else None,
                 "eta": arch.eta},
        "sampler": {"algorithm": sampler.algorithm, "batch_size": sampler.batch_size,
                    "rng_root": sampler.rng_root, "cluster_count": sampler.cluster_count,
                    "q": sampler.q, "budget": sampler.budget, "roots": sampler.roots,
                    "walk_len": sampler.walk_len},
    }
    if provenance:
        prov.update(provenance)

    return CostReport(
        gamma_fg=gamma_fg,
        gamma_mb=gamma_mb,
        theta_fg=theta_fg,
        theta_mb=theta_mb,
        gamma_ratio=_ratio(gamma_fg, gamma_mb),
        theta_ratio=_ratio(theta_fg, theta_mb),
        gamma_fg_exposed=gamma_fg * (1 - config.knobs.overlap_fraction),
        sampling_work=work,
        sampling_fraction=_ratio(work, work + theta_mb_epoch),
        edge_cut=profile.edge_cut,
        halo_total=profile.halo_total,
        breakdown=breakdown,
        provenance=prov,
    )
