"""Analytical cost simulator for distributed GNN training pipelines.

Computes and compares communication volume and training FLOPs for
full-graph (model-parallel) and mini-batch (data-parallel) pipelines over
partitioned graphs, without running any actual training.
"""

from .graph import (CsrGraph, DatasetMeta, VertexSet, generate_synthetic,
                    ingest_edge_list, load_binary_csr, save_binary_csr,
                    validate_against_meta)
from .partition import (BoundaryProfile, PartitionAssignment, boundary_profile,
                        import_partition, partition_streaming,
                        random_partition_baseline)
from .sampling import (EpochPlan, MicroBatch, ModelArch, SamplerConfig,
                       cluster_batch, neighborhood_sample, plan_epoch,
                       saint_node_sample, saint_walk_sample, sample_epoch)
from .costs import (CostConfig, CostReport, OptimizationKnobs, analyze,
                    comm_cost_fg, comm_cost_mb, compute_cost_fg,
                    compute_cost_mb, flops_edge, flops_vertex, sampling_work)

__version__ = "0.1.0"
