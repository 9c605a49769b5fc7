"""Run configuration: one TOML document drives every CLI command.

The schema is strict: unknown keys are errors, and validation reports all
violations at once rather than stopping at the first. Relative paths are
resolved against the directory containing the config file.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .costs import CostConfig, OptimizationKnobs
from .graph import (CsrGraph, DATASET_PRESETS, DatasetMeta, VertexSet,
                    generate_synthetic, load_binary_csr_file, load_edge_list,
                    load_mask_file, synthetic_train_mask)
from .partition import PartitionAssignment, import_partition_file, partition_streaming
from .sampling import ModelArch, SamplerConfig


class ConfigError(ValueError):
    """Invalid run configuration; message lists every violated field."""

    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("invalid configuration:\n" + "\n".join(f"  - {p}" for p in problems))


_SCHEMA = {
    "dataset": {"path", "preset", "synthetic", "n", "avg_degree", "seed",
                "symmetrize", "meta", "masks"},
    "dataset.meta": {"name", "expected_n", "expected_m", "feature_dim", "num_classes"},
    "dataset.masks": {"train_path", "train_fraction", "mask_seed"},
    "partition": {"k", "slack", "seed", "import_path"},
    "arch": {"kind", "dims", "heads", "aggregator", "fanouts", "eta"},
    "sampler": {"algorithm", "batch_size", "rng_root", "workers", "cluster_count",
                "q", "cluster_slack", "budget", "roots", "walk_len"},
    "cost": {"epochs_fg", "epochs_mb", "bytes_per_scalar", "comm_dims",
             "comm_dims_mode", "knobs"},
    "cost.knobs": {"boundary_sampling_rate", "quantization_bits", "overlap_fraction"},
    "output": {"dir", "format"},
}


def _check_keys(doc: dict, problems: list[str]) -> None:
    for section, value in doc.items():
        if section not in _SCHEMA:
            problems.append(f"unknown section [{section}]")
            continue
        if not isinstance(value, dict):
            problems.append(f"[{section}] must be a table")
            continue
        for key, sub in value.items():
            if key not in _SCHEMA[section]:
                problems.append(f"unknown key {section}.{key}")
            elif isinstance(sub, dict):
                nested = f"{section}.{key}"
                if nested in _SCHEMA:
                    for k2 in sub:
                        if k2 not in _SCHEMA[nested]:
                            problems.append(f"unknown key {nested}.{k2}")
                else:
                    problems.append(f"{nested} must not be a table")


@dataclass(frozen=True)
class DatasetSpec:
    path: Optional[Path] = None
    synthetic: Optional[str] = None
    n: Optional[int] = None
    avg_degree: Optional[float] = None
    seed: int = 0
    symmetrize: bool = True
    meta: Optional[DatasetMeta] = None
    train_path: Optional[Path] = None
    train_fraction: Optional[float] = None
    mask_seed: int = 0

    @property
    def name(self) -> str:
        if self.meta is not None and self.meta.name:
            return self.meta.name
        if self.path is not None:
            return self.path.stem
        return f"{self.synthetic}-n{self.n}"

    def load_graph(self) -> CsrGraph:
        if self.path is not None:
            if self.path.suffix == ".gcsr":
                return load_binary_csr_file(self.path)
            return load_edge_list(self.path, symmetrize=self.symmetrize, meta=self.meta)
        return generate_synthetic(self.synthetic, self.n, self.avg_degree, self.seed)

    def train_set(self, graph: CsrGraph) -> VertexSet:
        if self.train_path is not None:
            return load_mask_file(self.train_path, "train", graph.n)
        return synthetic_train_mask(graph.n, self.train_fraction, self.mask_seed)


@dataclass(frozen=True)
class PartitionSpec:
    k: int
    slack: float = 0.05
    seed: int = 0
    import_path: Optional[Path] = None

    @property
    def source(self) -> str:
        if self.import_path is not None:
            return f"import:{self.import_path.name}"
        return f"streaming:slack={self.slack}:seed={self.seed}"

    def build(self, graph: CsrGraph, k: Optional[int] = None) -> PartitionAssignment:
        k = self.k if k is None else k
        if self.import_path is not None:
            return import_partition_file(self.import_path, graph.n, k)
        return partition_streaming(graph, k, self.slack, self.seed)


@dataclass(frozen=True)
class OutputSpec:
    dir: Path = Path("out")
    format: str = "both"


@dataclass(frozen=True)
class RunConfig:
    dataset: DatasetSpec
    partition: PartitionSpec
    arch: ModelArch
    sampler: SamplerConfig
    cost: CostConfig
    output: OutputSpec


def _get(section: dict, key: str, types, default, problems: list[str],
         where: str) -> Any:
    if key not in section:
        return default
    v = section[key]
    if isinstance(v, bool) and bool not in (types if isinstance(types, tuple) else (types,)):
        problems.append(f"{where}.{key} has wrong type")
        return default
    if not isinstance(v, types):
        problems.append(f"{where}.{key} has wrong type")
        return default
    return v


def load_config(path) -> RunConfig:
    """Parse and validate a TOML run configuration."""
    path = Path(path)
    try:
        with open(path, "rb") as f:
            doc = tomllib.load(f)
    except OSError as e:
        raise ConfigError([f"cannot read config: {e}"]) from None
    except tomllib.TOMLDecodeError as e:
        raise ConfigError([f"TOML syntax: {e}"]) from None
    return build_config(doc, base_dir=path.parent)


def build_config(doc: dict, base_dir: Path) -> RunConfig:
    problems: list[str] = []
    _check_keys(doc, problems)

    def resolve(p: str) -> Path:
        q = Path(p)
        return q if q.is_absolute() else base_dir / q

    # dataset
    ds = doc.get("dataset", {})
    ds = ds if isinstance(ds, dict) else {}
    path = _get(ds, "path", str, None, problems, "dataset")
    synthetic = _get(ds, "synthetic", str, None, problems, "dataset")
    preset = _get(ds, "preset", str, None, problems, "dataset")
    if (path is None) == (synthetic is None):
        problems.append("dataset: exactly one of path or synthetic is required")
    meta = None
    if preset is not None:
        if preset in DATASET_PRESETS:
            meta = DATASET_PRESETS[preset]
        else:
            problems.append(f"dataset.preset: unknown preset {preset!r} "
                            f"(known: {', '.join(sorted(DATASET_PRESETS))})")
    mt = ds.get("meta")
    if isinstance(mt, dict):
        if meta is not None:
            problems.append("dataset: give either preset or meta, not both")
        try:
            meta = DatasetMeta(
                name=_get(mt, "name", str, "", problems, "dataset.meta"),
                expected_n=_get(mt, "expected_n", int, None, problems, "dataset.meta"),
                expected_m=_get(mt, "expected_m", int, None, problems, "dataset.meta"),
                feature_dim=_get(mt, "feature_dim", int, None, problems, "dataset.meta"),
                num_classes=_get(mt, "num_classes", int, None, problems, "dataset.meta"))
        except ValueError as e:
            problems.append(f"dataset.meta: {e}")
    masks = ds.get("masks") if isinstance(ds.get("masks"), dict) else {}
    train_path = _get(masks, "train_path", str, None, problems, "dataset.masks")
    train_fraction = _get(masks, "train_fraction", (int, float), None, problems,
                          "dataset.masks")
    if (train_path is None) == (train_fraction is None):
        problems.append("dataset.masks: exactly one of train_path or train_fraction "
                        "is required")
    elif train_fraction is not None and not 0 < train_fraction <= 1:
        problems.append("dataset.masks.train_fraction must be in (0, 1]")
    n = _get(ds, "n", int, None, problems, "dataset")
    avg_degree = _get(ds, "avg_degree", (int, float), None, problems, "dataset")
    if synthetic is not None:
        if synthetic not in ("erdos_renyi", "power_law"):
            problems.append(f"dataset.synthetic: unknown kind {synthetic!r}")
        if n is None or n < 1:
            problems.append("dataset.n must be a positive integer for synthetic graphs")
        if avg_degree is None or avg_degree < 0:
            problems.append("dataset.avg_degree must be nonnegative for synthetic graphs")
    dataset = DatasetSpec(
        path=resolve(path) if path else None,
        synthetic=synthetic, n=n, avg_degree=avg_degree,
        seed=_get(ds, "seed", int, 0, problems, "dataset"),
        symmetrize=_get(ds, "symmetrize", bool, True, problems, "dataset"),
        meta=meta,
        train_path=resolve(train_path) if train_path else None,
        train_fraction=train_fraction,
        mask_seed=_get(masks, "mask_seed", int, 0, problems, "dataset.masks"))

    # partition
    pt = doc.get("partition", {})
    pt = pt if isinstance(pt, dict) else {}
    k = _get(pt, "k", int, None, problems, "partition")
    if k is None or k < 1:
        problems.append("partition.k must be a positive integer")
        k = 1
    import_path = _get(pt, "import_path", str, None, problems, "partition")
    slack = _get(pt, "slack", (int, float), 0.05, problems, "partition")
    if slack < 0:
        problems.append("partition.slack must be nonnegative")
    partition = PartitionSpec(
        k=k, slack=float(slack),
        seed=_get(pt, "seed", int, 0, problems, "partition"),
        import_path=resolve(import_path) if import_path else None)

    # arch
    ar = doc.get("arch", {})
    ar = ar if isinstance(ar, dict) else {}
    dims = _get(ar, "dims", list, None, problems, "arch")
    fanouts = _get(ar, "fanouts", list, None, problems, "arch")
    arch = None
    try:
        arch = ModelArch(
            kind=_get(ar, "kind", str, "graphsage", problems, "arch"),
            dims=tuple(dims) if dims else (1, 1),
            heads=_get(ar, "heads", int, 1, problems, "arch"),
            aggregator=_get(ar, "aggregator", str, "mean", problems, "arch"),
            fanouts=tuple(fanouts) if fanouts is not None else None,
            eta=float(_get(ar, "eta", (int, float), 1.0, problems, "arch")))
    except (ValueError, TypeError) as e:
        problems.append(f"arch: {e}")
    if dims is None:
        problems.append("arch.dims is required")
    if (meta is not None and meta.feature_dim is not None and dims
            and dims[0] != meta.feature_dim):
        problems.append(f"arch.dims[0]={dims[0]} disagrees with dataset feature "
                        f"width {meta.feature_dim}")

    # sampler
    sm = doc.get("sampler", {})
    sm = sm if isinstance(sm, dict) else {}
    sampler = None
    try:
        sampler = SamplerConfig(
            algorithm=_get(sm, "algorithm", str, "neighborhood", problems, "sampler"),
            batch_size=_get(sm, "batch_size", int, 1024, problems, "sampler"),
            rng_root=_get(sm, "rng_root", int, 0, problems, "sampler"),
            cluster_count=_get(sm, "cluster_count", int, 32, problems, "sampler"),
            q=_get(sm, "q", int, 1, problems, "sampler"),
            cluster_slack=float(_get(sm, "cluster_slack", (int, float), 0.05,
                                     problems, "sampler")),
            budget=_get(sm, "budget", int, None, problems, "sampler"),
            roots=_get(sm, "roots", int, None, problems, "sampler"),
            walk_len=_get(sm, "walk_len", int, 2, problems, "sampler"))
    except ValueError as e:
        problems.append(f"sampler: {e}")
    workers = _get(sm, "workers", int, None, problems, "sampler")
    if workers is not None and workers != k:
        problems.append(f"sampler.workers={workers} must equal partition.k={k}")
    if sampler is not None:
        if sampler.algorithm == "neighborhood" and arch is not None and arch.fanouts is None:
            problems.append("arch.fanouts is required for neighborhood sampling")
        if sampler.algorithm == "saint_node" and sampler.budget is None:
            problems.append("sampler.budget is required for saint_node")
        if sampler.algorithm == "saint_walk" and sampler.roots is None:
            problems.append("sampler.roots is required for saint_walk")
        if sampler.batch_size < k:
            problems.append(f"sampler.batch_size={sampler.batch_size} must be >= "
                            f"partition.k={k}")

    # cost
    co = doc.get("cost", {})
    co = co if isinstance(co, dict) else {}
    knobs_doc = co.get("knobs") if isinstance(co.get("knobs"), dict) else {}
    cost = None
    try:
        knobs = OptimizationKnobs(
            boundary_sampling_rate=float(_get(knobs_doc, "boundary_sampling_rate",
                                              (int, float), 1.0, problems, "cost.knobs")),
            quantization_bits=_get(knobs_doc, "quantization_bits", int, 32,
                                   problems, "cost.knobs"),
            overlap_fraction=float(_get(knobs_doc, "overlap_fraction", (int, float),
                                        0.0, problems, "cost.knobs")))
        comm_dims = _get(co, "comm_dims", list, None, problems, "cost")
        cost = CostConfig(
            epochs_fg=_get(co, "epochs_fg", int, 1, problems, "cost"),
            epochs_mb=_get(co, "epochs_mb", int, 1, problems, "cost"),
            bytes_per_scalar=_get(co, "bytes_per_scalar", int, 4, problems, "cost"),
            comm_dims=tuple(comm_dims) if comm_dims is not None else None,
            comm_dims_mode=_get(co, "comm_dims_mode", str, "input", problems, "cost"))
        cost = CostConfig(cost.epochs_fg, cost.epochs_mb, cost.bytes_per_scalar,
                          cost.comm_dims, cost.comm_dims_mode, knobs)
    except ValueError as e:
        problems.append(f"cost: {e}")

    # output
    ou = doc.get("output", {})
    ou = ou if isinstance(ou, dict) else {}
    fmt = _get(ou, "format", str, "both", problems, "output")
    if fmt not in ("json", "csv", "both"):
        problems.append("output.format must be json, csv, or both")
    outdir = _get(ou, "dir", str, "out", problems, "output")
    output = OutputSpec(dir=resolve(outdir), format=fmt)

    if problems:
        raise ConfigError(problems)
    return RunConfig(dataset, partition, arch, sampler, cost, output)
