"""Command-line driver: ingest, partition, analyze, sweep, sample-stats.

Exit codes: 0 success, 1 usage/validation/IO error, 2 dataset-metadata
mismatch. All outputs are deterministic for a fixed config and are written
atomically; sweeps produce identical bytes for any --jobs value.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

from . import costs, graph as graphmod, partition as partmod, sampling
from .config import ConfigError, RunConfig, load_config

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_META_MISMATCH = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; the CLI contract reserves 2
    # for metadata mismatches, so remap.
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(_fail(f"argument error: {message}"))


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return EXIT_ERROR


def _write_atomic(path: Path, data: str | bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, mode) as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    if args.seed is not None:
        cfg = replace(cfg, partition=replace(cfg.partition, seed=args.seed),
                      sampler=replace(cfg.sampler, rng_root=args.seed))
    if args.out is not None:
        cfg = replace(cfg, output=replace(cfg.output, dir=Path(args.out)))
    if args.format is not None:
        cfg = replace(cfg, output=replace(cfg.output, format=args.format))
    return cfg


def _load_config(args) -> RunConfig:
    if args.config is None:
        raise ConfigError(["--config is required for this command"])
    return _apply_overrides(load_config(args.config), args)


def _run_point(cfg: RunConfig, g, train, k=None) -> costs.CostReport:
    assignment = cfg.partition.build(g, k)
    plan = sampling.plan_epoch(train, cfg.sampler.batch_size, assignment.k,
                               cfg.sampler.rng_root)
    return costs.analyze(g, assignment, cfg.arch, plan, cfg.sampler, cfg.cost,
                         provenance={"dataset": cfg.dataset.name,
                                     "partition_source": cfg.partition.source})


def _emit_report(report: costs.CostReport, outdir: Path, stem: str, fmt: str) -> list[Path]:
    written = []
    if fmt in ("json", "both"):
        p = outdir / f"{stem}.json"
        _write_atomic(p, report.to_json())
        written.append(p)
    if fmt in ("csv", "both"):
        p = outdir / f"{stem}.csv"
        _write_atomic(p, costs.reports_to_csv([report]))
        written.append(p)
    return written


def cmd_ingest(args) -> int:
    meta = None
    if args.preset is not None:
        if args.preset not in graphmod.DATASET_PRESETS:
            return _fail(f"unknown preset {args.preset!r} "
                         f"(known: {', '.join(sorted(graphmod.DATASET_PRESETS))})")
        meta = graphmod.DATASET_PRESETS[args.preset]
    elif args.expected_n is not None or args.expected_m is not None:
        meta = graphmod.DatasetMeta(name=args.name or Path(args.input).stem,
                                    expected_n=args.expected_n,
                                    expected_m=args.expected_m)
    try:
        g = graphmod.load_edge_list(args.input, symmetrize=not args.no_symmetrize,
                                    meta=meta)
    except (OSError, ValueError) as e:
        return _fail(str(e))
    outdir = Path(args.out or "out")
    stem = args.name or (args.preset or Path(args.input).stem)
    out = outdir / f"{stem}.gcsr"
    buf = io.BytesIO()
    graphmod.save_binary_csr(g, buf)
    _write_atomic(out, buf.getvalue())
    print(f"wrote {out} (n={g.n}, m={g.m})")
    if meta is not None:
        report = graphmod.validate_against_meta(g, meta)
        for line in report.lines():
            print(line)
        if not report.ok:
            return EXIT_META_MISMATCH
    return EXIT_OK


def cmd_partition(args) -> int:
    try:
        cfg = _load_config(args)
        g = cfg.dataset.load_graph()
        assignment = cfg.partition.build(g)
        profile = partmod.boundary_profile(g, assignment)
    except (ConfigError, OSError, ValueError) as e:
        return _fail(str(e))
    outdir = cfg.output.dir
    out = outdir / f"{cfg.dataset.name}.k{assignment.k}.parts"
    buf = io.StringIO()
    partmod.save_partition(assignment, buf)
    _write_atomic(out, buf.getvalue())
    sizes = assignment.sizes()
    summary = {
        "dataset": cfg.dataset.name, "n": g.n, "m": g.m, "k": assignment.k,
        "edge_cut": profile.edge_cut, "halo_total": profile.halo_total,
        "remote_in_count_by_part": [int(c) for c in profile.remote_in_count],
        "part_sizes": [int(s) for s in sizes],
        "partition_source": cfg.partition.source,
    }
    _write_atomic(outdir / f"{cfg.dataset.name}.k{assignment.k}.profile.json",
                  json.dumps(summary, indent=2, sort_keys=True) + "\n")
    print(f"wrote {out} (edge_cut={profile.edge_cut}, halo={profile.halo_total}, "
          f"max_part={int(sizes.max())})")
    return EXIT_OK


def cmd_analyze(args) -> int:
    try:
        cfg = _load_config(args)
        g = cfg.dataset.load_graph()
        train = cfg.dataset.train_set(g)
        report = _run_point(cfg, g, train)
    except (ConfigError, OSError, ValueError) as e:
        return _fail(str(e))
    for p in _emit_report(report, cfg.output.dir, "report", cfg.output.format):
        print(f"wrote {p}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    try:
        k_list = [int(tok) for tok in args.k_list.split(",") if tok.strip()]
    except ValueError:
        return _fail(f"--k-list must be comma-separated integers, got {args.k_list!r}")
    if not k_list:
        return _fail("--k-list is empty")
    if any(k < 2 for k in k_list):
        return _fail("every k in --k-list must be >= 2")
    try:
        cfg = _load_config(args)
        if cfg.partition.import_path is not None:
            return _fail("sweep requires the built-in partitioner "
                         "(partition.import_path is fixed to one k)")
        g = cfg.dataset.load_graph()
        train = cfg.dataset.train_set(g)

        def point(k):
            try:
                return _run_point(cfg, g, train, k)
            except ValueError as e:
                raise ValueError(f"sweep point k={k}: {e}") from None

        jobs = max(1, args.jobs)
        if jobs == 1:
            reports = [point(k) for k in k_list]
        else:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                reports = list(pool.map(point, k_list))
    except (ConfigError, OSError, ValueError) as e:
        return _fail(str(e))
    out = cfg.output.dir / "sweep.csv"
    _write_atomic(out, costs.reports_to_csv(reports))
    print(f"wrote {out} ({len(reports)} rows)")
    return EXIT_OK


def cmd_sample_stats(args) -> int:
    try:
        cfg = _load_config(args)
        g = cfg.dataset.load_graph()
        train = cfg.dataset.train_set(g)
        plan = sampling.plan_epoch(train, cfg.sampler.batch_size, cfg.partition.k,
                                   cfg.sampler.rng_root)
        batches = sampling.sample_epoch(g, plan, cfg.arch, cfg.sampler)
        work = costs.sampling_work(batches)
        per_epoch = replace(cfg.cost, epochs_fg=1, epochs_mb=1)
        theta_epoch = costs.compute_cost_mb(batches, cfg.arch, per_epoch)
    except (ConfigError, OSError, ValueError) as e:
        return _fail(str(e))
    layers = cfg.arch.layers
    per_layer = []
    for l in range(layers + 1):
        sizes = [b.layer_vertices[l] for b in batches]
        per_layer.append({"layer": l, "min": min(sizes), "max": max(sizes),
                          "mean": sum(sizes) / len(sizes), "total": sum(sizes)})
    stats = {
        "dataset": cfg.dataset.name,
        "algorithm": cfg.sampler.algorithm,
        "workers": cfg.partition.k,
        "iterations": plan.iterations,
        "num_batches": len(batches),
        "sampling_work": work,
        "theta_mb_per_epoch": theta_epoch,
        "sampling_fraction": work / (work + theta_epoch) if work + theta_epoch else None,
        "frontier_by_layer": per_layer,
        "sampled_edges_by_layer": [sum(b.layer_edges[l] for b in batches)
                                   for l in range(layers)],
    }
    outdir = cfg.output.dir
    if cfg.output.format in ("json", "both"):
        p = outdir / "sample_stats.json"
        _write_atomic(p, json.dumps(stats, indent=2, sort_keys=True) + "\n")
        print(f"wrote {p}")
    if cfg.output.format in ("csv", "both"):
        flat = {k: v for k, v in stats.items()
                if not isinstance(v, (list, dict))}
        cols = list(flat)
        line = ",".join("" if flat[c] is None else str(flat[c]) for c in cols)
        p = outdir / "sample_stats.csv"
        _write_atomic(p, ",".join(cols) + "\n" + line + "\n")
        print(f"wrote {p}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gnncost",
                     description="Analytical cost simulator for distributed GNN "
                                 "training pipelines")
    parser.add_argument("--config", help="TOML run configuration")
    parser.add_argument("--seed", type=int, default=None,
                        help="override partition seed and sampler rng_root")
    parser.add_argument("--jobs", type=int, default=1,
                        help="parallel sweep points (default 1)")
    parser.add_argument("--out", default=None, help="output directory override")
    parser.add_argument("--format", choices=("json", "csv", "both"), default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="edge list -> binary CSR + metadata check")
    p.add_argument("input", help="edge-list text file (src dst per line)")
    p.add_argument("--preset", help="named dataset metadata preset")
    p.add_argument("--expected-n", type=int, default=None)
    p.add_argument("--expected-m", type=int, default=None)
    p.add_argument("--name", default=None, help="output file stem")
    p.add_argument("--no-symmetrize", action="store_true",
                   help="keep the edge list directed")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("partition", help="build and profile a k-way partition")
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("analyze", help="full cost report for one configuration")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", help="cost report series over partition counts")
    p.add_argument("--k-list", required=True, help="comma-separated k values (each >= 2)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("sample-stats", help="per-epoch sampler statistics")
    p.set_defaults(func=cmd_sample_stats)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except ConfigError as e:
        return _fail(str(e))


if __name__ == "__main__":
    raise SystemExit(main())
