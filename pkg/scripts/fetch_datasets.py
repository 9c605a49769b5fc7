#!/usr/bin/env python3
"""Download the pubmed and ogbn-arxiv datasets and convert them to the
plain-text formats this package ingests (edge list + one-id-per-line masks).

Needs network access. Files land in data/ by default:

    pubmed.el  pubmed.train  pubmed.val  pubmed.test
    arxiv.el   arxiv.train   arxiv.val   arxiv.test

Vertex ids in both sources are already dense and 0-based, so no remapping
is performed. pubmed's full-supervised split keeps the upstream 1000-vertex
test set, takes the 500 lowest remaining ids as validation, and trains on
the rest (sizes 18217/500/1000).
"""

import argparse
import csv
import gzip
import io
import pickle
import sys
import urllib.request
import zipfile
from pathlib import Path

PLANETOID = "https://github.com/kimiyoung/planetoid/raw/master/data"
ARXIV_ZIP = "http://snap.stanford.edu/ogb/data/nodeproppred/arxiv.zip"


def fetch(url: str) -> bytes:
    print(f"fetching {url}")
    with urllib.request.urlopen(url, timeout=120) as r:
        return r.read()


def write_ids(path: Path, ids) -> None:
    path.write_text("".join(f"{i}\n" for i in sorted(ids)))
    print(f"wrote {path} ({len(ids)} ids)")


def fetch_pubmed(outdir: Path) -> None:
    graph = pickle.loads(fetch(f"{PLANETOID}/ind.pubmed.graph"), encoding="latin1")
    test_ids = {int(line) for line in
                fetch(f"{PLANETOID}/ind.pubmed.test.index").decode().split()}
    n = max(graph) + 1
    with open(outdir / "pubmed.el", "w") as f:
        for u in sorted(graph):
            for v in graph[u]:
                f.write(f"{u} {v}\n")
    print(f"wrote {outdir / 'pubmed.el'} ({n} vertices)")
    rest = [v for v in range(n) if v not in test_ids]
    val_ids = rest[:500]
    train_ids = rest[500:]
    write_ids(outdir / "pubmed.test", test_ids)
    write_ids(outdir / "pubmed.val", val_ids)
    write_ids(outdir / "pubmed.train", train_ids)


def _read_csv_gz(zf: zipfile.ZipFile, name: str):
    with zf.open(name) as f:
        with gzip.open(f, "rt") as g:
            yield from csv.reader(g)


def fetch_arxiv(outdir: Path) -> None:
    blob = fetch(ARXIV_ZIP)
    zf = zipfile.ZipFile(io.BytesIO(blob))
    with open(outdir / "arxiv.el", "w") as f:
        count = 0
        for row in _read_csv_gz(zf, "arxiv/raw/edge.csv.gz"):
            f.write(f"{row[0]} {row[1]}\n")
            count += 1
    print(f"wrote {outdir / 'arxiv.el'} ({count} directed edges)")
    for split, fname in (("train", "train.csv.gz"), ("val", "valid.csv.gz"),
                         ("test", "test.csv.gz")):
        ids = [int(row[0]) for row in
               _read_csv_gz(zf, f"arxiv/split/time/{fname}")]
        write_ids(outdir / f"arxiv.{split}", ids)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=Path(__file__).parent.parent / "data",
                        type=Path)
    parser.add_argument("--only", choices=("pubmed", "arxiv"), default=None)
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    try:
        if args.only in (None, "pubmed"):
            fetch_pubmed(args.out)
        if args.only in (None, "arxiv"):
            fetch_arxiv(args.out)
    except OSError as e:
        print(f"download failed: {e}\nThis script needs network access.",
              file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
