import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gnncost.graph import CsrGraph, VertexSet, ingest_edge_list

DATA_DIR = Path(__file__).parent.parent / "data"


def dataset_path(name: str) -> Path:
    return DATA_DIR / name


def require_dataset(*names: str):
    missing = [n for n in names if not dataset_path(n).exists()]
    if missing:
        pytest.skip(f"dataset files missing: {', '.join(missing)} "
                    f"(run scripts/fetch_datasets.py in a connected environment)")


@pytest.fixture
def three_cycle() -> CsrGraph:
    return ingest_edge_list(["0 1", "1 2", "2 0"], symmetrize=True)


@pytest.fixture
def star10() -> CsrGraph:
    # center 0, leaves 1..10
    return ingest_edge_list([f"0 {i}" for i in range(1, 11)], symmetrize=True)


@pytest.fixture
def path4() -> CsrGraph:
    return ingest_edge_list(["0 1", "1 2", "2 3"], symmetrize=True)


def all_vertices(g: CsrGraph, role: str = "train") -> VertexSet:
    return VertexSet(np.arange(g.n, dtype=np.int64), role)


def pytest_runtest_logreport(report):
    # one visible PASS/FAIL/SKIP line per acceptance criterion
    if "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call":
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}.get(
            report.outcome, report.outcome.upper())
        print(f"\n[acceptance] {name}: {status}", flush=True)
    elif report.when == "setup" and report.skipped:
        print(f"\n[acceptance] {name}: SKIP", flush=True)
