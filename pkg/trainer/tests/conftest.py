"""Trainer test fixtures: small datasets produced end-to-end by the
simulator CLI, cached per session under the pytest tmp root."""

import json
import subprocess
import sys

import pytest

CLI = "mosaic-qaoa"


def build_dataset(root, n: int, count: int, seed: int, jobs: int = 2):
    """generate -> run (mosaic) -> export-dataset; returns the full
    JSONL path."""
    instances = root / "instances"
    runs = root / "runs"
    subprocess.run(
        [CLI, "generate", "--n", str(n), "--count", str(count), "--kind",
         "mixed", "--sat-filter", "any", "--seed", str(seed), "--out",
         str(instances)],
        check=True, capture_output=True, text=True,
    )
    subprocess.run(
        [CLI, "run", "--instances", str(instances), "--strategy", "mosaic",
         "--gamma0", "0.5", "--shots", "200", "--jobs", str(jobs), "--out",
         str(runs)],
        check=True, capture_output=True, text=True,
    )
    out = root / "data.jsonl"
    subprocess.run(
        [CLI, "export-dataset", "--runs", str(runs), "--strategy", "mosaic",
         "--out", str(out)],
        check=True, capture_output=True, text=True,
    )
    return out


@pytest.fixture(scope="session")
def small_dataset(tmp_path_factory):
    """12 records at n=5; enough for the fast pathway tests."""
    root = tmp_path_factory.mktemp("small-data")
    path = build_dataset(root, n=5, count=12, seed=42)
    return path


@pytest.fixture(scope="session")
def small_records(small_dataset):
    with open(small_dataset) as fh:
        return [json.loads(line) for line in fh if line.strip()]
