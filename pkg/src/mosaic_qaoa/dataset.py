"""Supervision-dataset records: versioned JSONL export/import and
stratified splitting."""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass

from .metrics import approximation_ratio, build_lcg
from .sat import formula_from_string
from .tokens import detokenize

SCHEMA_VERSION = 1

FIELD_ORDER = [
    "schema_version",
    "formula",
    "n",
    "m",
    "satisfiable",
    "provenance",
    "lcg_edges",
    "tokens",
    "energy",
    "opt",
    "ar",
    "layers",
    "config_digest",
    "seed",
]


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class DatasetRecord:
    formula: str
    n: int
    m: int
    satisfiable: bool
    provenance: str
    lcg_edges: tuple[tuple[int, int], ...]
    tokens: tuple[str, ...]
    energy: float
    opt: int
    ar: float
    layers: int
    config_digest: str
    seed: int
    schema_version: int = SCHEMA_VERSION


def validate_record(record: DatasetRecord) -> None:
    """Internal consistency: canonical formula, parseable tokens, and a
    recomputable approximation ratio."""
    f = formula_from_string(record.formula, n=record.n)
    if not f.is_canonical():
        raise DatasetError(f"formula is not canonical: {record.formula!r}")
    if f.m != record.m or f.n != record.n:
        raise DatasetError("formula string disagrees with stored n/m")
    parsed_formula, circuit = detokenize(list(record.tokens), n=record.n)
    if parsed_formula.clauses != f.clauses:
        raise DatasetError("token sequence does not encode the stored formula")
    if len(circuit.layers) != record.layers:
        raise DatasetError("token sequence layer count disagrees with record")
    expected = build_lcg(f).edges
    if tuple(tuple(e) for e in record.lcg_edges) != expected:
        raise DatasetError("stored literal-clause edges are wrong")
    recomputed = approximation_ratio(record.energy, record.m, record.opt)
    if abs(recomputed - record.ar) > 1e-9:
        raise DatasetError(
            f"stored ar {record.ar} differs from recomputed {recomputed}"
        )


def _to_json(record: DatasetRecord) -> str:
    data = asdict(record)
    data["lcg_edges"] = [list(e) for e in record.lcg_edges]
    data["tokens"] = list(record.tokens)
    ordered = {key: data[key] for key in FIELD_ORDER}
    return json.dumps(ordered, separators=(",", ":"))


def _from_json(line: str) -> DatasetRecord:
    data = json.loads(line)
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise DatasetError(
            f"schema version {version} unsupported (expected {SCHEMA_VERSION})"
        )
    return DatasetRecord(
        formula=data["formula"],
        n=data["n"],
        m=data["m"],
        satisfiable=data["satisfiable"],
        provenance=data["provenance"],
        lcg_edges=tuple(tuple(e) for e in data["lcg_edges"]),
        tokens=tuple(data["tokens"]),
        energy=data["energy"],
        opt=data["opt"],
        ar=data["ar"],
        layers=data["layers"],
        config_digest=data["config_digest"],
        seed=data["seed"],
    )


def export_jsonl(records, path) -> None:
    """One record per line; rejects invalid records and duplicate
    canonical formulas."""
    records = list(records)
    seen: dict[str, int] = {}
    duplicates = []
    for i, record in enumerate(records):
        validate_record(record)
        if record.formula in seen:
            duplicates.append(record.formula)
        seen.setdefault(record.formula, i)
    if duplicates:
        raise DatasetError(
            f"{len(duplicates)} duplicate canonical formulas: "
            + "; ".join(duplicates[:5])
        )
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(_to_json(record) + "\n")


def import_jsonl(path) -> list[DatasetRecord]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(_from_json(line))
    return out


def split_records(
    records, ratios: tuple[float, float, float] = (0.8, 0.1, 0.1), seed: int = 0
):
    """Deterministic train/validation/test split, stratified by
    (satisfiable, provenance)."""
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise DatasetError(f"split ratios must sum to 1, got {ratios}")
    strata: dict[tuple[bool, str], list[DatasetRecord]] = {}
    for record in records:
        strata.setdefault((record.satisfiable, record.provenance), []).append(record)
    splits: tuple[list[DatasetRecord], ...] = ([], [], [])
    for key in sorted(strata, key=repr):
        group = sorted(strata[key], key=lambda r: r.formula)
        random.Random(f"{seed}:{key}").shuffle(group)
        n_total = len(group)
        n_train = round(ratios[0] * n_total)
        n_val = round(ratios[1] * n_total)
        n_train = min(n_train, n_total)
        n_val = min(n_val, n_total - n_train)
        splits[0].extend(group[:n_train])
        splits[1].extend(group[n_train : n_train + n_val])
        splits[2].extend(group[n_train + n_val :])
    return splits
