"""Scoring generated circuits through the simulator CLI.

The CLI is invoked as a subprocess over a JSONL request/response file
pair, so the statevector implementation stays single-sourced. Reported
numbers follow the usual table semantics: approximation ratios are
averaged over valid circuits only, the formula error rate counts
formulas with no valid sample, and the circuit error rate counts
invalid samples.
"""

import json
import os
import statistics
import subprocess
import tempfile

DEFAULT_CLI = "mosaic-qaoa"


class EvaluationError(RuntimeError):
    pass


def score_circuits(
    per_formula: list[dict], cli: str = DEFAULT_CLI, shots: int = 1000, seed: int = 0
) -> list[dict]:
    """per_formula entries: {id, formula, n, circuits: [[tok, ...]]};
    returns the CLI's per-formula reports in the same order."""
    with tempfile.TemporaryDirectory() as tmp:
        req_path = os.path.join(tmp, "requests.jsonl")
        resp_path = os.path.join(tmp, "responses.jsonl")
        with open(req_path, "w", encoding="utf-8") as fh:
            for entry in per_formula:
                fh.write(
                    json.dumps(
                        {
                            "id": entry["id"],
                            "formula": entry["formula"],
                            "n": entry["n"],
                            "circuits": entry["circuits"],
                            "shots": shots,
                            "seed": seed,
                        }
                    )
                    + "\n"
                )
        proc = subprocess.run(
            [cli, "eval-circuit", "--requests", req_path, "--out", resp_path],
            capture_output=True,
            text=True,
        )
        if proc.returncode != 0:
            raise EvaluationError(
                f"{cli} eval-circuit failed with code {proc.returncode}: "
                f"{proc.stderr.strip()}"
            )
        with open(resp_path, "r", encoding="utf-8") as fh:
            responses = [json.loads(line) for line in fh if line.strip()]
    by_id = {r["id"]: r for r in responses}
    return [by_id[e["id"]] for e in per_formula]


def summarize(reports: list[dict]) -> dict:
    """Aggregate formula/circuit error rates and valid-only ratios."""
    formulas = len(reports)
    circuits = sum(len(r["results"]) for r in reports)
    invalid = sum(
        sum(1 for res in r["results"] if not res["valid"]) for r in reports
    )
    failed_formulas = sum(1 for r in reports if not r["any_valid"])
    best = [r["best_ar"] for r in reports if r["best_ar"] is not None]
    valid_ars = [
        res["ar_expectation"]
        for r in reports
        for res in r["results"]
        if res["valid"]
    ]
    return {
        "formula_er": 100.0 * failed_formulas / formulas if formulas else 0.0,
        "circuit_er": 100.0 * invalid / circuits if circuits else 0.0,
        "best_ar": statistics.fmean(best) if best else None,
        "avg_ar": statistics.fmean(valid_ars) if valid_ars else None,
        "formulas": formulas,
        "circuits": circuits,
    }


def evaluate_model(
    model,
    vocab,
    cfg,
    records: list[dict],
    cli: str = DEFAULT_CLI,
    temperature: float | None = None,
    seed: int = 0,
) -> dict:
    """Sample circuits for each record's formula and score them through
    the CLI."""
    from .generate import generate

    temperature = cfg.temperature if temperature is None else temperature
    requests = []
    for i, record in enumerate(records):
        circuits = generate(
            model,
            vocab,
            record["formula"],
            k=cfg.samples_per_formula,
            temperature=temperature,
            seed=seed * 7_919 + i,
            record=record,
            cfg=cfg,
        )
        requests.append(
            {
                "id": f"r{i}",
                "formula": record["formula"],
                "n": record["n"],
                "circuits": circuits,
            }
        )
    reports = score_circuits(requests, cli=cli, seed=seed)
    summary = summarize(reports)
    summary["per_formula"] = reports
    return summary


def pick_best(candidates: list[tuple[str, dict]]) -> str:
    """Checkpoint selection: highest average ratio, ties broken by the
    lower circuit error rate."""
    def key(item):
        _, summary = item
        avg = summary["avg_ar"] if summary["avg_ar"] is not None else -1.0
        return (avg, -summary["circuit_er"])

    return max(candidates, key=key)[0]
