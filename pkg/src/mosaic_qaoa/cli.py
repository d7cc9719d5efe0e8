"""Command-line surface: instance generation, benchmark runs, dataset
export, external-circuit evaluation, and plot-data emission.

Instance files are DIMACS CNF; run records and datasets are JSON/JSONL
with deterministic bodies (wall-clock timings live in the side manifest
and the metrics CSV only). The environment variable MOSAIC_QAOA_CAP
overrides the simulator qubit cap.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import glob
import hashlib
import json
import os
import statistics
import sys

from . import __version__
from .dataset import DatasetError, DatasetRecord, export_jsonl, split_records
from .engine import EngineConfig, Strategy, run as engine_run, wrapped_circuit
from .metrics import (
    approximation_ratio,
    best_shot_ratio,
    build_lcg,
    layers_to_target,
    stuck as stuck_metric,
)
from .sat import (
    CnfFormula,
    GenerationFailureError,
    SatError,
    canonicalize,
    formula_from_string,
    formula_to_string,
    generate_balanced,
    generate_uniform,
    max_sat_opt,
    read_dimacs,
    write_dimacs,
)
from .simulator import build_cost_diag, sample
from .engine import evaluate_circuit
from .tokens import TokenError, detokenize, tokenize, validate_tokens

EXIT_OK = 0
EXIT_PARTIAL = 2
EXIT_CONFIG = 3

GAMMA_GRID = (0.01, 0.1, 0.5)

METRICS_FIELDS = [
    "formula_id",
    "strategy",
    "gamma0",
    "ar",
    "layers",
    "params",
    "stuck",
    "stop_reason",
    "wall_time",
]


class CliConfigError(Exception):
    pass


def config_digest(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:12]


def derive_seed(master: int, *parts) -> int:
    blob = json.dumps([master, *parts], separators=(",", ":"))
    digest = hashlib.sha256(blob.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def _dump_json(data: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=1, sort_keys=False)
        fh.write("\n")


# ---------------------------------------------------------------- generate


def cmd_generate(args) -> int:
    if args.n < 3:
        raise CliConfigError("--n must be at least 3")
    if args.count < 1:
        raise CliConfigError("--count must be positive")
    kinds: list[str]
    if args.kind == "mixed":
        half = args.count // 2
        kinds = ["uniform"] * (args.count - half) + ["balanced"] * half
    elif args.kind in ("uniform", "balanced"):
        kinds = [args.kind] * args.count
    else:
        raise CliConfigError(f"unknown kind {args.kind!r}")

    os.makedirs(args.out, exist_ok=True)
    digest = config_digest(
        {
            "command": "generate",
            "n": args.n,
            "count": args.count,
            "kind": args.kind,
            "sat_filter": args.sat_filter,
            "seed": args.seed,
        }
    )
    entries = []
    for index, kind in enumerate(kinds):
        generator = generate_uniform if kind == "uniform" else generate_balanced
        attempt = 0
        while True:
            seed = derive_seed(args.seed, kind, index, attempt)
            attempt += 1
            if attempt > args.max_attempts:
                raise GenerationFailureError(
                    f"no {kind} instance matching sat-filter={args.sat_filter} "
                    f"for n={args.n} after {args.max_attempts} attempts"
                )
            try:
                formula = canonicalize(generator(args.n, seed))
            except GenerationFailureError:
                continue
            optimum = max_sat_opt(formula)
            satisfiable = optimum.opt == formula.m
            if args.sat_filter == "sat" and not satisfiable:
                continue
            if args.sat_filter == "unsat" and satisfiable:
                continue
            break
        name = f"{kind}_{index:04d}.cnf"
        write_dimacs(formula, os.path.join(args.out, name))
        entries.append(
            {
                "file": name,
                "kind": kind,
                "n": formula.n,
                "m": formula.m,
                "seed": seed,
                "opt": optimum.opt,
                "satisfiable": satisfiable,
            }
        )
    _dump_json(
        {
            "version": __version__,
            "config_digest": digest,
            "n": args.n,
            "count": args.count,
            "kind": args.kind,
            "sat_filter": args.sat_filter,
            "seed": args.seed,
            "entries": entries,
        },
        os.path.join(args.out, "manifest.json"),
    )
    print(f"wrote {len(entries)} instances to {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------- run


def _engine_config(strategy: Strategy, gamma0: float, args) -> EngineConfig:
    return EngineConfig(
        gamma0=gamma0,
        strategy=strategy,
        seed=args.seed,
        layer_stopper_max=args.max_layers,
        record_pool_scores=args.record_pool_scores,
    )


def _run_record(formula: CnfFormula, formula_id: str, strategy: Strategy,
                gamma0: float, args, digest: str) -> tuple[dict, float]:
    """Execute one engine run and derive every recorded metric from the
    exported (angle-quantized) token sequence."""
    cfg = _engine_config(strategy, gamma0, args)
    result = engine_run(formula, cfg)
    diag = build_cost_diag(formula, cap=cfg.sim_cap)
    optimum = max_sat_opt(formula)
    tokens = tokenize(formula, wrapped_circuit(result.circuit))
    _, circuit = detokenize(tokens, n=formula.n)
    state, energy = evaluate_circuit(circuit, diag)
    sample_seed = derive_seed(args.seed, formula_id, strategy.value, gamma0)
    counts = sample(state, args.shots, sample_seed)
    record = {
        "version": __version__,
        "config_digest": digest,
        "formula_id": formula_id,
        "formula": formula_to_string(formula),
        "n": formula.n,
        "m": formula.m,
        "provenance": formula.provenance.value,
        "instance_seed": formula.seed,
        "satisfiable": optimum.opt == formula.m,
        "opt": optimum.opt,
        "strategy": strategy.value,
        "gamma0": gamma0,
        "tokens": tokens,
        "energy": energy,
        "energy_opt": result.final_energy,
        "ar_expectation": approximation_ratio(energy, formula.m, optimum.opt),
        "ar_best_shot": best_shot_ratio(counts, diag, optimum.opt),
        "stuck": stuck_metric(counts, diag),
        "layers": len(result.circuit.layers),
        "params": result.circuit.parameter_count,
        "stop_reason": result.stop_reason.value,
        "layers_to_999": layers_to_target(result.energy_trace, formula.m, optimum.opt),
        "energy_trace": list(result.energy_trace),
        "gradient_sum_trace": list(result.gradient_sum_trace),
        "max_gradient_trace": list(result.max_gradient_trace),
        "pool_score_trace": [
            [[name, g] for name, g in layer] for layer in result.pool_score_trace
        ],
        "op_names_per_layer": [
            [op.name for op, _ in layer.mixers] for layer in result.circuit.layers
        ],
        "shots": args.shots,
        "sample_seed": sample_seed,
    }
    return record, result.wall_time


def _run_work_item(item) -> tuple[str, dict | None, float, str | None]:
    path, formula_id, strategy_name, gamma_mode, args, digest = item
    try:
        formula = canonicalize(read_dimacs(path))
        strategy = Strategy(strategy_name)
        if gamma_mode == "grid":
            best = None
            total_time = 0.0
            for gamma0 in GAMMA_GRID:
                record, wall = _run_record(
                    formula, formula_id, strategy, gamma0, args, digest
                )
                total_time += wall
                key = (record["ar_expectation"], -record["layers"])
                if best is None or key > best[0]:
                    best = (key, record)
            record = dict(best[1])
            record["gamma_grid"] = True
            return formula_id, record, total_time, None
        record, wall = _run_record(
            formula, formula_id, strategy, float(gamma_mode), args, digest
        )
        record["gamma_grid"] = False
        return formula_id, record, wall, None
    except Exception as err:  # noqa: BLE001 - partial failures are reported
        return formula_id, None, 0.0, f"{type(err).__name__}: {err}"


def _instance_paths(target: str) -> list[str]:
    if os.path.isdir(target):
        paths = sorted(glob.glob(os.path.join(target, "*.cnf")))
    elif os.path.isfile(target):
        paths = [target]
    else:
        raise CliConfigError(f"instances path {target!r} does not exist")
    if not paths:
        raise CliConfigError(f"no .cnf instances found at {target!r}")
    return paths


def cmd_run(args) -> int:
    paths = _instance_paths(args.instances)
    if args.strategy == "all":
        strategies = [s.value for s in Strategy]
    else:
        try:
            strategies = [Strategy(args.strategy).value]
        except ValueError:
            raise CliConfigError(f"unknown strategy {args.strategy!r}")
    if args.gamma0 != "grid":
        try:
            float(args.gamma0)
        except ValueError:
            raise CliConfigError(f"--gamma0 must be a number or 'grid', got {args.gamma0!r}")

    digest = config_digest(
        {
            "command": "run",
            "strategies": strategies,
            "gamma0": args.gamma0,
            "shots": args.shots,
            "max_layers": args.max_layers,
            "seed": args.seed,
            "version": __version__,
        }
    )
    records_dir = os.path.join(args.out, "records")
    os.makedirs(records_dir, exist_ok=True)

    work = []
    for path in paths:
        formula_id = os.path.splitext(os.path.basename(path))[0]
        for strategy_name in strategies:
            work.append((path, formula_id, strategy_name, args.gamma0, args, digest))

    results = []
    if args.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_work_item, work))
    else:
        results = [_run_work_item(item) for item in work]

    failures = []
    rows = []
    timing = {}
    for (path, formula_id, strategy_name, gamma_mode, _, _), (
        _,
        record,
        wall,
        error,
    ) in zip(work, results):
        if record is None:
            failures.append((formula_id, strategy_name, error))
            print(f"FAILED {formula_id} {strategy_name}: {error}", file=sys.stderr)
            continue
        gamma_tag = "grid" if gamma_mode == "grid" else f"{float(gamma_mode):g}"
        name = f"{formula_id}__{strategy_name}__g{gamma_tag}.json"
        _dump_json(record, os.path.join(records_dir, name))
        timing[name] = wall
        rows.append(
            {
                "formula_id": formula_id,
                "strategy": strategy_name,
                "gamma0": record["gamma0"],
                "ar": f"{record['ar_expectation']:.12g}",
                "layers": record["layers"],
                "params": record["params"],
                "stuck": str(record["stuck"]).lower(),
                "stop_reason": record["stop_reason"],
                "wall_time": f"{wall:.3f}",
            }
        )

    rows.sort(key=lambda r: (r["formula_id"], r["strategy"], str(r["gamma0"])))
    with open(os.path.join(args.out, "metrics.csv"), "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=METRICS_FIELDS)
        writer.writeheader()
        writer.writerows(rows)
    _dump_json(
        {"version": __version__, "config_digest": digest, "wall_times": timing},
        os.path.join(args.out, "timing.json"),
    )
    print(f"completed {len(rows)}/{len(work)} runs -> {args.out}")
    return EXIT_PARTIAL if failures else EXIT_OK


# ---------------------------------------------------------------- export


def _load_records(runs_dir: str) -> list[dict]:
    paths = sorted(glob.glob(os.path.join(runs_dir, "records", "*.json")))
    if not paths:
        raise CliConfigError(f"no run records under {runs_dir!r}")
    out = []
    for path in paths:
        with open(path, "r", encoding="utf-8") as fh:
            out.append(json.load(fh))
    return out


def cmd_export_dataset(args) -> int:
    records = _load_records(args.runs)
    records = [r for r in records if r["strategy"] == args.strategy]
    if not records:
        raise CliConfigError(f"no records for strategy {args.strategy!r}")
    ratios = tuple(float(x) for x in args.split.split(","))
    if len(ratios) != 3:
        raise CliConfigError("--split needs three comma-separated ratios")
    dataset = [
        DatasetRecord(
            formula=r["formula"],
            n=r["n"],
            m=r["m"],
            satisfiable=r["satisfiable"],
            provenance=r["provenance"],
            lcg_edges=build_lcg(formula_from_string(r["formula"], n=r["n"])).edges,
            tokens=tuple(r["tokens"]),
            energy=r["energy"],
            opt=r["opt"],
            ar=r["ar_expectation"],
            layers=r["layers"],
            config_digest=r["config_digest"],
            seed=r["instance_seed"],
        )
        for r in records
    ]
    train, val, test = split_records(dataset, ratios=ratios, seed=args.seed)
    base, ext = os.path.splitext(args.out)
    ext = ext or ".jsonl"
    export_jsonl(dataset, f"{base}{ext}")
    export_jsonl(train, f"{base}.train{ext}")
    export_jsonl(val, f"{base}.val{ext}")
    export_jsonl(test, f"{base}.test{ext}")
    print(
        f"exported {len(dataset)} records "
        f"(train {len(train)}, val {len(val)}, test {len(test)})"
    )
    return EXIT_OK


# ---------------------------------------------------------------- eval


def _evaluate_tokens(token_seq: list[str], formula: CnfFormula, diag, opt: int,
                     shots: int, seed: int) -> dict:
    verdict = validate_tokens(token_seq, formula.n)
    if not verdict.valid:
        return {"valid": False, "reason": verdict.reason}
    try:
        parsed_formula, circuit = detokenize(token_seq, n=formula.n)
    except (TokenError, ValueError) as err:
        return {"valid": False, "reason": str(err)}
    if parsed_formula.clauses != formula.clauses:
        return {"valid": False, "reason": "sequence encodes a different formula"}
    state, energy = evaluate_circuit(circuit, diag)
    counts = sample(state, shots, seed)
    return {
        "valid": True,
        "reason": None,
        "energy": energy,
        "ar_expectation": approximation_ratio(energy, formula.m, opt),
        "ar_best_shot": best_shot_ratio(counts, diag, opt),
        "stuck": stuck_metric(counts, diag),
        "layers": len(circuit.layers),
        "params": circuit.parameter_count,
    }


def _eval_formula(formula: CnfFormula, circuits: list[list[str]], shots: int,
                  seed: int) -> dict:
    diag = build_cost_diag(formula)
    opt = max_sat_opt(formula).opt
    results = [
        _evaluate_tokens(seq, formula, diag, opt, shots, derive_seed(seed, i))
        for i, seq in enumerate(circuits)
    ]
    valid_ars = [r["ar_expectation"] for r in results if r["valid"]]
    return {
        "n": formula.n,
        "m": formula.m,
        "opt": opt,
        "results": results,
        "any_valid": bool(valid_ars),
        "best_ar": max(valid_ars) if valid_ars else None,
        "avg_ar": statistics.fmean(valid_ars) if valid_ars else None,
    }


def cmd_eval_circuit(args) -> int:
    if args.requests:
        out_lines = []
        with open(args.requests, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                req = json.loads(line)
                formula = formula_from_string(req["formula"], n=req["n"])
                report = _eval_formula(
                    formula,
                    [list(c) for c in req["circuits"]],
                    req.get("shots", args.shots),
                    req.get("seed", args.seed),
                )
                report["id"] = req["id"]
                out_lines.append(json.dumps(report, separators=(",", ":")))
        payload = "\n".join(out_lines) + "\n"
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(payload)
        else:
            sys.stdout.write(payload)
        return EXIT_OK

    if not args.instance or not args.tokens:
        raise CliConfigError("--instance and --tokens are required without --requests")
    formula = canonicalize(read_dimacs(args.instance))
    with open(args.tokens, "r", encoding="utf-8") as fh:
        circuits = [line.split() for line in fh if line.strip()]
    if not circuits:
        raise CliConfigError(f"no token sequences in {args.tokens!r}")
    report = _eval_formula(formula, circuits, args.shots, args.seed)
    report["instance"] = args.instance
    payload = json.dumps(report, indent=1)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(payload + "\n")
    else:
        print(payload)
    return EXIT_OK


# ---------------------------------------------------------------- plotdata


def _op_type(name: str) -> str:
    if name == "XMIXER":
        return "XMIXER"
    letters = [c for c in name if c in "XYZ"]
    return "".join(letters)


def cmd_plotdata(args) -> int:
    try:
        records = _load_records(args.runs)
    except CliConfigError:
        records = []
    rows: list[dict] = []
    if args.kind == "energy-trace":
        fields = ["formula_id", "strategy", "gamma0", "layer", "energy", "ar"]
        for r in records:
            for i, energy in enumerate(r["energy_trace"], start=1):
                rows.append(
                    {
                        "formula_id": r["formula_id"],
                        "strategy": r["strategy"],
                        "gamma0": r["gamma0"],
                        "layer": i,
                        "energy": f"{energy:.12g}",
                        "ar": f"{approximation_ratio(energy, r['m'], r['opt']):.12g}",
                    }
                )
    elif args.kind == "max-grad":
        fields = ["formula_id", "strategy", "gamma0", "layer", "max_gradient"]
        for r in records:
            for i, g in enumerate(r["max_gradient_trace"], start=1):
                rows.append(
                    {
                        "formula_id": r["formula_id"],
                        "strategy": r["strategy"],
                        "gamma0": r["gamma0"],
                        "layer": i,
                        "max_gradient": f"{g:.12g}",
                    }
                )
    elif args.kind == "op-histogram":
        fields = ["strategy", "gamma0", "layer", "op_type", "count"]
        hist: dict[tuple, int] = {}
        for r in records:
            for i, names in enumerate(r["op_names_per_layer"], start=1):
                for name in names:
                    key = (r["strategy"], r["gamma0"], i, _op_type(name))
                    hist[key] = hist.get(key, 0) + 1
        for (strategy, gamma0, layer, op_type), count in sorted(
            hist.items(), key=lambda kv: (kv[0][0], str(kv[0][1]), kv[0][2], kv[0][3])
        ):
            rows.append(
                {
                    "strategy": strategy,
                    "gamma0": gamma0,
                    "layer": layer,
                    "op_type": op_type,
                    "count": count,
                }
            )
    elif args.kind == "param-bands":
        fields = [
            "strategy",
            "gamma0",
            "layer",
            "gamma_mean",
            "gamma_std",
            "beta_mean",
            "beta_std",
        ]
        buckets: dict[tuple, tuple[list[float], list[float]]] = {}
        for r in records:
            _, circuit = detokenize(list(r["tokens"]), n=r["n"])
            for i, layer in enumerate(circuit.layers, start=1):
                key = (r["strategy"], r["gamma0"], i)
                gammas, betas = buckets.setdefault(key, ([], []))
                gammas.append(layer.gamma)
                betas.extend(beta for _, beta in layer.mixers)
        for (strategy, gamma0, layer), (gammas, betas) in sorted(
            buckets.items(), key=lambda kv: (kv[0][0], str(kv[0][1]), kv[0][2])
        ):
            rows.append(
                {
                    "strategy": strategy,
                    "gamma0": gamma0,
                    "layer": layer,
                    "gamma_mean": f"{statistics.fmean(gammas):.12g}",
                    "gamma_std": f"{statistics.pstdev(gammas):.12g}",
                    "beta_mean": f"{statistics.fmean(betas):.12g}",
                    "beta_std": f"{statistics.pstdev(betas):.12g}",
                }
            )
    else:
        raise CliConfigError(f"unknown plotdata kind {args.kind!r}")

    out = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        writer = csv.DictWriter(out, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if args.out:
            out.close()
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mosaic-qaoa",
        description="Adaptive QAOA circuit synthesis for Max-E3-SAT",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate DIMACS instances plus a manifest")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--kind", default="mixed", choices=["uniform", "balanced", "mixed"])
    p.add_argument("--sat-filter", default="any", choices=["any", "sat", "unsat"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-attempts", type=int, default=1000)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("run", help="run the adaptive engine on instances")
    p.add_argument("--instances", required=True, help=".cnf file or directory")
    p.add_argument("--strategy", default="mosaic",
                   choices=["adapt", "tetris", "mosaic", "all"])
    p.add_argument("--gamma0", default="0.5", help="initial phase angle or 'grid'")
    p.add_argument("--shots", type=int, default=1000)
    p.add_argument("--max-layers", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--record-pool-scores", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("export-dataset", help="build JSONL datasets from run records")
    p.add_argument("--runs", required=True)
    p.add_argument("--strategy", default="mosaic",
                   choices=["adapt", "tetris", "mosaic"])
    p.add_argument("--split", default="0.8,0.1,0.1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_dataset)

    p = sub.add_parser("eval-circuit", help="score externally produced circuits")
    p.add_argument("--instance", help="DIMACS instance (single mode)")
    p.add_argument("--tokens", help="file with one token sequence per line")
    p.add_argument("--requests", help="JSONL batch requests")
    p.add_argument("--shots", type=int, default=1000)
    p.add_argument("--samples", type=int, default=5,
                   help="declared samples per formula (informational)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval_circuit)

    p = sub.add_parser("plotdata", help="emit tidy CSVs from run records")
    p.add_argument("--runs", required=True)
    p.add_argument(
        "--kind",
        required=True,
        choices=["energy-trace", "max-grad", "op-histogram", "param-bands"],
    )
    p.add_argument("--out")
    p.set_defaults(func=cmd_plotdata)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (SatError, DatasetError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_PARTIAL


if __name__ == "__main__":
    sys.exit(main())
