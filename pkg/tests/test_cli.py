import json
import os

import pytest

from mosaic_qaoa.cli import main
from mosaic_qaoa.dataset import import_jsonl
from mosaic_qaoa.sat import read_dimacs


@pytest.fixture(scope="module")
def instance_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("instances")
    code = main([
        "generate", "--n", "5", "--count", "4", "--kind", "mixed",
        "--sat-filter", "sat", "--seed", "11", "--out", str(out),
    ])
    assert code == 0
    return out


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory, instance_dir):
    out = tmp_path_factory.mktemp("runs")
    code = main([
        "run", "--instances", str(instance_dir), "--strategy", "all",
        "--gamma0", "0.5", "--shots", "200", "--out", str(out),
    ])
    assert code == 0
    return out


class TestGenerate:
    def test_mixed_is_half_and_half(self, instance_dir):
        manifest = json.load(open(instance_dir / "manifest.json"))
        kinds = [e["kind"] for e in manifest["entries"]]
        assert kinds.count("uniform") == 2 and kinds.count("balanced") == 2

    def test_sat_filter_manifest_opt_equals_m(self, instance_dir):
        manifest = json.load(open(instance_dir / "manifest.json"))
        for entry in manifest["entries"]:
            assert entry["opt"] == entry["m"]
            assert entry["satisfiable"]

    def test_files_parse_and_match_manifest(self, instance_dir):
        manifest = json.load(open(instance_dir / "manifest.json"))
        for entry in manifest["entries"]:
            f = read_dimacs(instance_dir / entry["file"])
            assert f.n == entry["n"] and f.m == entry["m"]
            assert f.seed == entry["seed"]

    def test_rerun_identical_bytes(self, instance_dir, tmp_path):
        again = tmp_path / "again"
        code = main([
            "generate", "--n", "5", "--count", "4", "--kind", "mixed",
            "--sat-filter", "sat", "--seed", "11", "--out", str(again),
        ])
        assert code == 0
        for name in sorted(os.listdir(instance_dir)):
            a = (instance_dir / name).read_bytes()
            b = (again / name).read_bytes()
            assert a == b, name

    def test_manifest_embeds_digest_and_version(self, instance_dir):
        manifest = json.load(open(instance_dir / "manifest.json"))
        assert manifest["config_digest"]
        assert manifest["version"]


class TestRun:
    def test_three_rows_per_instance(self, run_dir):
        lines = (run_dir / "metrics.csv").read_text().strip().splitlines()
        assert len(lines) == 1 + 4 * 3
        header = lines[0].split(",")
        assert header == [
            "formula_id", "strategy", "gamma0", "ar", "layers", "params",
            "stuck", "stop_reason", "wall_time",
        ]

    def test_records_have_digest_and_version(self, run_dir):
        records = sorted(os.listdir(run_dir / "records"))
        assert len(records) == 12
        rec = json.load(open(run_dir / "records" / records[0]))
        assert rec["config_digest"] and rec["version"]

    def test_record_energy_matches_tokens(self, run_dir):
        # The stored energy is the energy of the detokenized circuit.
        from mosaic_qaoa.engine import evaluate_circuit
        from mosaic_qaoa.sat import formula_from_string
        from mosaic_qaoa.simulator import build_cost_diag
        from mosaic_qaoa.tokens import detokenize

        for name in sorted(os.listdir(run_dir / "records")):
            rec = json.load(open(run_dir / "records" / name))
            formula = formula_from_string(rec["formula"], n=rec["n"])
            _, circuit = detokenize(rec["tokens"], n=rec["n"])
            _, energy = evaluate_circuit(circuit, build_cost_diag(formula))
            assert energy == pytest.approx(rec["energy"], abs=1e-12)

    def test_deterministic_record_bodies(self, run_dir, instance_dir, tmp_path):
        again = tmp_path / "again"
        code = main([
            "run", "--instances", str(instance_dir), "--strategy", "all",
            "--gamma0", "0.5", "--shots", "200", "--out", str(again),
        ])
        assert code == 0
        for name in sorted(os.listdir(run_dir / "records")):
            a = (run_dir / "records" / name).read_bytes()
            b = (again / "records" / name).read_bytes()
            assert a == b, name
        # CSV bodies match except the wall_time column.
        strip = lambda text: [
            ",".join(line.split(",")[:-1]) for line in text.splitlines()
        ]
        assert strip((run_dir / "metrics.csv").read_text()) == strip(
            (again / "metrics.csv").read_text()
        )

    def test_gamma_grid_keeps_best(self, instance_dir, tmp_path):
        out = tmp_path / "grid"
        code = main([
            "run", "--instances", str(instance_dir / "uniform_0000.cnf"),
            "--strategy", "mosaic", "--gamma0", "grid", "--shots", "100",
            "--out", str(out),
        ])
        assert code == 0
        records = os.listdir(out / "records")
        assert records == ["uniform_0000__mosaic__ggrid.json"]
        rec = json.load(open(out / "records" / records[0]))
        assert rec["gamma0"] in (0.01, 0.1, 0.5)
        assert rec["gamma_grid"] is True

    def test_config_error_exit_code(self, tmp_path):
        code = main([
            "run", "--instances", str(tmp_path / "missing"), "--out",
            str(tmp_path / "out"),
        ])
        assert code == 3

    def test_bad_gamma_exit_code(self, instance_dir, tmp_path):
        code = main([
            "run", "--instances", str(instance_dir), "--gamma0", "nope",
            "--out", str(tmp_path / "x"),
        ])
        assert code == 3


class TestExportDataset:
    def test_split_files(self, run_dir, tmp_path):
        out = tmp_path / "data.jsonl"
        code = main([
            "export-dataset", "--runs", str(run_dir), "--strategy", "mosaic",
            "--out", str(out),
        ])
        assert code == 0
        full = import_jsonl(out)
        train = import_jsonl(tmp_path / "data.train.jsonl")
        val = import_jsonl(tmp_path / "data.val.jsonl")
        test = import_jsonl(tmp_path / "data.test.jsonl")
        assert len(full) == 4
        assert len(train) + len(val) + len(test) == 4
        assert {r.formula for r in train + val + test} == {r.formula for r in full}

    def test_duplicate_formulas_hard_error(self, run_dir, tmp_path, capsys):
        # Two gamma variants of the same formula collide on export.
        dup_dir = tmp_path / "dups"
        records_dir = dup_dir / "records"
        records_dir.mkdir(parents=True)
        src = sorted(os.listdir(run_dir / "records"))
        body = (run_dir / "records" / src[0]).read_text()
        for name in ("a.json", "b.json"):
            (records_dir / name).write_text(body)
        code = main([
            "export-dataset", "--runs", str(dup_dir), "--strategy",
            json.loads(body)["strategy"], "--out", str(tmp_path / "d.jsonl"),
        ])
        assert code == 2


class TestEvalCircuit:
    def test_reproduces_recorded_energy(self, run_dir, instance_dir, tmp_path):
        records = sorted(os.listdir(run_dir / "records"))
        rec = json.load(open(run_dir / "records" / records[0]))
        tokens_file = tmp_path / "tokens.txt"
        tokens_file.write_text(" ".join(rec["tokens"]) + "\n")
        out_file = tmp_path / "eval.json"
        code = main([
            "eval-circuit",
            "--instance", str(instance_dir / (rec["formula_id"] + ".cnf")),
            "--tokens", str(tokens_file),
            "--shots", "200",
            "--out", str(out_file),
        ])
        assert code == 0
        report = json.load(open(out_file))
        result = report["results"][0]
        assert result["valid"]
        assert result["energy"] == pytest.approx(rec["energy"], abs=1e-9)
        assert result["ar_expectation"] == pytest.approx(
            rec["ar_expectation"], abs=1e-9
        )

    def test_invalid_circuit_is_verdict_not_failure(self, instance_dir, tmp_path):
        tokens_file = tmp_path / "bad.txt"
        tokens_file.write_text("<bos> x1 x1 x2 | <end_of_formula> <eos>\n")
        out_file = tmp_path / "eval.json"
        code = main([
            "eval-circuit",
            "--instance", str(instance_dir / "uniform_0000.cnf"),
            "--tokens", str(tokens_file), "--out", str(out_file),
        ])
        assert code == 0
        report = json.load(open(out_file))
        assert report["results"][0]["valid"] is False
        assert report["results"][0]["reason"]

    def test_batch_requests(self, run_dir, tmp_path):
        records = sorted(os.listdir(run_dir / "records"))
        rec = json.load(open(run_dir / "records" / records[0]))
        req_file = tmp_path / "req.jsonl"
        req_file.write_text(
            json.dumps(
                {
                    "id": "q1",
                    "n": rec["n"],
                    "formula": rec["formula"],
                    "circuits": [rec["tokens"], ["<bos>", "bad"]],
                    "shots": 100,
                    "seed": 5,
                }
            )
            + "\n"
        )
        resp_file = tmp_path / "resp.jsonl"
        code = main([
            "eval-circuit", "--requests", str(req_file), "--out", str(resp_file),
        ])
        assert code == 0
        resp = json.loads(resp_file.read_text().splitlines()[0])
        assert resp["id"] == "q1"
        assert resp["results"][0]["valid"] is True
        assert resp["results"][1]["valid"] is False
        assert resp["any_valid"] and resp["best_ar"] is not None


class TestPlotdata:
    @pytest.mark.parametrize(
        "kind,expected_header",
        [
            ("energy-trace", "formula_id,strategy,gamma0,layer,energy,ar"),
            ("max-grad", "formula_id,strategy,gamma0,layer,max_gradient"),
            ("op-histogram", "strategy,gamma0,layer,op_type,count"),
            (
                "param-bands",
                "strategy,gamma0,layer,gamma_mean,gamma_std,beta_mean,beta_std",
            ),
        ],
    )
    def test_kinds_and_headers(self, run_dir, tmp_path, kind, expected_header):
        out = tmp_path / f"{kind}.csv"
        code = main([
            "plotdata", "--runs", str(run_dir), "--kind", kind, "--out", str(out),
        ])
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == expected_header
        assert len(lines) > 1

    def test_histogram_counts_sum_to_selected_operators(self, run_dir, tmp_path):
        out = tmp_path / "hist.csv"
        main(["plotdata", "--runs", str(run_dir), "--kind", "op-histogram",
              "--out", str(out)])
        total = 0
        for line in out.read_text().strip().splitlines()[1:]:
            total += int(line.rsplit(",", 1)[1])
        expected = 0
        for name in os.listdir(run_dir / "records"):
            rec = json.load(open(run_dir / "records" / name))
            expected += sum(len(ops) for ops in rec["op_names_per_layer"])
        assert total == expected

    def test_empty_run_dir_gives_header_only(self, tmp_path):
        empty = tmp_path / "empty"
        (empty / "records").mkdir(parents=True)
        out = tmp_path / "out.csv"
        code = main([
            "plotdata", "--runs", str(empty), "--kind", "energy-trace",
            "--out", str(out),
        ])
        assert code == 0
        assert out.read_text().strip() == "formula_id,strategy,gamma0,layer,energy,ar"

    def test_deterministic_reemission(self, run_dir, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for path in (a, b):
            main(["plotdata", "--runs", str(run_dir), "--kind", "energy-trace",
                  "--out", str(path)])
        assert a.read_bytes() == b.read_bytes()
