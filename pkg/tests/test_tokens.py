import math
import random

import pytest

from mosaic_qaoa.engine import AnsatzCircuit, EngineConfig, Strategy, run, wrapped_circuit
from mosaic_qaoa.sat import canonicalize, formula_to_string, generate_uniform
from mosaic_qaoa.tokens import (
    ANGLE_BINS,
    ANGLE_STEP,
    SequenceTooLongError,
    TokenError,
    angle_to_token,
    detokenize,
    token_to_angle,
    tokenize,
    validate_tokens,
)

from conftest import random_circuit


def circular_distance(a: float, b: float) -> float:
    d = math.fmod(abs(a - b), 2 * math.pi)
    return min(d, 2 * math.pi - d)


class TestAngleQuantization:
    def test_zero_is_exact(self):
        assert token_to_angle(angle_to_token(0.0)) == 0.0

    def test_pi_is_a_center(self):
        assert token_to_angle(angle_to_token(math.pi)) == pytest.approx(math.pi)

    def test_bin_count(self):
        tokens = {angle_to_token(-math.pi + i * 0.001) for i in range(6284)}
        assert len(tokens) <= ANGLE_BINS

    @pytest.mark.parametrize("seed", range(200))
    def test_half_bin_error(self, seed):
        rng = random.Random(seed)
        theta = rng.uniform(-20, 20)
        recovered = token_to_angle(angle_to_token(theta))
        assert circular_distance(theta, recovered) <= ANGLE_STEP / 2 + 1e-12

    def test_rejects_bad_angle_token(self):
        with pytest.raises(ValueError):
            token_to_angle("a1024")


class TestTokenize:
    def test_reference_formula_prefix(self):
        from mosaic_qaoa.sat import CnfFormula, Clause, Literal

        f = canonicalize(
            CnfFormula(
                4,
                (
                    Clause((Literal(2, False), Literal(4, True), Literal(3, False))),
                    Clause((Literal(1, False), Literal(3, False), Literal(2, False))),
                    Clause((Literal(1, False), Literal(2, False), Literal(4, True))),
                ),
            )
        )
        seq = tokenize(f, AnsatzCircuit(n=4))
        assert seq[:14] == [
            "<bos>",
            "x1", "x2", "x3", "|",
            "x1", "x2", "-x4", "|",
            "x2", "x3", "-x4", "|",
            "<end_of_formula>",
        ]

    def test_empty_circuit_eof_then_eos(self):
        f = canonicalize(generate_uniform(5, 3))
        seq = tokenize(f, AnsatzCircuit(n=5))
        eof = seq.index("<end_of_formula>")
        assert seq[eof + 1] == "<eos>"
        assert len(seq) == eof + 2

    def test_requires_canonical_formula(self):
        f = generate_uniform(5, 3)
        shuffled = list(f.clauses)
        shuffled.reverse()
        from mosaic_qaoa.sat import CnfFormula

        g = CnfFormula(f.n, tuple(shuffled))
        if not g.is_canonical():
            with pytest.raises(Exception):
                tokenize(g, AnsatzCircuit(n=5))

    def test_too_long_rejected(self):
        # ~80 clauses of formula tokens plus a deep wide circuit overflows.
        f = canonicalize(generate_uniform(19, 1))
        rng = random.Random(0)
        circuit = random_circuit(19, 90, rng)
        with pytest.raises(SequenceTooLongError):
            tokenize(f, circuit)


class TestRoundTrip:
    @pytest.mark.parametrize("seed", range(15))
    def test_formula_exact_angles_within_half_bin(self, seed):
        rng = random.Random(seed)
        f = canonicalize(generate_uniform(rng.choice([5, 6, 7]), seed))
        circuit = random_circuit(f.n, rng.randint(0, 4), rng)
        seq = tokenize(f, circuit)
        f2, c2 = detokenize(seq, n=f.n)
        assert f2.clauses == f.clauses
        assert len(c2.layers) == len(circuit.layers)
        for original, recovered in zip(circuit.layers, c2.layers):
            assert circular_distance(original.gamma, recovered.gamma) <= ANGLE_STEP / 2 + 1e-12
            assert [op.name for op, _ in original.mixers] == [
                op.name for op, _ in recovered.mixers
            ]
            for (_, b1), (_, b2) in zip(original.mixers, recovered.mixers):
                assert circular_distance(b1, b2) <= ANGLE_STEP / 2 + 1e-12

    def test_engine_circuit_round_trip(self):
        f = canonicalize(generate_uniform(5, 12))
        result = run(f, EngineConfig(gamma0=0.5, strategy=Strategy.MOSAIC))
        circuit = wrapped_circuit(result.circuit)
        seq = tokenize(f, circuit)
        f2, c2 = detokenize(seq, n=f.n)
        assert formula_to_string(f2) == formula_to_string(f)
        assert c2.parameters() == pytest.approx(circuit.parameters(), abs=ANGLE_STEP / 2 + 1e-12)

    def test_infers_n_from_sequence(self):
        f = canonicalize(generate_uniform(6, 4))
        seq = tokenize(f, AnsatzCircuit(n=6))
        f2, _ = detokenize(seq)
        assert f2.n == 6


class TestValidate:
    def good_sequence(self):
        f = canonicalize(generate_uniform(5, 8))
        rng = random.Random(1)
        return tokenize(f, random_circuit(5, 2, rng)), f.n

    def test_well_formed_valid(self):
        seq, n = self.good_sequence()
        assert validate_tokens(seq, n).valid

    def test_engine_output_valid(self):
        f = canonicalize(generate_uniform(5, 44))
        result = run(f, EngineConfig(gamma0=0.5, strategy=Strategy.TETRIS))
        seq = tokenize(f, wrapped_circuit(result.circuit))
        assert validate_tokens(seq, f.n).valid

    def test_overlapping_layer_invalid(self):
        seq = [
            "<bos>", "x1", "x2", "x3", "|", "<end_of_formula>",
            "<new_layer_p>", "X1", "a511", "X1X2", "a511", "a511",
            "<eos>",
        ]
        verdict = validate_tokens(seq, 3)
        assert not verdict.valid
        assert "overlap" in verdict.reason

    def test_missing_eos_invalid(self):
        seq, n = self.good_sequence()
        assert not validate_tokens(seq[:-1], n).valid

    def test_qubit_out_of_range_invalid(self):
        seq = [
            "<bos>", "x1", "x2", "x3", "|", "<end_of_formula>",
            "<new_layer_p>", "X7", "a511", "a511", "<eos>",
        ]
        verdict = validate_tokens(seq, 3)
        assert not verdict.valid and "exceeds" in verdict.reason

    def test_variable_out_of_range_invalid(self):
        seq = [
            "<bos>", "x1", "x2", "x9", "|", "<end_of_formula>", "<eos>",
        ]
        assert not validate_tokens(seq, 3).valid

    def test_pad_after_eos_ok(self):
        seq, n = self.good_sequence()
        assert validate_tokens(seq + ["<pad>", "<pad>"], n).valid

    def test_non_pad_after_eos_invalid(self):
        seq, n = self.good_sequence()
        assert not validate_tokens(seq + ["X1"], n).valid

    def test_wrong_clause_width_invalid(self):
        seq = ["<bos>", "x1", "x2", "|", "<end_of_formula>", "<eos>"]
        assert not validate_tokens(seq, 3).valid

    def test_layer_without_mixer_invalid(self):
        seq = [
            "<bos>", "x1", "x2", "x3", "|", "<end_of_formula>",
            "<new_layer_p>", "a511", "<eos>",
        ]
        assert not validate_tokens(seq, 3).valid

    def test_parse_error_names_first_bad_token(self):
        seq = ["<bos>", "x1", "BAD", "x3", "|", "<end_of_formula>", "<eos>"]
        with pytest.raises(TokenError) as err:
            detokenize(seq, n=3)
        assert "token 2" in str(err.value)
        assert "BAD" in str(err.value)

    def test_global_mixer_alone_valid(self):
        seq = [
            "<bos>", "x1", "x2", "x3", "|", "<end_of_formula>",
            "<new_layer_p>", "XMIXER", "a511", "a511", "<eos>",
        ]
        assert validate_tokens(seq, 3).valid

    def test_global_mixer_with_another_op_invalid(self):
        seq = [
            "<bos>", "x1", "x2", "x3", "|", "<end_of_formula>",
            "<new_layer_p>", "XMIXER", "a511", "Y2", "a511", "a511",
            "<eos>",
        ]
        assert not validate_tokens(seq, 3).valid
