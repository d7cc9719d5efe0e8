import pytest
import torch

from circuitgpt.config import TrainerConfig
from circuitgpt.data import encode_records, masked_targets, sample_batch
from circuitgpt.graph_embedding import embed_graph
from circuitgpt.model import CircuitGPT, masked_cross_entropy
from circuitgpt.vocab import Vocabulary


def toy_sequence(vocab: Vocabulary):
    tokens = ["<bos>", "x1", "x2", "x3", "|", "<end_of_formula>",
              "<new_layer_p>", "X1", "a500", "a511", "<eos>"]
    return vocab.encode(tokens)


class TestMaskedTargets:
    def test_region_bounds(self):
        vocab = Vocabulary.build(3)
        ids = toy_sequence(vocab)
        x, y = masked_targets(ids, vocab, len(ids) + 3)
        eof = ids.index(vocab.end_of_formula_id)
        eos = ids.index(vocab.eos_id)
        # Targets inside the circuit region survive, in order.
        assert y[eof:eos] == ids[eof + 1 : eos + 1]
        assert y[eos - 1] == vocab.eos_id  # end token is predicted
        # Everything else (formula region, padding) is masked to pad id.
        for t, target in enumerate(y):
            if not (eof <= t < eos):
                assert target == vocab.pad_id

    def test_inputs_keep_formula(self):
        vocab = Vocabulary.build(3)
        ids = toy_sequence(vocab)
        x, _ = masked_targets(ids, vocab, len(ids))
        assert x == ids[:-1]

    def test_loss_unchanged_by_formula_region_targets(self):
        # Perturbing formula tokens only affects inputs at positions the
        # loss never reads as targets.
        vocab = Vocabulary.build(3)
        torch.manual_seed(0)
        ids = toy_sequence(vocab)
        _, y = masked_targets(ids, vocab, len(ids))
        logits = torch.randn(1, len(y), vocab.size)
        base = masked_cross_entropy(logits, torch.tensor([y]))
        mutated = list(ids)
        mutated[1] = vocab.index["-x1"]  # formula-region change
        _, y2 = masked_targets(mutated, vocab, len(mutated))
        assert masked_cross_entropy(logits, torch.tensor([y2])) == base


class TestEncodeRecords:
    def fake_record(self, vocab, tokens):
        return {
            "tokens": tokens,
            "n": 3,
            "m": 1,
            "lcg_edges": [[0, 6], [1, 6], [2, 6]],
            "formula": "x1 x2 x3",
        }

    def test_over_context_hard_error(self):
        vocab = Vocabulary.build(3)
        record = self.fake_record(vocab, ["<bos>"] + ["x1"] * 40)
        with pytest.raises(ValueError, match="context"):
            encode_records([record], vocab, context=16)

    def test_graph_embeddings_attached(self, small_records):
        vocab = Vocabulary.build(max(r["n"] for r in small_records))
        dataset = encode_records(small_records, vocab, 1024, embed_graph)
        assert dataset.graph_embeddings.shape == (len(small_records), 96)

    def test_batches_are_reproducible(self, small_records):
        vocab = Vocabulary.build(max(r["n"] for r in small_records))
        dataset = encode_records(small_records, vocab, 1024)
        a = sample_batch(dataset, 4, torch.Generator().manual_seed(3))
        b = sample_batch(dataset, 4, torch.Generator().manual_seed(3))
        assert torch.equal(a[0], b[0]) and torch.equal(a[1], b[1])
