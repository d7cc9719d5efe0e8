"""Dataset loading and batch preparation.

Records come from the simulator's JSONL export. Each token sequence
becomes a next-token pair (x, y) where y keeps only circuit-region
targets: positions strictly after <end_of_formula> up to and including
<eos>. Everything else (the formula prompt and padding) is replaced by
the pad id 0, which the loss ignores.
"""

import json
from dataclasses import dataclass

import numpy as np
import torch

from .graph_embedding import EMBED_DIM
from .vocab import Vocabulary


@dataclass
class EncodedDataset:
    inputs: torch.Tensor  # (records, T) int64
    targets: torch.Tensor  # (records, T) int64, masked
    graph_embeddings: torch.Tensor | None  # (records, EMBED_DIM) float32
    records: list
    vocab: Vocabulary
    seq_length: int


def load_records(path) -> list[dict]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out


def masked_targets(ids: list[int], vocab: Vocabulary, padded_length: int):
    """(x, y) with y nonzero only where the target sits in the circuit
    region."""
    eof = ids.index(vocab.end_of_formula_id)
    eos = ids.index(vocab.eos_id)
    x = ids + [vocab.pad_id] * (padded_length - len(ids))
    y = [vocab.pad_id] * (padded_length - 1)
    # y[t] predicts ids[t + 1]; keep targets ids[eof + 1] .. ids[eos].
    for t in range(eof, eos):
        y[t] = ids[t + 1]
    return x[:-1], y


def encode_records(
    records: list[dict], vocab: Vocabulary, context: int, embed=None
) -> EncodedDataset:
    lengths = [len(r["tokens"]) for r in records]
    longest = max(lengths)
    if longest > context:
        raise ValueError(
            f"sequence of {longest} tokens exceeds the {context}-token context"
        )
    xs, ys = [], []
    for record in records:
        ids = vocab.encode(record["tokens"])
        x, y = masked_targets(ids, vocab, longest)
        xs.append(x)
        ys.append(y)
    graph = None
    if embed is not None:
        vectors = [
            embed(2 * r["n"] + r["m"], r["lcg_edges"]) for r in records
        ]
        graph = torch.tensor(np.asarray(vectors), dtype=torch.float32)
        assert graph.shape[1] == EMBED_DIM
    return EncodedDataset(
        inputs=torch.tensor(xs, dtype=torch.int64),
        targets=torch.tensor(ys, dtype=torch.int64),
        graph_embeddings=graph,
        records=records,
        vocab=vocab,
        seq_length=longest,
    )


def sample_batch(dataset: EncodedDataset, batch_size: int, generator) -> tuple:
    idx = torch.randint(
        len(dataset.records), (batch_size,), generator=generator
    )
    graph = (
        dataset.graph_embeddings[idx]
        if dataset.graph_embeddings is not None
        else None
    )
    return dataset.inputs[idx], dataset.targets[idx], graph
