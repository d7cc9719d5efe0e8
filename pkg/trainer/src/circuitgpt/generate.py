"""Sampling circuits for a formula prompt."""

import torch

from .config import TrainerConfig
from .graph_embedding import embedding_fn
from .model import CircuitGPT
from .vocab import BOS, CLAUSE_SEP, END_OF_FORMULA, Vocabulary


def formula_prompt(formula: str) -> list[str]:
    """Canonical formula text ('x1 x2 -x4 | ...') to prompt tokens."""
    tokens = [BOS]
    for block in formula.split("|"):
        lits = block.split()
        if not lits:
            continue
        tokens.extend(lits)
        tokens.append(CLAUSE_SEP)
    tokens.append(END_OF_FORMULA)
    return tokens


def generate(
    model: CircuitGPT,
    vocab: Vocabulary,
    formula: str,
    k: int,
    temperature: float,
    seed: int = 0,
    record: dict | None = None,
    cfg: TrainerConfig | None = None,
) -> list[list[str]]:
    """k sampled token sequences (prompt included), each ending at the
    end token or the context limit."""
    prompt = vocab.encode(formula_prompt(formula))
    graph = None
    mode = cfg.embedding_mode if cfg is not None else "none"
    embed = embedding_fn(mode)
    if embed is not None:
        if record is None:
            raise ValueError("graph embedding mode needs the dataset record")
        vector = embed(2 * record["n"] + record["m"], record["lcg_edges"])
        graph = torch.tensor(vector, dtype=torch.float32)
    out = []
    for i in range(k):
        generator = torch.Generator().manual_seed(seed * 1_000_003 + i)
        ids = model.sample(prompt, vocab.eos_id, temperature, generator, graph)
        out.append(vocab.decode(ids))
    return out
