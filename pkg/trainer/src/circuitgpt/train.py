"""Training loop: AdamW with cosine decay, gradient clipping, periodic
validation on a couple of sampled batches, checkpointing, and a loss
curve CSV."""

import csv
import math
import os

import torch

from .config import TrainerConfig
from .data import EncodedDataset, encode_records, load_records, sample_batch
from .graph_embedding import embedding_fn
from .model import CircuitGPT, masked_cross_entropy
from .vocab import Vocabulary


def lr_at(step: int, cfg: TrainerConfig) -> float:
    warmup = min(50, cfg.max_iters // 10)
    if step < warmup:
        return cfg.learning_rate * (step + 1) / warmup
    progress = (step - warmup) / max(1, cfg.max_iters - warmup)
    return 0.5 * cfg.learning_rate * (1.0 + math.cos(math.pi * progress))


def estimate_val_loss(model, dataset: EncodedDataset, cfg: TrainerConfig,
                      generator) -> float:
    model.eval()
    losses = []
    with torch.no_grad():
        for _ in range(cfg.val_batches):
            x, y, graph = sample_batch(dataset, cfg.batch_size, generator)
            losses.append(float(masked_cross_entropy(model(x, graph), y)))
    model.train()
    return sum(losses) / len(losses)


def train(
    train_path,
    val_path,
    cfg: TrainerConfig,
    out_dir,
    vocab: Vocabulary | None = None,
) -> dict:
    os.makedirs(out_dir, exist_ok=True)
    torch.manual_seed(cfg.seed)
    train_records = load_records(train_path)
    val_records = load_records(val_path) if val_path else train_records
    if vocab is None:
        vocab = Vocabulary.build(max(r["n"] for r in train_records + val_records))
    embed = embedding_fn(cfg.embedding_mode)
    train_set = encode_records(train_records, vocab, cfg.context, embed)
    val_set = encode_records(val_records, vocab, cfg.context, embed)

    model = CircuitGPT(cfg, vocab.size)
    optimizer = torch.optim.AdamW(model.parameters(), lr=cfg.learning_rate)
    generator = torch.Generator().manual_seed(cfg.seed)
    val_generator = torch.Generator().manual_seed(cfg.seed + 1)

    curve = []
    best_val = float("inf")
    model.train()
    for step in range(cfg.max_iters):
        for group in optimizer.param_groups:
            group["lr"] = lr_at(step, cfg)
        x, y, graph = sample_batch(train_set, cfg.batch_size, generator)
        loss = masked_cross_entropy(model(x, graph), y)
        optimizer.zero_grad(set_to_none=True)
        loss.backward()
        torch.nn.utils.clip_grad_norm_(model.parameters(), cfg.grad_clip)
        optimizer.step()

        if step % cfg.val_interval == 0 or step == cfg.max_iters - 1:
            val_loss = estimate_val_loss(model, val_set, cfg, val_generator)
            curve.append((step, loss.item(), val_loss))
            if val_loss < best_val:
                best_val = val_loss
                save_checkpoint(model, vocab, cfg, os.path.join(out_dir, "best.pt"))

    save_checkpoint(model, vocab, cfg, os.path.join(out_dir, "last.pt"))
    with open(os.path.join(out_dir, "loss_curve.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "train_loss", "val_loss"])
        writer.writerows(curve)
    return {
        "model": model,
        "vocab": vocab,
        "curve": curve,
        "best_val_loss": best_val,
    }


def save_checkpoint(model: CircuitGPT, vocab: Vocabulary, cfg: TrainerConfig, path):
    torch.save(
        {
            "state_dict": model.state_dict(),
            "config": cfg.__dict__,
            "n_max": vocab.n_max,
        },
        path,
    )


def load_checkpoint(path) -> tuple[CircuitGPT, Vocabulary, TrainerConfig]:
    payload = torch.load(path, map_location="cpu", weights_only=False)
    cfg = TrainerConfig(**payload["config"])
    vocab = Vocabulary.build(payload["n_max"])
    model = CircuitGPT(cfg, vocab.size)
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model, vocab, cfg
