from dataclasses import dataclass


@dataclass
class TrainerConfig:
    """Model and optimization settings.

    Architecture defaults match the reference setup (6 layers, 6 heads,
    384-dim embeddings, 1024-token context, dropout 0.2); shrink them
    for CPU-bound experiments.
    """

    n_layer: int = 6
    n_head: int = 6
    n_embd: int = 384
    context: int = 1024
    dropout: float = 0.2
    batch_size: int = 64
    learning_rate: float = 3e-4
    max_iters: int = 2000
    grad_clip: float = 1.0
    val_interval: int = 100
    val_batches: int = 2
    temperature: float = 1.0
    samples_per_formula: int = 5
    embedding_mode: str = "none"  # none | graph
    gamma_variant: str = "fixed_0.5"  # fixed_0.5 | grid
    seed: int = 0

    def __post_init__(self):
        if self.embedding_mode not in ("none", "graph"):
            raise ValueError(f"unknown embedding mode {self.embedding_mode!r}")
        if self.gamma_variant not in ("fixed_0.5", "grid"):
            raise ValueError(f"unknown gamma variant {self.gamma_variant!r}")
