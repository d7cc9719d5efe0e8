"""Decoder-only transformer with an optional graph-embedding summand.

When a graph vector is supplied it is projected to the embedding width
and added at every input position, alongside the token and positional
embeddings; the rest of the network is identical with or without it.
Sampling uses per-block key/value caches so each step runs one token.
"""

import torch
import torch.nn as nn
import torch.nn.functional as F

from .config import TrainerConfig
from .graph_embedding import EMBED_DIM


def masked_cross_entropy(logits: torch.Tensor, targets: torch.Tensor) -> torch.Tensor:
    """Mean next-token loss over nonzero targets (pad id 0 carries both
    padding and the masked formula region)."""
    return F.cross_entropy(
        logits.reshape(-1, logits.size(-1)), targets.reshape(-1), ignore_index=0
    )


class CausalSelfAttention(nn.Module):
    def __init__(self, cfg: TrainerConfig):
        super().__init__()
        assert cfg.n_embd % cfg.n_head == 0
        self.n_head = cfg.n_head
        self.qkv = nn.Linear(cfg.n_embd, 3 * cfg.n_embd)
        self.proj = nn.Linear(cfg.n_embd, cfg.n_embd)
        self.attn_dropout = cfg.dropout
        self.resid_dropout = nn.Dropout(cfg.dropout)

    def forward(self, x, cache=None):
        b, t, c = x.shape
        q, k, v = self.qkv(x).split(c, dim=2)
        q = q.view(b, t, self.n_head, c // self.n_head).transpose(1, 2)
        k = k.view(b, t, self.n_head, c // self.n_head).transpose(1, 2)
        v = v.view(b, t, self.n_head, c // self.n_head).transpose(1, 2)
        if cache is not None and cache[0] is not None:
            k = torch.cat([cache[0], k], dim=2)
            v = torch.cat([cache[1], v], dim=2)
        # With a warm cache the new queries sit at the end of the key
        # axis, so plain full attention is already causal.
        causal = cache is None or cache[0] is None
        y = F.scaled_dot_product_attention(
            q, k, v,
            dropout_p=self.attn_dropout if self.training else 0.0,
            is_causal=causal and t > 1,
        )
        y = y.transpose(1, 2).contiguous().view(b, t, c)
        out = self.resid_dropout(self.proj(y))
        if cache is None:
            return out, None
        return out, (k, v)


class Block(nn.Module):
    def __init__(self, cfg: TrainerConfig):
        super().__init__()
        self.ln1 = nn.LayerNorm(cfg.n_embd)
        self.attn = CausalSelfAttention(cfg)
        self.ln2 = nn.LayerNorm(cfg.n_embd)
        self.mlp = nn.Sequential(
            nn.Linear(cfg.n_embd, 4 * cfg.n_embd),
            nn.GELU(),
            nn.Linear(4 * cfg.n_embd, cfg.n_embd),
            nn.Dropout(cfg.dropout),
        )

    def forward(self, x, cache=None):
        attn_out, new_cache = self.attn(self.ln1(x), cache)
        x = x + attn_out
        return x + self.mlp(self.ln2(x)), new_cache


class CircuitGPT(nn.Module):
    def __init__(self, cfg: TrainerConfig, vocab_size: int):
        super().__init__()
        self.cfg = cfg
        self.vocab_size = vocab_size
        self.tok_emb = nn.Embedding(vocab_size, cfg.n_embd)
        self.pos_emb = nn.Embedding(cfg.context, cfg.n_embd)
        self.graph_proj = nn.Linear(EMBED_DIM, cfg.n_embd)
        self.dropout = nn.Dropout(cfg.dropout)
        self.blocks = nn.ModuleList(Block(cfg) for _ in range(cfg.n_layer))
        self.ln_f = nn.LayerNorm(cfg.n_embd)
        self.lm_head = nn.Linear(cfg.n_embd, vocab_size, bias=False)
        self.lm_head.weight = self.tok_emb.weight
        self.apply(self._init_weights)

    @staticmethod
    def _init_weights(module):
        if isinstance(module, nn.Linear):
            nn.init.normal_(module.weight, mean=0.0, std=0.02)
            if module.bias is not None:
                nn.init.zeros_(module.bias)
        elif isinstance(module, nn.Embedding):
            nn.init.normal_(module.weight, mean=0.0, std=0.02)

    def _embed(self, ids, graph, position_offset=0):
        b, t = ids.shape
        positions = torch.arange(
            position_offset, position_offset + t, device=ids.device
        )
        x = self.tok_emb(ids) + self.pos_emb(positions)[None, :, :]
        if graph is not None:
            x = x + self.graph_proj(graph)[:, None, :]
        return self.dropout(x)

    def forward(self, ids: torch.Tensor, graph: torch.Tensor | None = None):
        if ids.size(1) > self.cfg.context:
            raise ValueError(
                f"sequence length {ids.size(1)} exceeds context {self.cfg.context}"
            )
        x = self._embed(ids, graph)
        for block in self.blocks:
            x, _ = block(x)
        return self.lm_head(self.ln_f(x))

    def _forward_cached(self, ids, graph, caches, position_offset):
        x = self._embed(ids, graph, position_offset)
        new_caches = []
        for block, cache in zip(self.blocks, caches):
            x, cache = block(x, cache)
            new_caches.append(cache)
        return self.lm_head(self.ln_f(x)), new_caches

    def parameter_count(self) -> int:
        return sum(p.numel() for p in self.parameters())

    @torch.no_grad()
    def sample(
        self,
        prompt_ids: list[int],
        eos_id: int,
        temperature: float,
        generator: torch.Generator,
        graph: torch.Tensor | None = None,
    ) -> list[int]:
        """One autoregressive completion, stopping at the end token or
        the context limit."""
        self.eval()
        ids = list(prompt_ids)
        prompt = torch.tensor(ids, dtype=torch.int64)[None, :]
        graph_batch = graph[None, :] if graph is not None else None
        caches = [(None, None)] * self.cfg.n_layer
        logits, caches = self._forward_cached(prompt, graph_batch, caches, 0)
        while len(ids) < self.cfg.context:
            step_logits = logits[0, -1]
            if temperature < 1e-4:
                nxt = int(torch.argmax(step_logits))
            else:
                probs = F.softmax(step_logits / temperature, dim=-1)
                nxt = int(torch.multinomial(probs, 1, generator=generator))
            ids.append(nxt)
            if nxt == eos_id or len(ids) >= self.cfg.context:
                break
            step = torch.tensor([[nxt]], dtype=torch.int64)
            logits, caches = self._forward_cached(
                step, graph_batch, caches, len(ids) - 1
            )
        return ids
