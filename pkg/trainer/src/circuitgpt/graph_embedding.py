"""Graph-level embedding of a literal-clause graph.

Characteristic functions of r-step random-walk distributions,
evaluated at a fixed grid and mean-pooled over nodes: for walk lengths
r in {1,2,3} and 16 evaluation points t, the embedding collects

    mean_v sum_u P^r[v,u] * exp(i * t * feat(u))

split into real and imaginary parts (dimension 3*16*2 = 96). The node
feature is the degree scaled into [0, 1]. Swap in another callable via
``embedding_fn`` to change the scheme.
"""

import numpy as np

WALK_LENGTHS = (1, 2, 3)
EVAL_POINTS = np.linspace(0.1, 2.0, 16)
EMBED_DIM = len(WALK_LENGTHS) * len(EVAL_POINTS) * 2


def embed_graph(node_count: int, edges) -> np.ndarray:
    """96-dim embedding; deterministic in the node-labeled graph."""
    adj = np.zeros((node_count, node_count))
    for u, v in edges:
        adj[u, v] = 1.0
        adj[v, u] = 1.0
    degree = adj.sum(axis=1)
    transition = np.where(
        degree[:, None] > 0, adj / np.maximum(degree[:, None], 1.0), 0.0
    )
    # Isolated nodes walk to themselves so every row stays a distribution.
    for v in np.flatnonzero(degree == 0):
        transition[v, v] = 1.0
    feature = degree / degree.max() if degree.max() > 0 else degree
    phases = np.exp(1j * np.outer(feature, EVAL_POINTS))  # (nodes, points)
    out = []
    walk = np.eye(node_count)
    for r in range(1, max(WALK_LENGTHS) + 1):
        walk = walk @ transition
        if r in WALK_LENGTHS:
            char = walk @ phases  # (nodes, points)
            pooled = char.mean(axis=0)
            out.extend(pooled.real)
            out.extend(pooled.imag)
    return np.asarray(out)


def embedding_fn(mode: str):
    """Resolve an embedding mode to a callable (node_count, edges) ->
    vector, or None for the plain-transformer pathway."""
    if mode == "none":
        return None
    if mode == "graph":
        return embed_graph
    raise ValueError(f"unknown embedding mode {mode!r}")
