"""Adaptive QAOA circuit synthesis for Max-E3-SAT.

Subpackages cover instance generation and exact Max-SAT (sat), the
statevector simulator (simulator, kernels), the mixer pool (pool),
disjoint-operator tiling (tiling), the adaptive loop (engine),
metrics/tokenization/dataset export (metrics, tokens, dataset), and the
command-line surface (cli).
"""

__version__ = "0.1.0"
