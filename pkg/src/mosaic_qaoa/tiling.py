"""Disjoint-operator selection for one mixer layer.

Candidates form an incompatibility graph (edge = overlapping qubit
support, node weight = |gradient|). Three selectors:

* exact maximum-weight independent set via branch and bound (the dense
  tiling strategy),
* greedy descending-weight packing,
* single best operator.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass

from .pool import PoolOperator, ScoredPool

log = logging.getLogger(__name__)

DEFAULT_MWIS_TIME_BUDGET = 5.0


@dataclass(frozen=True)
class IncompatibilityGraph:
    ops: tuple[PoolOperator, ...]
    weights: tuple[float, ...]
    adjacency: tuple[int, ...]  # bitmask of conflicting node indices

    @property
    def node_count(self) -> int:
        return len(self.ops)

    def edges(self) -> list[tuple[int, int]]:
        out = []
        for i in range(self.node_count):
            mask = self.adjacency[i] >> (i + 1)
            j = i + 1
            while mask:
                if mask & 1:
                    out.append((i, j))
                mask >>= 1
                j += 1
        return out

    def dump(self, path) -> None:
        """Edge-list text format for cross-checking with external solvers."""
        with open(path, "w", encoding="utf-8") as fh:
            for i, (op, w) in enumerate(zip(self.ops, self.weights)):
                fh.write(f"w {i} {w!r} {op.name}\n")
            for u, v in self.edges():
                fh.write(f"{u} {v}\n")


@dataclass(frozen=True)
class TileSelection:
    chosen: tuple[PoolOperator, ...]
    total_weight: float


def build_incompatibility_graph(scored: ScoredPool) -> IncompatibilityGraph:
    ops = tuple(op for op, _ in scored.entries)
    weights = tuple(abs(g) for _, g in scored.entries)
    supports = [op.support for op in ops]
    adjacency = [0] * len(ops)
    for i in range(len(ops)):
        for j in range(i + 1, len(ops)):
            if supports[i] & supports[j]:
                adjacency[i] |= 1 << j
                adjacency[j] |= 1 << i
    return IncompatibilityGraph(ops=ops, weights=weights, adjacency=tuple(adjacency))


def _selection(graph: IncompatibilityGraph, chosen_indices: list[int]) -> TileSelection:
    ordered = sorted(chosen_indices, key=lambda i: graph.ops[i].name)
    return TileSelection(
        chosen=tuple(graph.ops[i] for i in ordered),
        total_weight=sum(graph.weights[i] for i in ordered),
    )


def _greedy_indices(graph: IncompatibilityGraph) -> list[int]:
    order = sorted(
        range(graph.node_count),
        key=lambda i: (-graph.weights[i], graph.ops[i].name),
    )
    blocked = 0
    chosen = []
    for i in order:
        if not (blocked >> i) & 1:
            chosen.append(i)
            blocked |= graph.adjacency[i] | (1 << i)
    return chosen


def solve_greedy_tetris(graph: IncompatibilityGraph) -> TileSelection:
    """Repeatedly take the heaviest node compatible with the current
    selection; ties break on operator name."""
    return _selection(graph, _greedy_indices(graph))


def select_single_adapt(scored: ScoredPool) -> TileSelection:
    """The single operator with the largest |gradient|; name-ordered ties."""
    if not scored.entries:
        return TileSelection(chosen=(), total_weight=0.0)
    best_op, best_g = min(scored.entries, key=lambda e: (-abs(e[1]), e[0].name))
    return TileSelection(chosen=(best_op,), total_weight=abs(best_g))


def solve_mwis_exact(
    graph: IncompatibilityGraph, time_budget: float = DEFAULT_MWIS_TIME_BUDGET
) -> TileSelection:
    """Exact maximum-weight independent set.

    Branch and bound on the heaviest remaining vertex (include/exclude)
    with the greedy solution as incumbent and the sum-of-remaining-weights
    bound. Falls back to the greedy selection with a warning if the time
    budget runs out.
    """
    node_count = graph.node_count
    if node_count == 0:
        return TileSelection(chosen=(), total_weight=0.0)

    weights = graph.weights
    adjacency = graph.adjacency
    # Nodes sorted by descending weight; the heaviest remaining vertex is
    # then the first set bit in this ordering.
    order = sorted(range(node_count), key=lambda i: (-weights[i], graph.ops[i].name))
    rank_of = {node: rank for rank, node in enumerate(order)}
    w = [weights[node] for node in order]
    adj = [0] * node_count
    for node in range(node_count):
        mask = adjacency[node]
        remapped = 0
        j = 0
        while mask:
            if mask & 1:
                remapped |= 1 << rank_of[j]
            mask >>= 1
            j += 1
        adj[rank_of[node]] = remapped
    suffix_sum = [0.0] * (node_count + 1)
    for rank in range(node_count - 1, -1, -1):
        suffix_sum[rank] = suffix_sum[rank + 1] + w[rank]

    greedy = _greedy_indices(graph)
    best_weight = sum(weights[i] for i in greedy)
    best_mask = 0
    for i in greedy:
        best_mask |= 1 << rank_of[i]

    deadline = time.monotonic() + time_budget
    timed_out = False
    full = (1 << node_count) - 1

    def remaining_bound(mask: int, lowest_rank: int) -> float:
        # Cheap admissible bound: total weight of every remaining node.
        total = 0.0
        mask &= ~((1 << lowest_rank) - 1)
        while mask:
            lsb = mask & -mask
            total += w[lsb.bit_length() - 1]
            mask ^= lsb
        return total

    stack = [(full, 0.0, 0, 0)]  # (available mask, weight, chosen mask, min rank)
    while stack:
        if time.monotonic() > deadline:
            timed_out = True
            break
        available, weight, chosen, min_rank = stack.pop()
        shifted = available >> min_rank
        if not shifted:
            if weight > best_weight:
                best_weight = weight
                best_mask = chosen
            continue
        rank = min_rank + ((shifted & -shifted).bit_length() - 1)
        if weight + suffix_sum[rank] <= best_weight:
            continue
        if weight + remaining_bound(available, rank) <= best_weight:
            continue
        picked = 1 << rank
        # Exclude branch first so the include branch is explored first
        # (LIFO), deepening on heavy vertices early.
        stack.append((available & ~picked, weight, chosen, rank + 1))
        inc_weight = weight + w[rank]
        if inc_weight > best_weight:
            best_weight = inc_weight
            best_mask = chosen | picked
        stack.append((available & ~(picked | adj[rank]), inc_weight, chosen | picked, rank + 1))

    if timed_out:
        log.warning(
            "independent-set search hit the %.1fs budget on %d nodes; "
            "using the greedy selection",
            time_budget,
            node_count,
        )
        return solve_greedy_tetris(graph)

    chosen_nodes = [order[rank] for rank in range(node_count) if (best_mask >> rank) & 1]
    return _selection(graph, chosen_nodes)
