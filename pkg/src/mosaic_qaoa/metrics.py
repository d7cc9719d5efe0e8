"""Run-quality metrics and the literal-clause graph."""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .sat import CnfFormula, bitstring_to_assignment
from .simulator import CostDiagonal, ShotCounts

log = logging.getLogger(__name__)

AR_TARGET = 0.999


@dataclass(frozen=True)
class EvalReport:
    ar_expectation: float
    ar_best_shot: float
    stuck: bool
    layers_to_999: int | None
    parameter_count: int


def approximation_ratio(energy: float, m: int, opt: int) -> float:
    """(satisfied in expectation) / (best satisfiable) = (m - E) / opt,
    clamped into [0, 1]."""
    if opt < 1:
        raise ValueError("opt must be >= 1 for a nonempty formula")
    ratio = (m - energy) / opt
    if ratio < 0.0 or ratio > 1.0:
        log.warning("approximation ratio %.12g clamped to [0, 1]", ratio)
        ratio = min(1.0, max(0.0, ratio))
    return ratio


def best_shot_ratio(counts: ShotCounts, diag: CostDiagonal, opt: int) -> float:
    """Approximation ratio of the best sampled bitstring."""
    best_violations = min(
        float(diag.values[bitstring_to_assignment(bits)]) for bits in counts.counts
    )
    return approximation_ratio(best_violations, diag.m, opt)


def stuck(counts: ShotCounts, diag: CostDiagonal) -> bool:
    """True when no sampled bitstring attains the ground energy."""
    return all(
        float(diag.values[bitstring_to_assignment(bits)]) > diag.ground_energy
        for bits in counts.counts
    )


def layers_to_target(
    trace, m: int, opt: int, target: float = AR_TARGET
) -> int | None:
    """1-based index of the first layer whose expectation ratio reaches
    the target, or None."""
    for i, energy in enumerate(trace):
        if approximation_ratio(energy, m, opt) >= target:
            return i + 1
    return None


@dataclass(frozen=True)
class LiteralClauseGraph:
    """Bipartite occurrence graph: nodes 0..n-1 are positive literals,
    n..2n-1 negated literals, 2n..2n+m-1 clauses."""

    n: int
    m: int
    edges: tuple[tuple[int, int], ...]

    @property
    def node_count(self) -> int:
        return 2 * self.n + self.m


def build_lcg(f: CnfFormula) -> LiteralClauseGraph:
    edges = []
    for r, cl in enumerate(f.clauses):
        clause_node = 2 * f.n + r
        for lit in cl.literals:
            lit_node = (f.n if lit.negated else 0) + lit.var_index - 1
            edges.append((lit_node, clause_node))
    return LiteralClauseGraph(n=f.n, m=f.m, edges=tuple(sorted(edges)))


def error_rates(verdicts_per_formula) -> tuple[float, float]:
    """(formula error rate, circuit error rate), both as percentages.

    A formula errs when none of its sampled circuits is valid; the
    circuit rate counts invalid samples over all samples.
    """
    formulas = list(verdicts_per_formula)
    if not formulas or any(len(v) == 0 for v in formulas):
        raise ValueError("need at least one verdict per formula")
    failed_formulas = sum(1 for v in formulas if not any(v))
    total = sum(len(v) for v in formulas)
    invalid = sum(sum(1 for ok in v if not ok) for v in formulas)
    return 100.0 * failed_formulas / len(formulas), 100.0 * invalid / total
