"""Adaptive ansatz construction: score the pool, select a disjoint
operator tile per strategy, append the layer, reoptimize everything
with BFGS, and stop on any configured criterion.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import kernels
from .pool import PoolOperator, ScoredPool, build_pool, score_pool
from .sat import CnfFormula
from .simulator import (
    CostDiagonal,
    StateVector,
    build_cost_diag,
    pauli_masks,
)
from .tiling import (
    DEFAULT_MWIS_TIME_BUDGET,
    TileSelection,
    build_incompatibility_graph,
    select_single_adapt,
    solve_greedy_tetris,
    solve_mwis_exact,
)


class Strategy(enum.Enum):
    ADAPT = "adapt"
    TETRIS = "tetris"
    MOSAIC = "mosaic"


class StopReason(enum.Enum):
    SCORE_STOPPER = "score_stopper"
    SLOW_STOPPER = "slow_stopper"
    LAYER_MAX = "layer_max"
    PARAMETER_MAX = "parameter_max"
    FLOOR_STOPPER = "floor_stopper"


class InvalidCircuitError(ValueError):
    pass


class NumericFailureError(RuntimeError):
    pass


@dataclass(frozen=True)
class AnsatzLayer:
    """One adaptive layer: a cost-phase angle followed by disjoint mixer
    rotations applied in listed order."""

    gamma: float
    mixers: tuple[tuple[PoolOperator, float], ...]

    def __post_init__(self):
        if not self.mixers:
            raise InvalidCircuitError("a layer needs at least one mixer")
        seen: set[int] = set()
        for op, _ in self.mixers:
            if seen & op.support:
                raise InvalidCircuitError(
                    f"mixer supports overlap within a layer: {op.name}"
                )
            seen |= op.support


@dataclass(frozen=True)
class AnsatzCircuit:
    n: int
    layers: tuple[AnsatzLayer, ...] = ()

    @property
    def parameter_count(self) -> int:
        return sum(1 + len(layer.mixers) for layer in self.layers)

    def parameters(self) -> np.ndarray:
        out = []
        for layer in self.layers:
            out.append(layer.gamma)
            out.extend(beta for _, beta in layer.mixers)
        return np.asarray(out, dtype=np.float64)

    def with_parameters(self, params: np.ndarray) -> "AnsatzCircuit":
        if len(params) != self.parameter_count:
            raise InvalidCircuitError(
                f"expected {self.parameter_count} parameters, got {len(params)}"
            )
        layers = []
        pos = 0
        for layer in self.layers:
            gamma = float(params[pos])
            pos += 1
            mixers = []
            for op, _ in layer.mixers:
                mixers.append((op, float(params[pos])))
                pos += 1
            layers.append(AnsatzLayer(gamma=gamma, mixers=tuple(mixers)))
        return AnsatzCircuit(n=self.n, layers=tuple(layers))


@dataclass(frozen=True)
class EngineConfig:
    gamma0: float = 0.5
    strategy: Strategy = Strategy.MOSAIC
    seed: int = 0
    layer_stopper_max: int = 20
    optimizer_tolerance: float = 1e-6
    optimizer_max_iterations: int = 1000
    slow_stopper_threshold: float = 1e-6
    slow_stopper_patience: int = 5
    gradient_threshold: float = 1e-6
    score_stopper_threshold: float = 1e-6
    parameter_stopper_max: int = 200
    floor_stopper_enabled: bool = False
    floor_stopper_energy: float = -math.inf
    floor_stopper_threshold: float = 0.1
    mwis_time_budget: float = DEFAULT_MWIS_TIME_BUDGET
    sim_cap: int | None = None
    record_pool_scores: bool = False

    def __post_init__(self):
        for name in (
            "optimizer_tolerance",
            "slow_stopper_threshold",
            "gradient_threshold",
            "score_stopper_threshold",
            "floor_stopper_threshold",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class RunResult:
    circuit: AnsatzCircuit
    energy_trace: tuple[float, ...]
    gradient_sum_trace: tuple[float, ...]
    max_gradient_trace: tuple[float, ...]
    stop_reason: StopReason
    final_state: StateVector
    final_energy: float
    wall_time: float
    pool_score_trace: tuple[tuple[tuple[str, float], ...], ...] = field(default=())


def _wrap_angle(theta: float) -> float:
    """Map to (-pi, pi]."""
    wrapped = math.fmod(theta + math.pi, 2.0 * math.pi)
    if wrapped <= 0.0:
        wrapped += 2.0 * math.pi
    return wrapped - math.pi


def wrapped_circuit(circuit: AnsatzCircuit) -> AnsatzCircuit:
    """Angles folded into (-pi, pi] for serialization; the cost spectrum
    is integer so the energy is unchanged."""
    params = np.array([_wrap_angle(t) for t in circuit.parameters()])
    return circuit.with_parameters(params)


def _gates(circuit: AnsatzCircuit):
    """Flatten the circuit into (kind, payload) gates in application
    order; kinds: 'phase' (cost diagonal) and 'mixer' (pool operator)."""
    gates = []
    for layer in circuit.layers:
        gates.append(("phase", None))
        for op, _ in layer.mixers:
            gates.append(("mixer", op))
    return gates


def _apply_gate(psi: np.ndarray, kind: str, payload, theta: float, values: np.ndarray):
    if kind == "phase":
        kernels.phase_inplace(psi, values, theta)
    elif payload.is_global_mixer:
        for q in payload.qubits:
            kernels.rotation_inplace(psi, 1 << (q - 1), 0, 0, theta)
    else:
        x_mask, zy_mask, y_count = pauli_masks(payload.axes, payload.qubits)
        kernels.rotation_inplace(psi, x_mask, zy_mask, y_count, theta)


def _generator_inner(lam: np.ndarray, psi: np.ndarray, kind: str, payload, values):
    """<lam| G |psi> for the gate generator G."""
    if kind == "phase":
        return kernels.diag_inner(lam, values, psi)
    if payload.is_global_mixer:
        return sum(
            kernels.pauli_inner(lam, psi, 1 << (q - 1), 0, 0) for q in payload.qubits
        )
    x_mask, zy_mask, y_count = pauli_masks(payload.axes, payload.qubits)
    return kernels.pauli_inner(lam, psi, x_mask, zy_mask, y_count)


def evaluate_circuit(
    circuit: AnsatzCircuit, diag: CostDiagonal
) -> tuple[StateVector, float]:
    """Run the circuit on the uniform superposition and return the final
    state with its cost expectation."""
    if circuit.n != diag.n:
        raise InvalidCircuitError(
            f"circuit on {circuit.n} qubits, diagonal on {diag.n}"
        )
    psi = StateVector.uniform(circuit.n).amplitudes
    params = circuit.parameters()
    pos = 0
    for kind, payload in _gates(circuit):
        _apply_gate(psi, kind, payload, float(params[pos]), diag.values)
        pos += 1
    state = StateVector(psi, circuit.n)
    return state, kernels.expectation(diag.values, psi)


def energy_and_grad(
    circuit: AnsatzCircuit, diag: CostDiagonal, params: np.ndarray
) -> tuple[float, np.ndarray]:
    """Energy plus its full parameter gradient from one forward pass and
    one reverse (adjoint) sweep: d<H>/dtheta_t = 2 Im <lam_t|G_t|psi_t>."""
    gates = _gates(circuit)
    if len(params) != len(gates):
        raise InvalidCircuitError(
            f"expected {len(gates)} parameters, got {len(params)}"
        )
    values = diag.values
    psi = StateVector.uniform(circuit.n).amplitudes
    for (kind, payload), theta in zip(gates, params):
        _apply_gate(psi, kind, payload, float(theta), values)
    energy = kernels.expectation(values, psi)
    lam = values * psi
    grad = np.zeros(len(gates))
    for t in range(len(gates) - 1, -1, -1):
        kind, payload = gates[t]
        grad[t] = 2.0 * _generator_inner(lam, psi, kind, payload, values).imag
        theta = float(params[t])
        _apply_gate(psi, kind, payload, -theta, values)
        _apply_gate(lam, kind, payload, -theta, values)
    return energy, grad


def optimize_params(
    circuit: AnsatzCircuit,
    diag: CostDiagonal,
    warm_start: np.ndarray,
    tolerance: float = 1e-6,
    max_iterations: int = 1000,
) -> tuple[np.ndarray, float]:
    """BFGS over all angles with analytic gradients; returns the best
    parameters seen (never worse than the warm start)."""
    if circuit.parameter_count == 0:
        _, energy = evaluate_circuit(circuit, diag)
        return np.zeros(0), energy
    warm_start = np.asarray(warm_start, dtype=np.float64)
    best = {"energy": math.inf, "params": warm_start}

    def objective(params):
        energy, grad = energy_and_grad(circuit, diag, params)
        if not math.isfinite(energy) or not np.all(np.isfinite(grad)):
            raise NumericFailureError(
                f"non-finite optimizer state at parameters {params!r}"
            )
        if energy < best["energy"]:
            best["energy"] = energy
            best["params"] = params.copy()
        return energy, grad

    result = minimize(
        objective,
        warm_start,
        jac=True,
        method="BFGS",
        options={"gtol": tolerance, "maxiter": max_iterations},
    )
    if result.fun < best["energy"]:
        best["energy"] = float(result.fun)
        best["params"] = np.asarray(result.x)
    return best["params"], float(best["energy"])


def select_tile(
    scored: ScoredPool, strategy: Strategy, mwis_time_budget: float
) -> TileSelection:
    if strategy is Strategy.ADAPT:
        return select_single_adapt(scored)
    graph = build_incompatibility_graph(scored)
    if strategy is Strategy.TETRIS:
        return solve_greedy_tetris(graph)
    return solve_mwis_exact(graph, time_budget=mwis_time_budget)


def run(f: CnfFormula, cfg: EngineConfig) -> RunResult:
    """Full adaptive loop from the uniform superposition."""
    start = time.monotonic()
    diag = build_cost_diag(f, cap=cfg.sim_cap)
    pool = build_pool(f.n)
    circuit = AnsatzCircuit(n=f.n)
    params = np.zeros(0)
    state = StateVector.uniform(f.n)

    energy_trace: list[float] = []
    gradient_sum_trace: list[float] = []
    max_gradient_trace: list[float] = []
    pool_score_trace: list[tuple[tuple[str, float], ...]] = []
    stop_reason = None

    while len(circuit.layers) < cfg.layer_stopper_max:
        scored = score_pool(
            state, diag, cfg.gamma0, pool, threshold=cfg.gradient_threshold
        )
        if scored.max_abs_score < cfg.score_stopper_threshold or not scored.entries:
            stop_reason = StopReason.SCORE_STOPPER
            break
        if cfg.record_pool_scores:
            pool_score_trace.append(
                tuple((op.name, g) for op, g in scored.entries)
            )
        tile = select_tile(scored, cfg.strategy, cfg.mwis_time_budget)
        layer = AnsatzLayer(
            gamma=cfg.gamma0, mixers=tuple((op, 0.0) for op in tile.chosen)
        )
        circuit = AnsatzCircuit(n=circuit.n, layers=circuit.layers + (layer,))
        warm = np.concatenate([params, layer_parameters(layer)])
        params, energy = optimize_params(
            circuit,
            diag,
            warm,
            tolerance=cfg.optimizer_tolerance,
            max_iterations=cfg.optimizer_max_iterations,
        )
        circuit = circuit.with_parameters(params)
        state, _ = evaluate_circuit(circuit, diag)

        energy_trace.append(energy)
        gradient_sum_trace.append(tile.total_weight)
        max_gradient_trace.append(scored.max_abs_score)

        if circuit.parameter_count >= cfg.parameter_stopper_max:
            stop_reason = StopReason.PARAMETER_MAX
            break
        if cfg.floor_stopper_enabled and energy <= (
            cfg.floor_stopper_energy + cfg.floor_stopper_threshold
        ):
            stop_reason = StopReason.FLOOR_STOPPER
            break
        patience = cfg.slow_stopper_patience
        if len(energy_trace) > patience:
            drop = energy_trace[-1 - patience] - energy_trace[-1]
            if drop < cfg.slow_stopper_threshold:
                stop_reason = StopReason.SLOW_STOPPER
                break

    if stop_reason is None:
        stop_reason = StopReason.LAYER_MAX
    final_energy = (
        energy_trace[-1] if energy_trace else float(np.mean(diag.values))
    )
    return RunResult(
        circuit=circuit,
        energy_trace=tuple(energy_trace),
        gradient_sum_trace=tuple(gradient_sum_trace),
        max_gradient_trace=tuple(max_gradient_trace),
        stop_reason=stop_reason,
        final_state=state,
        final_energy=final_energy,
        wall_time=time.monotonic() - start,
        pool_score_trace=tuple(pool_score_trace),
    )


def layer_parameters(layer: AnsatzLayer) -> np.ndarray:
    return np.asarray(
        [layer.gamma] + [beta for _, beta in layer.mixers], dtype=np.float64
    )
