"""Token stream format for (formula, circuit) pairs.

Sequence layout::

    <bos> lit lit lit | lit lit lit | ... <end_of_formula>
    ( <new_layer_p> op angle (op angle)* angle )* <eos> <pad>*

Each clause is three literal tokens closed by the ``|`` separator. A
layer lists its mixer operators, each followed by its rotation angle,
and ends with the layer's cost-phase angle. Angles are quantized to
1024 uniform bins over (-pi, pi] whose centers include 0 exactly; token
``a<k>`` decodes to ``(k - 511) * 2*pi/1024``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .engine import AnsatzCircuit, AnsatzLayer
from .pool import PoolOperator
from .sat import Clause, CnfFormula, Literal, Provenance, SatError

BOS = "<bos>"
END_OF_FORMULA = "<end_of_formula>"
EOS = "<eos>"
PAD = "<pad>"
NEW_LAYER = "<new_layer_p>"
CLAUSE_SEP = "|"

ANGLE_BINS = 1024
ANGLE_STEP = 2.0 * math.pi / ANGLE_BINS
MAX_SEQUENCE_LENGTH = 1024

_LITERAL_RE = re.compile(r"^(-?)x([1-9]\d*)$")
_OPERATOR_RE = re.compile(r"^(?:XMIXER|[XY][1-9]\d*(?:[XYZ][1-9]\d*)?)$")
_ANGLE_RE = re.compile(r"^a(\d{1,4})$")


class TokenError(ValueError):
    """Malformed token sequence; carries the offending position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"token {position}: {message}")
        self.position = position


class SequenceTooLongError(ValueError):
    pass


def angle_to_token(theta: float) -> str:
    """Nearest bin center on the circle (rotations are 2*pi periodic)."""
    wrapped = math.fmod(theta + math.pi, 2.0 * math.pi)
    if wrapped <= 0.0:
        wrapped += 2.0 * math.pi
    wrapped -= math.pi
    k = (round(wrapped / ANGLE_STEP) + ANGLE_BINS // 2 - 1) % ANGLE_BINS
    return f"a{k}"


def token_to_angle(token: str) -> float:
    match = _ANGLE_RE.match(token)
    if not match or int(match.group(1)) >= ANGLE_BINS:
        raise ValueError(f"not an angle token: {token!r}")
    return (int(match.group(1)) - (ANGLE_BINS // 2 - 1)) * ANGLE_STEP


def is_angle_token(token: str) -> bool:
    match = _ANGLE_RE.match(token)
    return bool(match) and int(match.group(1)) < ANGLE_BINS


def is_operator_token(token: str) -> bool:
    return bool(_OPERATOR_RE.match(token))


def is_literal_token(token: str) -> bool:
    return bool(_LITERAL_RE.match(token))


def formula_tokens(f: CnfFormula) -> list[str]:
    out = [BOS]
    for cl in f.clauses:
        out.extend(str(lit) for lit in cl.literals)
        out.append(CLAUSE_SEP)
    out.append(END_OF_FORMULA)
    return out


def circuit_tokens(circuit: AnsatzCircuit) -> list[str]:
    out = []
    for layer in circuit.layers:
        out.append(NEW_LAYER)
        for op, beta in layer.mixers:
            out.append(op.name)
            out.append(angle_to_token(beta))
        out.append(angle_to_token(layer.gamma))
    out.append(EOS)
    return out


def tokenize(f: CnfFormula, circuit: AnsatzCircuit) -> list[str]:
    if not f.is_canonical():
        raise SatError("tokenize requires a canonical formula")
    seq = formula_tokens(f) + circuit_tokens(circuit)
    if len(seq) > MAX_SEQUENCE_LENGTH:
        raise SequenceTooLongError(
            f"sequence length {len(seq)} exceeds {MAX_SEQUENCE_LENGTH}"
        )
    return seq


@dataclass
class _Parsed:
    clauses: list[tuple[Literal, Literal, Literal]]
    layers: list[tuple[list[tuple[str, float]], float]]  # (mixers, gamma)
    max_var: int
    max_qubit: int
    uses_global_mixer: bool
    layer_op_names: list[list[str]]


def _parse(tokens: list[str]) -> _Parsed:
    """Strict single-pass grammar walk; raises TokenError at the first
    offending token."""
    if len(tokens) > MAX_SEQUENCE_LENGTH:
        raise TokenError("sequence exceeds the context limit", MAX_SEQUENCE_LENGTH)
    pos = 0

    def peek() -> str | None:
        return tokens[pos] if pos < len(tokens) else None

    if peek() != BOS:
        raise TokenError(f"expected {BOS}, found {peek()!r}", pos)
    pos += 1

    clauses: list[tuple[Literal, Literal, Literal]] = []
    max_var = 0
    current: list[Literal] = []
    while True:
        tok = peek()
        if tok is None:
            raise TokenError("sequence ended inside the formula region", pos)
        if tok == END_OF_FORMULA:
            if current:
                raise TokenError(
                    f"clause with {len(current)} literals not closed by '|'", pos
                )
            pos += 1
            break
        if tok == CLAUSE_SEP:
            if len(current) != 3:
                raise TokenError(
                    f"clause has {len(current)} literals, expected 3", pos
                )
            if len({lit.var_index for lit in current}) != 3:
                raise TokenError("repeated variable in clause", pos)
            clauses.append(tuple(current))
            current = []
            pos += 1
            continue
        match = _LITERAL_RE.match(tok)
        if not match:
            raise TokenError(f"expected a literal, found {tok!r}", pos)
        if len(current) == 3:
            raise TokenError("more than 3 literals in a clause", pos)
        lit = Literal(int(match.group(2)), match.group(1) == "-")
        max_var = max(max_var, lit.var_index)
        current.append(lit)
        pos += 1

    layers: list[tuple[list[tuple[str, float]], float]] = []
    layer_op_names: list[list[str]] = []
    max_qubit = 0
    uses_global = False
    while True:
        tok = peek()
        if tok is None:
            raise TokenError(f"missing {EOS}", pos)
        if tok == EOS:
            pos += 1
            break
        if tok != NEW_LAYER:
            raise TokenError(f"expected {NEW_LAYER} or {EOS}, found {tok!r}", pos)
        pos += 1
        mixers: list[tuple[str, float]] = []
        names: list[str] = []
        gamma: float | None = None
        while gamma is None:
            tok = peek()
            if tok is None:
                raise TokenError("sequence ended inside a layer", pos)
            if is_operator_token(tok):
                name = tok
                pos += 1
                angle_tok = peek()
                if angle_tok is None or not is_angle_token(angle_tok):
                    raise TokenError(
                        f"operator {name} must be followed by an angle, "
                        f"found {angle_tok!r}",
                        pos,
                    )
                mixers.append((name, token_to_angle(angle_tok)))
                names.append(name)
                if name == "XMIXER":
                    uses_global = True
                else:
                    try:
                        op = PoolOperator.from_name(name, 1)
                    except ValueError as err:
                        raise TokenError(str(err), pos - 1)
                    max_qubit = max(max_qubit, *op.qubits)
                pos += 1
            elif is_angle_token(tok):
                if not mixers:
                    raise TokenError("layer has no mixer before its phase angle", pos)
                gamma = token_to_angle(tok)
                pos += 1
            else:
                raise TokenError(
                    f"expected an operator or angle token, found {tok!r}", pos
                )
        layers.append((mixers, gamma))
        layer_op_names.append(names)

    while pos < len(tokens):
        if tokens[pos] != PAD:
            raise TokenError(f"unexpected token {tokens[pos]!r} after {EOS}", pos)
        pos += 1

    return _Parsed(
        clauses=clauses,
        layers=layers,
        max_var=max_var,
        max_qubit=max_qubit,
        uses_global_mixer=uses_global,
        layer_op_names=layer_op_names,
    )


def detokenize(
    tokens: list[str], n: int | None = None
) -> tuple[CnfFormula, AnsatzCircuit]:
    """Inverse of tokenize. ``n`` defaults to the largest variable or
    qubit index mentioned anywhere in the sequence."""
    parsed = _parse(tokens)
    resolved_n = n if n is not None else max(parsed.max_var, parsed.max_qubit)
    formula = CnfFormula(
        resolved_n,
        tuple(Clause(lits) for lits in parsed.clauses),
        Provenance.EXTERNAL,
    )
    layers = []
    for mixers, gamma in parsed.layers:
        ops = tuple(
            (PoolOperator.from_name(name, resolved_n), beta) for name, beta in mixers
        )
        layers.append(AnsatzLayer(gamma=gamma, mixers=ops))
    return formula, AnsatzCircuit(n=resolved_n, layers=tuple(layers))


@dataclass(frozen=True)
class TokenVerdict:
    valid: bool
    reason: str | None = None


def validate_tokens(tokens: list[str], n: int) -> TokenVerdict:
    """Structural validity: grammar, per-layer disjoint supports, index
    bounds, and a present end marker."""
    try:
        parsed = _parse(tokens)
    except TokenError as err:
        return TokenVerdict(valid=False, reason=str(err))
    if parsed.max_var > n:
        return TokenVerdict(
            valid=False, reason=f"variable x{parsed.max_var} exceeds n={n}"
        )
    if parsed.max_qubit > n:
        return TokenVerdict(
            valid=False, reason=f"operator qubit {parsed.max_qubit} exceeds n={n}"
        )
    for i, names in enumerate(parsed.layer_op_names):
        used: set[int] = set()
        for name in names:
            support = set(PoolOperator.from_name(name, n).support)
            if used & support:
                return TokenVerdict(
                    valid=False,
                    reason=f"layer {i + 1}: {name} overlaps an earlier mixer",
                )
            used |= support
    return TokenVerdict(valid=True)
