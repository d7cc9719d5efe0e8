"""3-CNF instances: representation, random generators, canonical form,
exact Max-SAT oracle, and DIMACS I/O.

Every clause holds exactly three literals over pairwise distinct
variables. Literals order by variable index with the positive literal
before the negated one on ties; clauses order lexicographically by
their sorted literals. A formula is canonical when both orders hold.
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass, field

import numpy as np

UNIFORM_ALPHA = 4.26
BALANCED_ALPHA = 3.6
ALPHA_SPREAD = 0.2
DEFAULT_OPT_CAP = 24


class SatError(Exception):
    """Base error for instance construction and I/O."""


class InvalidDimensionError(SatError):
    pass


class GenerationFailureError(SatError):
    pass


class CapacityError(SatError):
    pass


class DimacsFormatError(SatError):
    pass


class Provenance(enum.Enum):
    UNIFORM = "uniform"
    BALANCED = "balanced"
    EXTERNAL = "external"


@dataclass(frozen=True, order=True)
class Literal:
    """A variable or its negation; orders by index, positive first."""

    var_index: int
    negated: bool

    def __post_init__(self):
        if self.var_index < 1:
            raise SatError(f"variable index must be >= 1, got {self.var_index}")

    def __str__(self) -> str:
        return f"-x{self.var_index}" if self.negated else f"x{self.var_index}"

    @staticmethod
    def from_dimacs(code: int) -> "Literal":
        if code == 0:
            raise SatError("literal code 0 is reserved as the clause terminator")
        return Literal(abs(code), code < 0)

    def to_dimacs(self) -> int:
        return -self.var_index if self.negated else self.var_index


@dataclass(frozen=True, order=True)
class Clause:
    """Disjunction of exactly three literals on distinct variables."""

    literals: tuple[Literal, Literal, Literal]

    def __post_init__(self):
        if len(self.literals) != 3:
            raise SatError(f"clause must have exactly 3 literals, got {len(self.literals)}")
        vars_ = {lit.var_index for lit in self.literals}
        if len(vars_) != 3:
            raise SatError(f"clause variables must be distinct: {self.literals}")
        object.__setattr__(self, "literals", tuple(sorted(self.literals)))

    def satisfied_by(self, assignment: int) -> bool:
        """True if any literal is true under the assignment bitmask
        (bit k of the mask is the value of variable k+1)."""
        for lit in self.literals:
            bit = (assignment >> (lit.var_index - 1)) & 1
            if bit != int(lit.negated):
                return True
        return False

    def __str__(self) -> str:
        return " ".join(str(lit) for lit in self.literals)


def clause(*codes: int) -> Clause:
    """Build a clause from signed DIMACS-style variable codes."""
    return Clause(tuple(Literal.from_dimacs(c) for c in codes))


@dataclass(frozen=True)
class CnfFormula:
    n: int
    clauses: tuple[Clause, ...]
    provenance: Provenance = Provenance.EXTERNAL
    seed: int = 0

    def __post_init__(self):
        for cl in self.clauses:
            for lit in cl.literals:
                if lit.var_index > self.n:
                    raise SatError(
                        f"literal {lit} exceeds variable count n={self.n}"
                    )

    @property
    def m(self) -> int:
        return len(self.clauses)

    def satisfied_count(self, assignment: int) -> int:
        return sum(cl.satisfied_by(assignment) for cl in self.clauses)

    def is_canonical(self) -> bool:
        return all(self.clauses[i] <= self.clauses[i + 1] for i in range(self.m - 1))

    def __str__(self) -> str:
        return " | ".join(str(cl) for cl in self.clauses)


@dataclass(frozen=True)
class MaxSatOptimum:
    opt: int
    witness: str = field(compare=False)

    def __post_init__(self):
        if self.opt < 1:
            raise SatError("a nonempty 3-CNF formula always satisfies >= 1 clause")


def canonicalize(f: CnfFormula) -> CnfFormula:
    """Sorted-clause copy of ``f``; idempotent, semantics preserving."""
    return CnfFormula(f.n, tuple(sorted(f.clauses)), f.provenance, f.seed)


def formula_to_string(f: CnfFormula) -> str:
    """Canonical text form: literals as x<i>/-x<i>, clauses joined by '|'."""
    return str(f)


def formula_from_string(
    s: str,
    n: int | None = None,
    provenance: Provenance = Provenance.EXTERNAL,
    seed: int = 0,
) -> CnfFormula:
    clauses = []
    max_var = 0
    for block in s.split("|"):
        toks = block.split()
        if not toks:
            continue
        lits = []
        for tok in toks:
            neg = tok.startswith("-")
            body = tok[1:] if neg else tok
            if not body.startswith("x") or not body[1:].isdigit():
                raise SatError(f"bad literal token {tok!r}")
            lits.append(Literal(int(body[1:]), neg))
            max_var = max(max_var, lits[-1].var_index)
        clauses.append(Clause(tuple(lits)))
    return CnfFormula(n if n is not None else max_var, tuple(clauses), provenance, seed)


def _clause_count(alpha0: float, rng: random.Random, n: int) -> int:
    alpha = alpha0 * (1.0 + rng.uniform(-ALPHA_SPREAD, ALPHA_SPREAD))
    return int(math.floor(alpha * n + 0.5))


def generate_uniform(n: int, seed: int) -> CnfFormula:
    """Draw round(alpha*n) clauses, alpha uniform in 4.26 +/- 20%, each
    clause on three distinct variables with fair-coin polarities.
    Duplicate clauses are redrawn."""
    if n < 3:
        raise InvalidDimensionError(f"need n >= 3 variables, got {n}")
    rng = random.Random(seed)
    m = _clause_count(UNIFORM_ALPHA, rng, n)
    seen: set[Clause] = set()
    clauses: list[Clause] = []
    attempts = 0
    max_attempts = 1000 * m
    while len(clauses) < m:
        attempts += 1
        if attempts > max_attempts:
            raise GenerationFailureError(
                f"could not draw {m} distinct clauses over n={n} variables "
                f"after {max_attempts} attempts"
            )
        vars_ = rng.sample(range(1, n + 1), 3)
        cl = Clause(tuple(Literal(v, rng.random() < 0.5) for v in vars_))
        if cl in seen:
            continue
        seen.add(cl)
        clauses.append(cl)
    return CnfFormula(n, tuple(clauses), Provenance.UNIFORM, seed)


def _balanced_attempt(n: int, m: int, rng: random.Random) -> tuple[Clause, ...] | None:
    # Spread 3m occurrence slots across variables (max-min <= 1), then
    # split each variable's count across polarities (|pos-neg| <= 1).
    total = 3 * m
    base, rem = divmod(total, n)
    order = list(range(1, n + 1))
    rng.shuffle(order)
    literals: list[Literal] = []
    for rank, v in enumerate(order):
        count = base + (1 if rank < rem else 0)
        pos = count // 2
        if count % 2 == 1 and rng.random() < 0.5:
            pos += 1
        literals.extend([Literal(v, False)] * pos)
        literals.extend([Literal(v, True)] * (count - pos))
    rng.shuffle(literals)

    slots = [literals[3 * i : 3 * i + 3] for i in range(m)]

    def conflict(tri: list[Literal]) -> bool:
        return len({lit.var_index for lit in tri}) != 3

    # Bounded swap repair: trade a duplicated-variable literal with a slot
    # from another clause when the swap fixes this clause without breaking
    # the other one.
    for _ in range(10 * m):
        bad = [i for i, tri in enumerate(slots) if conflict(tri)]
        if not bad:
            break
        i = bad[0]
        tri = slots[i]
        counts: dict[int, int] = {}
        for lit in tri:
            counts[lit.var_index] = counts.get(lit.var_index, 0) + 1
        dup_pos = next(
            k for k, lit in enumerate(tri) if counts[lit.var_index] > 1
        )
        j = rng.randrange(m)
        k = rng.randrange(3)
        if j == i:
            continue
        a, b = tri[dup_pos], slots[j][k]
        tri[dup_pos], slots[j][k] = b, a
        if conflict(tri) or conflict(slots[j]):
            tri[dup_pos], slots[j][k] = a, b
    if any(conflict(tri) for tri in slots):
        return None
    clauses = tuple(Clause(tuple(tri)) for tri in slots)
    if len(set(clauses)) != m:
        return None
    return clauses


def generate_balanced(n: int, seed: int) -> CnfFormula:
    """Variable-regular instance: occurrence counts across variables and
    the per-variable polarity split each differ by at most one."""
    if n < 3:
        raise InvalidDimensionError(f"need n >= 3 variables, got {n}")
    rng = random.Random(seed)
    m = _clause_count(BALANCED_ALPHA, rng, n)
    max_retries = 50
    for _ in range(max_retries):
        clauses = _balanced_attempt(n, m, rng)
        if clauses is not None:
            return CnfFormula(n, clauses, Provenance.BALANCED, seed)
    raise GenerationFailureError(
        f"balanced construction failed for n={n}, m={m} after "
        f"{max_retries} reseeded attempts (swap repair kept a conflict "
        f"or a duplicate clause)"
    )


def violated_counts(f: CnfFormula) -> np.ndarray:
    """Number of violated clauses for every assignment 0..2**n-1."""
    n_assign = 1 << f.n
    indices = np.arange(n_assign, dtype=np.uint64)
    counts = np.zeros(n_assign, dtype=np.int16)
    for cl in f.clauses:
        violated = np.ones(n_assign, dtype=bool)
        for lit in cl.literals:
            bits = (indices >> np.uint64(lit.var_index - 1)) & np.uint64(1)
            # A literal is false when its bit equals the negation flag.
            violated &= bits == np.uint64(int(lit.negated))
        counts += violated
    return counts


def assignment_to_bitstring(assignment: int, n: int) -> str:
    """Variable values as text, x1 leftmost."""
    return "".join("1" if (assignment >> k) & 1 else "0" for k in range(n))


def bitstring_to_assignment(bits: str) -> int:
    return sum(1 << k for k, c in enumerate(bits) if c == "1")


def max_sat_opt(f: CnfFormula, cap: int = DEFAULT_OPT_CAP) -> MaxSatOptimum:
    """Exhaustive maximum satisfied-clause count with one witness."""
    if f.n > cap:
        raise CapacityError(f"n={f.n} exceeds the exhaustive-search cap {cap}")
    counts = violated_counts(f)
    best = int(np.argmin(counts))
    opt = f.m - int(counts[best])
    return MaxSatOptimum(opt=opt, witness=assignment_to_bitstring(best, f.n))


def read_dimacs(path) -> CnfFormula:
    """Parse a 3-CNF DIMACS file. Clause width other than 3, repeated
    variables, and tautologies are rejected."""
    n = None
    m_declared = None
    provenance = Provenance.EXTERNAL
    seed = 0
    clauses: list[Clause] = []
    pending: list[int] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("c"):
                body = line[1:].strip()
                if body.startswith("kind:"):
                    try:
                        provenance = Provenance(body.split(":", 1)[1].strip())
                    except ValueError:
                        pass
                elif body.startswith("seed:"):
                    try:
                        seed = int(body.split(":", 1)[1].strip())
                    except ValueError:
                        pass
                continue
            if line.startswith("p"):
                parts = line.split()
                if len(parts) != 4 or parts[1] != "cnf":
                    raise DimacsFormatError(f"{path}:{lineno}: bad problem line {line!r}")
                n, m_declared = int(parts[2]), int(parts[3])
                continue
            if n is None:
                raise DimacsFormatError(f"{path}:{lineno}: clause before problem line")
            for tok in line.split():
                code = int(tok)
                if code == 0:
                    if len(pending) != 3:
                        raise DimacsFormatError(
                            f"{path}:{lineno}: clause width {len(pending)}, expected 3"
                        )
                    vars_seen = [abs(c) for c in pending]
                    if len(set(vars_seen)) != 3:
                        raise DimacsFormatError(
                            f"{path}:{lineno}: repeated variable in clause {pending}"
                        )
                    clauses.append(clause(*pending))
                    pending = []
                else:
                    if abs(code) > n:
                        raise DimacsFormatError(
                            f"{path}:{lineno}: variable {abs(code)} exceeds n={n}"
                        )
                    pending.append(code)
    if pending:
        raise DimacsFormatError(f"{path}: unterminated clause {pending}")
    if m_declared is not None and m_declared != len(clauses):
        raise DimacsFormatError(
            f"{path}: header declares {m_declared} clauses, found {len(clauses)}"
        )
    return CnfFormula(n, tuple(clauses), provenance, seed)


def write_dimacs(f: CnfFormula, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"c kind: {f.provenance.value}\n")
        fh.write(f"c seed: {f.seed}\n")
        fh.write(f"p cnf {f.n} {f.m}\n")
        for cl in f.clauses:
            codes = " ".join(str(lit.to_dimacs()) for lit in cl.literals)
            fh.write(f"{codes} 0\n")
