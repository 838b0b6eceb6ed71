"""CNF formulas, DIMACS I/O, instance generators and a brute-force checker.

Variable ``j`` (1-based, as in DIMACS) is qubit ``b_{j-1}``. With the
most-significant-first site order of :mod:`qigrover.tn`, that qubit lives on
MPS site ``n - j``, and an assignment written as a bitstring
``b_{n-1} ... b_0`` has variable ``j`` at character ``n - j``.
"""
from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from . import _kernels
from .errors import DimacsParseError, InvalidInputError

BRUTE_FORCE_MAX_VARS = 30


class Literal(NamedTuple):
    var: int
    negated: bool


@dataclass(frozen=True)
class Clause:
    literals: tuple

    def __post_init__(self):
        lits = tuple(Literal(int(v), bool(neg)) for v, neg in self.literals)
        if not lits:
            raise InvalidInputError("a clause needs at least one literal")
        vars_ = [lit.var for lit in lits]
        if len(set(vars_)) != len(vars_):
            raise InvalidInputError(f"repeated variable in clause {vars_}")
        if min(vars_) < 1:
            raise InvalidInputError("variables are 1-based")
        object.__setattr__(self, "literals", lits)

    @classmethod
    def from_ints(cls, ints: Iterable[int]) -> "Clause":
        """Build from DIMACS-style signed integers, e.g. ``(1, -2, 3)``."""
        return cls(tuple((abs(i), i < 0) for i in ints))

    def to_ints(self) -> tuple:
        return tuple(-lit.var if lit.negated else lit.var for lit in self.literals)

    @property
    def variables(self) -> tuple:
        return tuple(lit.var for lit in self.literals)

    def falsifier(self) -> dict:
        """The value of each clause variable in the unique falsifying assignment."""
        return {lit.var: int(lit.negated) for lit in self.literals}

    def sites(self, n: int) -> tuple:
        return tuple(n - v for v in self.variables)

    def span(self, n: int) -> int:
        s = self.sites(n)
        return max(s) - min(s)


@dataclass(frozen=True)
class CnfFormula:
    n_vars: int
    clauses: tuple = ()

    def __post_init__(self):
        if self.n_vars < 1:
            raise InvalidInputError("n_vars must be positive")
        cl = tuple(c if isinstance(c, Clause) else Clause.from_ints(c) for c in self.clauses)
        for c in cl:
            if max(c.variables) > self.n_vars:
                raise InvalidInputError(f"clause {c.to_ints()} exceeds n_vars={self.n_vars}")
        object.__setattr__(self, "clauses", cl)

    @property
    def n_clauses(self) -> int:
        return len(self.clauses)


@dataclass(frozen=True)
class Quasi1dSpec:
    n_vars: int
    block_size: int
    n_intra: int
    l_inter: int
    seed: int = 0

    def __post_init__(self):
        if self.block_size < 3:
            raise InvalidInputError("block_size must be at least 3")
        if self.n_vars < 1 or self.n_vars % self.block_size:
            raise InvalidInputError("block_size must divide n_vars")
        if self.n_intra < 0 or self.l_inter < 0:
            raise InvalidInputError("clause counts must be nonnegative")

    @property
    def n_blocks(self) -> int:
        return self.n_vars // self.block_size


# ---------------------------------------------------------------------------
# DIMACS
# ---------------------------------------------------------------------------


def parse_dimacs(text) -> CnfFormula:
    """Parse DIMACS CNF from ``bytes`` or ``str``.

    Clauses may span lines. A line holding only ``%`` ends the clause section
    (some benchmark collections append it).
    """
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("utf-8")
    n_vars = n_clauses = None
    header_line = 0
    clauses = []
    current: list[int] = []
    current_line = 0
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            if n_vars is not None:
                raise DimacsParseError("duplicate header", lineno)
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsParseError(f"malformed header {line!r}", lineno)
            try:
                n_vars, n_clauses = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsParseError(f"malformed header {line!r}", lineno) from None
            if n_vars < 1 or n_clauses < 0:
                raise DimacsParseError("header counts out of range", lineno)
            header_line = lineno
            continue
        if n_vars is None:
            raise DimacsParseError("clause before the 'p cnf' header", lineno)
        for tok in line.split():
            try:
                v = int(tok)
            except ValueError:
                raise DimacsParseError(f"bad token {tok!r}", lineno) from None
            if v == 0:
                if not current:
                    raise DimacsParseError("empty clause", lineno)
                try:
                    clauses.append(Clause.from_ints(current))
                except InvalidInputError as exc:
                    raise DimacsParseError(str(exc), current_line) from None
                current = []
                continue
            if abs(v) > n_vars:
                raise DimacsParseError(f"variable {abs(v)} exceeds n_vars={n_vars}", lineno)
            if not current:
                current_line = lineno
            current.append(v)
    if n_vars is None:
        raise DimacsParseError("missing 'p cnf' header", None)
    if current:
        raise DimacsParseError(f"unterminated clause starting on line {current_line}", None)
    if len(clauses) != n_clauses:
        raise DimacsParseError(
            f"header declares {n_clauses} clauses but {len(clauses)} were read", header_line
        )
    return CnfFormula(n_vars, tuple(clauses))


def write_dimacs(f: CnfFormula, comments: Iterable[str] = ()) -> bytes:
    out = [f"c {c}" for c in comments]
    out.append(f"p cnf {f.n_vars} {f.n_clauses}")
    out.extend(" ".join(str(i) for i in c.to_ints()) + " 0" for c in f.clauses)
    return ("\n".join(out) + "\n").encode("ascii")


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------


def _random_clause(rng: np.random.Generator, pool: np.ndarray) -> Clause:
    vars_ = rng.choice(pool, size=3, replace=False)
    negs = rng.random(3) < 0.5
    return Clause(tuple((int(v), bool(b)) for v, b in zip(vars_, negs)))


def gen_random_3sat(n: int, ratio: float, seed: int) -> CnfFormula:
    """Uniform random 3-SAT with ``round(ratio * n)`` clauses.

    Variables within a clause are distinct; duplicate clauses are not
    rejected.
    """
    if n < 3:
        raise InvalidInputError("random 3-SAT needs n >= 3")
    rng = np.random.default_rng(seed)
    pool = np.arange(1, n + 1)
    m = int(round(ratio * n))
    return CnfFormula(n, tuple(_random_clause(rng, pool) for _ in range(m)))


def gen_quasi_1d(spec: Quasi1dSpec) -> CnfFormula:
    """Block-structured 3-SAT.

    Variables are split into consecutive blocks of ``block_size``. Each block
    receives ``n_intra`` clauses drawn inside it. Then each of the ``l_inter``
    layers adds one clause per neighbouring block pair, first for the pairs
    (0,1), (2,3), ... and then for (1,2), (3,4), ...; such a clause has one
    variable in each block of the pair and a third drawn from their union.
    """
    rng = np.random.default_rng(spec.seed)
    b = spec.block_size
    blocks = [np.arange(k * b + 1, (k + 1) * b + 1) for k in range(spec.n_blocks)]
    clauses = []
    for blk in blocks:
        clauses.extend(_random_clause(rng, blk) for _ in range(spec.n_intra))
    pairs = [(k, k + 1) for k in range(0, spec.n_blocks - 1, 2)]
    pairs += [(k, k + 1) for k in range(1, spec.n_blocks - 1, 2)]
    for _ in range(spec.l_inter):
        for lo, hi in pairs:
            v1 = int(rng.choice(blocks[lo]))
            v2 = int(rng.choice(blocks[hi]))
            rest = np.setdiff1d(np.concatenate([blocks[lo], blocks[hi]]), [v1, v2])
            v3 = int(rng.choice(rest))
            order = rng.permutation([v1, v2, v3])
            negs = rng.random(3) < 0.5
            clauses.append(Clause(tuple((int(v), bool(s)) for v, s in zip(order, negs))))
    return CnfFormula(spec.n_vars, tuple(clauses))


# ---------------------------------------------------------------------------
# evaluation and brute force
# ---------------------------------------------------------------------------


def bits_to_int(bits: str) -> int:
    return int(bits, 2)


def int_to_bits(value: int, n: int) -> str:
    return format(value, f"0{n}b")


def evaluate(f: CnfFormula, b: str) -> bool:
    """True iff the bitstring ``b_{n-1} ... b_0`` satisfies every clause."""
    if len(b) != f.n_vars:
        raise InvalidInputError(f"assignment has {len(b)} bits, formula has {f.n_vars} variables")
    n = f.n_vars
    for c in f.clauses:
        if not any((b[n - lit.var] == "1") != lit.negated for lit in c.literals):
            return False
    return True


def clause_masks(f: CnfFormula) -> tuple[np.ndarray, np.ndarray]:
    """Per clause, the bit mask of its variables and the falsifying pattern."""
    masks = np.zeros(f.n_clauses, dtype=np.int64)
    patterns = np.zeros(f.n_clauses, dtype=np.int64)
    for k, c in enumerate(f.clauses):
        for lit in c.literals:
            bit = 1 << (lit.var - 1)
            masks[k] |= bit
            if lit.negated:
                patterns[k] |= bit
    return masks, patterns


def brute_force(f: CnfFormula) -> tuple[int, list[str]]:
    """Exact model count and the sorted list of satisfying bitstrings."""
    if f.n_vars > BRUTE_FORCE_MAX_VARS:
        raise InvalidInputError(
            f"brute force refused for n={f.n_vars} > {BRUTE_FORCE_MAX_VARS}"
        )
    masks, patterns = clause_masks(f)
    models = _kernels.list_models(masks, patterns, f.n_vars)
    return len(models), [int_to_bits(int(m), f.n_vars) for m in models]


def brute_force_count(f: CnfFormula) -> int:
    if f.n_vars > BRUTE_FORCE_MAX_VARS:
        raise InvalidInputError(
            f"brute force refused for n={f.n_vars} > {BRUTE_FORCE_MAX_VARS}"
        )
    masks, patterns = clause_masks(f)
    return _kernels.count_models(masks, patterns, f.n_vars)


def solution_to_dimacs(bits: str) -> str:
    """A model as a DIMACS ``v`` line of signed literals."""
    n = len(bits)
    lits = [j if bits[n - j] == "1" else -j for j in range(1, n + 1)]
    return "v " + " ".join(map(str, lits)) + " 0"
