"""Grover iteration: closed-form theory, ideal and depolarized simulators.

Mixed states are stored as vectorized density matrices: an MPS with local
dimension 4 whose site index ``2 x + x'`` stands for ``|x><x'|``. A gate
``U`` acts on it through ``U (x) U*`` site by site, so every pure-state MPO
lifts to a superoperator MPO by squaring its bond dimension.
"""
from __future__ import annotations

import csv
import dataclasses
import enum
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import sat
from .errors import InvalidInputError, NumericalFailure
from .oracle import (
    ClauseOperatorKind,
    clause_mpo,
    diffuser_mpo,
    oracle_mpo_known_w,
    sum_of_products,
)
from .qiga import KET1, MINUS, ClauseOrder, ordered_clauses
from .tn import (
    Mpo,
    Mps,
    TruncationPolicy,
    amplitude,
    apply_mpo,
    entanglement_profile,
    inner,
    norm_squared,
    product_state,
    project_site,
    scale,
    schmidt_entropy,
)

NORM_TOLERANCE = 1e-10
TRACE_TOLERANCE = 1e-6
SAT_MODE_MAX_VARS = 20

# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------


def theta(n: int, n_solutions: int = 1) -> float:
    """Rotation angle ``arcsin(sqrt(S / 2^n))``."""
    if n < 1:
        raise InvalidInputError("n must be at least 1")
    return math.asin(math.sqrt(n_solutions * math.ldexp(1.0, -n)))


def optimal_iterations(n: int, n_solutions: int = 1) -> int:
    """``round(pi/4 * sqrt(2^n / S))``."""
    if n < 1:
        raise InvalidInputError("n must be at least 1")
    return int(round(math.pi / 4.0 * math.sqrt(math.ldexp(1.0, n) / n_solutions)))


def ideal_success(q: int, n: int, n_solutions: int = 1) -> float:
    return math.sin((2 * q + 1) * theta(n, n_solutions)) ** 2


def noisy_success(q: int, n: int, lam: float) -> float:
    """Approximate success probability ``exp(-lam q) sin^2(2 q theta)``."""
    return math.exp(-lam * q) * math.sin(2 * q * theta(n)) ** 2


def depolarized_fidelity(q: int, n: int, lam: float, n_solutions: int = 1) -> float:
    """Exact ``<w|rho_q|w>`` summed over solutions for once-per-iteration noise."""
    keep = (1.0 - lam) ** q
    return keep * ideal_success(q, n, n_solutions) + (1.0 - keep) * n_solutions * math.ldexp(1.0, -n)


def peak_success(big_lambda: float) -> float:
    """Best success probability reachable at total noise ``Lambda``."""
    x = big_lambda / math.pi
    return math.exp(2.0 * x * math.atan(x) - big_lambda) / (1.0 + x * x)


@dataclass(frozen=True)
class OptimalStop:
    q_star_real: float
    q_star: int
    p_peak: float


def optimal_stop(n: int, big_lambda: float) -> OptimalStop:
    """Stopping iteration from ``tan(2 (r - q*) theta) = Lambda / pi``."""
    if big_lambda < 0:
        raise InvalidInputError("Lambda must be nonnegative")
    r = optimal_iterations(n)
    q_real = r - math.atan(big_lambda / math.pi) / (2.0 * theta(n))
    q_int = min(max(int(round(q_real)), 0), r)
    return OptimalStop(q_real, q_int, peak_success(big_lambda))


def fidelity_bound(n: int, eps_per_gate: float, n_oracle: float, n_diffuser: float) -> float:
    """``exp(-(pi eps / 4) sqrt(2)^n (N_o + N_d))``."""
    if min(eps_per_gate, n_oracle, n_diffuser) < 0:
        raise InvalidInputError("inputs must be nonnegative")
    return math.exp(-(math.pi * eps_per_gate / 4.0) * math.sqrt(2.0) ** n * (n_oracle + n_diffuser))


def two_state_entropy(n: int, q: int, bond: int) -> float:
    """Entropy (log 2 units) at ``bond`` of the ideal single-solution state.

    After ``q`` iterations the state is ``a|s> + b|w>`` with
    ``a = cos(phi)/cos(theta)``, ``b = sin(phi) - cos(phi) tan(theta)`` and
    ``phi = (2q+1) theta``. Across a cut with ``L`` sites on the left, both
    halves are spanned by non-orthogonal pairs whose overlaps are
    ``2^{-L/2}`` and ``2^{-(n-L)/2}``, so the Schmidt values come from a 2x2
    problem. The result does not depend on which ``w`` is marked.
    """
    th = theta(n)
    phi = (2 * q + 1) * th
    a = math.cos(phi) / math.cos(th)
    b = math.sin(phi) - math.cos(phi) * math.tan(th)
    left = bond + 1
    cl, cr = 2.0 ** (-left / 2.0), 2.0 ** (-(n - left) / 2.0)
    gl = np.linalg.cholesky(np.array([[1.0, cl], [cl, 1.0]]))
    gr = np.linalg.cholesky(np.array([[1.0, cr], [cr, 1.0]]))
    core = gl.T @ np.diag([a, b]) @ gr
    return schmidt_entropy(np.linalg.svd(core, compute_uv=False))


def two_state_max_entropy(n: int, q: int) -> float:
    return max(two_state_entropy(n, q, k) for k in range(n - 1)) if n > 1 else 0.0


# ---------------------------------------------------------------------------
# simulators
# ---------------------------------------------------------------------------


class Granularity(enum.Enum):
    PER_ITERATION = "iteration"
    PER_LAYER = "layer"


@dataclass(frozen=True)
class GroverConfig:
    """Run description.

    Exactly one of ``solutions`` (marked bitstrings) and ``formula`` (SAT
    mode) is set. ``iterations=None`` means the optimal count for the number
    of marked strings.
    """

    n: int
    solutions: tuple = ()
    formula: sat.CnfFormula | None = None
    iterations: int | None = None
    noise: float = 0.0
    truncation: TruncationPolicy = field(default_factory=TruncationPolicy)
    granularity: Granularity = Granularity.PER_ITERATION
    record_entropy: bool = True

    def __post_init__(self):
        object.__setattr__(self, "solutions", tuple(self.solutions))
        if self.n < 1:
            raise InvalidInputError("n must be at least 1")
        if bool(self.solutions) == (self.formula is not None):
            raise InvalidInputError("give either solutions or a formula")
        if not 0.0 <= self.noise < 1.0:
            raise InvalidInputError("noise must lie in [0, 1)")
        if self.iterations is not None and self.iterations < 0:
            raise InvalidInputError("iterations must be nonnegative")
        if self.formula is not None:
            if self.formula.n_vars != self.n:
                raise InvalidInputError("formula size differs from n")
            if self.n > SAT_MODE_MAX_VARS:
                raise InvalidInputError(f"SAT mode is limited to n <= {SAT_MODE_MAX_VARS}")


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    substep: str
    p_success: float
    entropies: tuple
    chi: int
    trace: float = 1.0

    @property
    def max_entropy(self) -> float:
        return max(self.entropies, default=0.0)

    @property
    def half_cut_entropy(self) -> float:
        if not self.entropies:
            return 0.0
        # bond n//2 - 1 splits the chain into halves
        return self.entropies[(len(self.entropies) + 1) // 2 - 1]


@dataclass
class IterationTrace:
    records: list
    n: int
    iterations: int
    n_solutions: int
    noise: float
    chi_max: int = 1
    truncation_error: float = 0.0

    def at_boundaries(self) -> list:
        """Records taken at the end of complete iterations (plus the start)."""
        return [r for r in self.records if r.substep in ("start", "iteration", "noise")]

    @property
    def final_success(self) -> float:
        return self.records[-1].p_success

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iteration", "substep", "p_success", "max_entropy_log2",
                    "half_cut_entropy_log2", "chi_max"])
        for r in self.records:
            w.writerow([r.iteration, r.substep, repr(r.p_success), repr(r.max_entropy),
                        repr(r.half_cut_entropy), r.chi])
        return buf.getvalue()


def _marked(config: GroverConfig) -> list:
    if config.solutions:
        return list(config.solutions)
    return sat.brute_force(config.formula)[1]


def _success(state: Mps, marked: Sequence[str]) -> float:
    return float(sum(abs(amplitude(state, w).value) ** 2 for w in marked))


class _SatOracle:
    """``U_w`` from the clause chain: ``sqrt(2) <-|_A chain |psi>|1>_A``."""

    def __init__(self, f: sat.CnfFormula):
        n = f.n_vars
        self.n = n
        self.ops = [
            clause_mpo(c, n, n, ClauseOperatorKind.ANCILLA, compact=True)
            for c in ordered_clauses(f, ClauseOrder.BY_SPAN)
        ]

    def __call__(self, state: Mps, policy: TruncationPolicy) -> Mps:
        ts = list(state.tensors) + [KET1.reshape(1, 2, 1)]
        ext = Mps(tuple(ts), state.log2_prefactor, None)
        for op in self.ops:
            ext = apply_mpo(op, ext, policy)
        return scale(project_site(ext, -1, MINUS), math.sqrt(2.0))


def run_ideal(config: GroverConfig) -> IterationTrace:
    """Noiseless ``(U_s U_w)^q |s>`` with per-substep diagnostics."""
    if config.noise:
        return run_noisy(config)
    n = config.n
    marked = _marked(config)
    q_total = optimal_iterations(n, max(1, len(marked))) if config.iterations is None else config.iterations
    policy = dataclasses.replace(config.truncation, error=0.0)
    if config.formula is None:
        u_w = oracle_mpo_known_w(marked, n)

        def oracle(st, pol):
            return apply_mpo(u_w, st, pol)
    else:
        oracle = _SatOracle(config.formula)
    u_s = diffuser_mpo(n)
    state = product_state(n, np.ones(2) / math.sqrt(2.0))

    def snap(it, label, st):
        ents = tuple(e.entropy for e in entanglement_profile(st)) if config.record_entropy else ()
        return IterationRecord(it, label, _success(st, marked), ents, st.max_bond)

    records = [snap(0, "start", state)]
    chi_max = 1
    for it in range(1, q_total + 1):
        state = oracle(state, policy)
        chi_max = max(chi_max, state.max_bond)
        if config.granularity is Granularity.PER_LAYER:
            records.append(snap(it, "oracle", state))
        state = apply_mpo(u_s, state, policy)
        chi_max = max(chi_max, state.max_bond)
        ns = norm_squared(state).real
        if abs(ns - 1.0) > NORM_TOLERANCE:
            raise NumericalFailure(f"norm drifted to {ns!r} at iteration {it}")
        records.append(snap(it, "iteration", state))
    return IterationTrace(records, n, q_total, len(marked), 0.0, chi_max, policy.error)


def superoperator(op: Mpo) -> Mpo:
    """Lift ``rho -> O rho O^dagger`` to the vectorized (local dimension 4) form."""
    ts = []
    for w in op.tensors:
        l, d, _, r = w.shape
        big = np.einsum("aybr,cxds->acyxbdrs", w, w.conj())
        ts.append(big.reshape(l * l, d * d, d * d, r * r))
    return Mpo(tuple(ts), op.first_site)


VEC_IDENTITY = np.array([1.0, 0.0, 0.0, 1.0])


def depolarizing_mpo(n: int, lam: float) -> Mpo:
    """``rho -> (1 - lam) rho + lam Tr(rho) 1/2^n`` as a bond-dimension-2 MPO."""
    keep = [np.eye(4)] * n
    mix = [0.5 * np.outer(VEC_IDENTITY, VEC_IDENTITY)] * n
    keep[0] = (1.0 - lam) * keep[0]
    mix[0] = lam * mix[0]
    return sum_of_products([keep, mix])


def _vec_basis(bits: str) -> Mps:
    vecs = np.zeros((len(bits), 4))
    for k, ch in enumerate(bits):
        vecs[k, 3 * int(ch)] = 1.0
    return product_state(len(bits), vecs)


def run_noisy(config: GroverConfig) -> IterationTrace:
    """Grover on a vectorized density matrix with depolarizing noise.

    Each iteration applies the lifted oracle, the lifted diffuser, then the
    channel once. Entropies recorded here are operator-space entropies of
    the vectorized state.
    """
    if config.formula is not None:
        raise InvalidInputError("the noisy simulator runs in known-solution mode")
    n = config.n
    marked = list(config.solutions)
    lam = config.noise
    q_total = optimal_iterations(n, len(marked)) if config.iterations is None else config.iterations
    policy = dataclasses.replace(config.truncation, error=0.0)
    u_w = superoperator(oracle_mpo_known_w(marked, n))
    u_s = superoperator(diffuser_mpo(n))
    channel = depolarizing_mpo(n, lam)
    rho = product_state(n, np.full(4, 0.5))
    ident = product_state(n, VEC_IDENTITY)
    bras = [_vec_basis(w) for w in marked]

    def snap(it, label, st):
        tr = inner(ident, st).real
        if abs(tr - 1.0) > TRACE_TOLERANCE:
            raise NumericalFailure(f"trace drifted to {tr!r} at iteration {it}")
        p = float(sum(inner(b, st).real for b in bras))
        ents = ()
        if config.record_entropy:
            ents = tuple(e.entropy for e in entanglement_profile(st))
        return IterationRecord(it, label, p, ents, st.max_bond, tr)

    records = [snap(0, "start", rho)]
    chi_max = 1
    for it in range(1, q_total + 1):
        rho = apply_mpo(u_w, rho, policy)
        if config.granularity is Granularity.PER_LAYER:
            records.append(snap(it, "oracle", rho))
        rho = apply_mpo(u_s, rho, policy)
        if config.granularity is Granularity.PER_LAYER:
            records.append(snap(it, "diffuser", rho))
        if lam:
            rho = apply_mpo(channel, rho, policy)
        chi_max = max(chi_max, rho.max_bond)
        records.append(snap(it, "noise", rho))
    return IterationTrace(records, n, q_total, len(marked), lam, chi_max, policy.error)


# ---------------------------------------------------------------------------
# scans
# ---------------------------------------------------------------------------

SCAN_COLUMNS = [
    "n", "lambda", "Lambda", "q_star_theory", "q_star_empirical",
    "p_peak_theory", "p_peak_empirical", "p_final", "e_minus_Lambda",
]


def scan_point(n: int, w: str, big_lambda: float, truncation: TruncationPolicy | None = None) -> dict:
    r = optimal_iterations(n)
    lam = big_lambda / r
    cfg = GroverConfig(n, (w,), noise=lam, record_entropy=False,
                       truncation=truncation or TruncationPolicy())
    trace = run_noisy(cfg)
    probs = [rec.p_success for rec in trace.records]
    best = int(np.argmax(probs))
    stop = optimal_stop(n, big_lambda)
    return {
        "n": n,
        "lambda": lam,
        "Lambda": big_lambda,
        "q_star_theory": stop.q_star_real,
        "q_star_empirical": trace.records[best].iteration,
        "p_peak_theory": stop.p_peak,
        "p_peak_empirical": probs[best],
        "p_final": probs[-1],
        "e_minus_Lambda": math.exp(-big_lambda),
    }


def scan_noise(n: int, w: str, lambdas: Sequence[float], threads: int | None = None) -> list:
    """One noisy run per total noise value; runs are independent."""
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda lam: scan_point(n, w, lam), lambdas))


def scan_to_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SCAN_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()
