"""Single-oracle-call SAT solving and counting on an MPS.

The register holds the ``n`` data qubits (site ``n - j`` for variable ``j``)
followed by one ancilla on site ``n``. Starting from ``(|0>+|1>)^n |1>_A``,
one clause MPO per clause leaves

    sum_{b satisfying} |b>|1>_A + sum_{b falsifying} |b>|0>_A

so the ``<1|_A`` projection has squared norm ``S`` and the ``<-|_A``
projection carries the sign pattern ``(-1)^f(b)``.
"""
from __future__ import annotations

import dataclasses
import enum
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import sat
from .errors import InvalidInputError, NumericalFailure
from .oracle import ClauseOperatorKind, clause_mpo
from .sat import CnfFormula
from .tn import (
    Mps,
    Scaled,
    TruncationPolicy,
    add,
    apply_mpo,
    enumerate_support,
    norm_squared,
    normalize,
    product_state,
    project_site,
    sample,
    scale,
)

TRUNCATION_TOLERANCE = 1e-8
COUNT_RESIDUE = 1e-6

KET0 = np.array([1.0, 0.0])
KET1 = np.array([0.0, 1.0])
MINUS = np.array([1.0, -1.0]) / math.sqrt(2.0)


class ClauseOrder(enum.Enum):
    AS_GIVEN = "as-given"
    BY_SPAN = "by-span"


class Status(enum.Enum):
    SOLVED = "SOLVED"
    UNSAT = "UNSAT"


@dataclass(frozen=True)
class QigaOptions:
    truncation: TruncationPolicy = field(default_factory=TruncationPolicy)
    clause_order: ClauseOrder = ClauseOrder.AS_GIVEN
    slice_bits: int = 0
    sample_count: int = 16
    seed: int = 0
    enumerate_threshold: int = 4096
    clause_kind: ClauseOperatorKind = ClauseOperatorKind.ANCILLA
    # the rank-2 form of the ancilla clause operator is the same operator
    compact_clauses: bool = True
    threads: int | None = None

    def fresh_policy(self) -> TruncationPolicy:
        return dataclasses.replace(self.truncation, error=0.0)

    def echo(self) -> dict:
        return {
            "rel_cutoff": self.truncation.rel_cutoff,
            "max_bond": self.truncation.max_bond,
            "clause_order": self.clause_order.value,
            "slice_bits": self.slice_bits,
            "sample_count": self.sample_count,
            "seed": self.seed,
            "enumerate_threshold": self.enumerate_threshold,
            "clause_kind": self.clause_kind.value,
            "compact_clauses": self.compact_clauses,
        }


@dataclass(frozen=True)
class OracleRun:
    """Result of one open oracle simulation."""

    state: Mps
    chi_max: int
    truncation_error: float


@dataclass
class SolutionReport:
    status: Status
    count: int
    solutions: list
    samples: list
    chi_max: int
    wall_time: float | None
    truncation_error: float
    enumerated: bool
    options: dict = field(default_factory=dict)
    slices: list = field(default_factory=list)

    def to_dict(self) -> dict:
        out = {
            "status": self.status.value,
            "count": self.count,
            "solutions": list(self.solutions),
            "samples": list(self.samples),
            "enumerated": self.enumerated,
            "chi_max": self.chi_max,
            "wall_time_s": self.wall_time,
            "truncation_error": self.truncation_error,
            "options": self.options,
        }
        if self.slices:
            out["slices"] = self.slices
        return out

    def to_json(self, **extra) -> str:
        d = self.to_dict()
        d.update(extra)
        return json.dumps(d, indent=2, sort_keys=True)


def ordered_clauses(f: CnfFormula, order: ClauseOrder) -> list:
    if order is ClauseOrder.AS_GIVEN:
        return list(f.clauses)
    n = f.n_vars
    return sorted(f.clauses, key=lambda c: (c.span(n), min(c.sites(n))))


def _input_state(n: int, pinned: dict, normalized: bool) -> Mps:
    free = np.ones(2) / math.sqrt(2.0) if normalized else np.ones(2)
    vecs = [KET1 if pinned.get(k) == 1 else KET0 if k in pinned else free for k in range(n)]
    return product_state(n + 1, np.array(vecs + [KET1]))


def apply_oracle_open(
    f: CnfFormula,
    opts: QigaOptions | None = None,
    *,
    normalized: bool = True,
    pinned: dict | None = None,
) -> OracleRun:
    """Apply every clause operator to ``|s>|1>_A`` on ``n + 1`` sites.

    ``normalized=False`` starts from ``(|0>+|1>)^n`` instead of ``|s>`` so
    that amplitudes are exactly 0 or 1. ``pinned`` maps site indices to basis
    values that replace the uniform superposition on those sites.
    """
    opts = QigaOptions() if opts is None else opts
    n = f.n_vars
    policy = opts.fresh_policy()
    state = _input_state(n, pinned or {}, normalized)
    chi_max = state.max_bond
    for clause in ordered_clauses(f, opts.clause_order):
        op = clause_mpo(clause, n, n, ClauseOperatorKind.ANCILLA, compact=opts.compact_clauses)
        state = apply_mpo(op, state, policy)
        chi_max = max(chi_max, state.max_bond)
        if policy.error > TRUNCATION_TOLERANCE:
            raise NumericalFailure(
                f"truncation discarded {policy.error:.2e} of the weight; "
                "raise max_bond or lower rel_cutoff"
            )
    return OracleRun(state, chi_max, policy.error)


def apply_projector_chain(
    f: CnfFormula, opts: QigaOptions | None = None, *, pinned: dict | None = None
) -> OracleRun:
    """Ancilla-free variant: ``prod_k (1 - P_k)`` applied to ``(|0>+|1>)^n``.

    The result is ``sum_a |w_a>`` on the ``n`` data sites.
    """
    opts = QigaOptions() if opts is None else opts
    n = f.n_vars
    policy = opts.fresh_policy()
    state = project_site(_input_state(n, pinned or {}, False), -1, KET1)
    chi_max = state.max_bond
    for clause in ordered_clauses(f, opts.clause_order):
        op = clause_mpo(clause, n, kind=ClauseOperatorKind.PROJECTOR)
        state = apply_mpo(op, state, policy)
        chi_max = max(chi_max, state.max_bond)
        if policy.error > TRUNCATION_TOLERANCE:
            raise NumericalFailure(
                f"truncation discarded {policy.error:.2e} of the weight; "
                "raise max_bond or lower rel_cutoff"
            )
    return OracleRun(state, chi_max, policy.error)


@dataclass(frozen=True)
class _Branches:
    marked: Mps  # sum over solutions of |w>, unnormalized
    signed: Mps  # amplitudes (-1)^f(b), unnormalized
    ones: Mps  # amplitudes 1 on the (possibly pinned) input support
    chi_max: int
    truncation_error: float


def _branches(f: CnfFormula, opts: QigaOptions, pinned: dict) -> _Branches:
    ones = project_site(_input_state(f.n_vars, pinned, False), -1, KET1)
    if opts.clause_kind is ClauseOperatorKind.PROJECTOR:
        run = apply_projector_chain(f, opts, pinned=pinned)
        signed = add(ones, run.state, 1.0, -2.0, opts.fresh_policy())
        return _Branches(run.state, signed, ones, run.chi_max, run.truncation_error)
    run = apply_oracle_open(f, opts, normalized=False, pinned=pinned)
    marked = project_site(run.state, -1, KET1)
    # sqrt(2) <-|_A maps the unnormalized run onto amplitudes (-1)^f(b)
    signed = scale(project_site(run.state, -1, MINUS), math.sqrt(2.0))
    return _Branches(marked, signed, ones, run.chi_max, run.truncation_error)


def _exact_count(value: Scaled) -> int:
    v = value.real
    s = round(v)
    if abs(v - s) > COUNT_RESIDUE * max(1.0, abs(v)):
        raise NumericalFailure(
            f"count {v!r} is not within rounding tolerance of an integer; "
            "rerun with a tighter cutoff"
        )
    return int(s)


def count_solutions(f: CnfFormula, opts: QigaOptions | None = None) -> int:
    """Exact model count ``S``: the squared norm of the satisfying branch."""
    opts = QigaOptions() if opts is None else opts
    return _exact_count(norm_squared(_branches(f, opts, {}).marked))


def post_oracle_state(f: CnfFormula, opts: QigaOptions | None = None) -> Mps:
    """``U_w |s>`` on the ``n`` data sites: amplitudes ``2^{-n/2} (-1)^f(b)``."""
    opts = QigaOptions() if opts is None else opts
    if opts.clause_kind is ClauseOperatorKind.PROJECTOR:
        return normalize(_branches(f, opts, {}).signed)
    run = apply_oracle_open(f, opts, normalized=True)
    return normalize(project_site(run.state, -1, MINUS))


def _solve_branches(br: _Branches, opts: QigaOptions):
    """Exact count and the normalized ``|Psi_w> - |s>`` (None when ``S = 0``)."""
    count = _exact_count(norm_squared(br.marked))
    if count == 0:
        return 0, None
    diff = add(br.signed, br.ones, 1.0, -1.0, opts.fresh_policy())
    ns = norm_squared(diff)
    # |Psi_w> - |s> = -2 sum_a |w_a>, so its squared norm is exactly 4 S
    if abs(ns.real - 4.0 * count) > COUNT_RESIDUE * 4.0 * count:
        raise NumericalFailure(
            f"subtracted state has norm^2 {ns.real:.6g}, expected {4 * count}"
        )
    return count, normalize(diff)


def _collect(f: CnfFormula, w_state: Mps, count: int, n_samples: int, seed: int, opts):
    samples = sample(w_state, seed, n_samples) if n_samples else []
    enumerated = count <= opts.enumerate_threshold
    sols = []
    if enumerated:
        sols = [b for b, _ in enumerate_support(w_state, 0.5 / count)]
        if len(sols) != count:
            raise NumericalFailure(f"enumerated {len(sols)} strings for count {count}")
    for b in set(samples) | set(sols):
        if not sat.evaluate(f, b):
            raise NumericalFailure(f"reported string {b} does not satisfy the formula")
    return samples, sols, enumerated


def solve(f: CnfFormula, opts: QigaOptions | None = None) -> SolutionReport:
    """Count, sample and (for small ``S``) enumerate all solutions."""
    opts = QigaOptions() if opts is None else opts
    if opts.slice_bits:
        return slice_solve(f, opts)
    t0 = time.perf_counter()
    run = _branches(f, opts, {})
    count, w_state = _solve_branches(run, opts)
    if count == 0:
        return SolutionReport(
            Status.UNSAT, 0, [], [], run.chi_max, time.perf_counter() - t0,
            run.truncation_error, True, opts.echo(),
        )
    samples, sols, enumerated = _collect(f, w_state, count, opts.sample_count, opts.seed, opts)
    if not enumerated:
        sols = sorted(set(samples))
    return SolutionReport(
        Status.SOLVED, count, sols, samples, run.chi_max, time.perf_counter() - t0,
        run.truncation_error, enumerated, opts.echo(),
    )


def _slice_pins(p: int, k: int) -> dict:
    return {site: (k >> (p - 1 - site)) & 1 for site in range(p)}


def _run_slice(f: CnfFormula, opts: QigaOptions, k: int):
    run = _branches(f, opts, _slice_pins(opts.slice_bits, k))
    count, w_state = _solve_branches(run, opts)
    return count, w_state, run


def slice_solve(f: CnfFormula, opts: QigaOptions) -> SolutionReport:
    """Pin the ``p`` most significant qubits and solve the ``2^p`` slices.

    Slices run on a thread pool and share nothing. Counts add, enumerated
    sets are merged in slice order, and the requested samples are split over
    slices by a multinomial draw weighted by the slice counts, which keeps
    the merged samples uniform over all solutions.
    """
    p = opts.slice_bits
    if not 1 <= p < f.n_vars:
        raise InvalidInputError("slice_bits must lie in [1, n_vars)")
    t0 = time.perf_counter()
    with ThreadPoolExecutor(max_workers=opts.threads) as pool:
        results = list(pool.map(lambda k: _run_slice(f, opts, k), range(2 ** p)))
    counts = np.array([r[0] for r in results], dtype=np.int64)
    total = int(counts.sum())
    chi_max = max(r[2].chi_max for r in results)
    err = sum(r[2].truncation_error for r in results)
    slices = [
        {"slice": format(k, f"0{p}b"), "count": int(c), "chi_max": r[2].chi_max}
        for k, (c, r) in enumerate(zip(counts, results))
    ]
    if total == 0:
        return SolutionReport(
            Status.UNSAT, 0, [], [], chi_max, time.perf_counter() - t0, err, True,
            opts.echo(), slices,
        )
    rng = np.random.default_rng(opts.seed)
    per_slice = rng.multinomial(opts.sample_count, counts / total) if opts.sample_count else np.zeros_like(counts)
    enumerated = total <= opts.enumerate_threshold
    sols, samples = [], []
    for k, (c, w_state, _) in enumerate(results):
        if c == 0:
            continue
        local_opts = opts if enumerated else dataclasses.replace(opts, enumerate_threshold=-1)
        s_k, e_k, _ = _collect(f, w_state, int(c), int(per_slice[k]), opts.seed + 7919 * (k + 1), local_opts)
        samples.extend(s_k)
        sols.extend(e_k)
    if not enumerated:
        sols = sorted(set(samples))
    return SolutionReport(
        Status.SOLVED, total, sorted(sols), samples, chi_max, time.perf_counter() - t0,
        err, enumerated, opts.echo(), slices,
    )
