"""MPO constructors for clause operators, Grover oracles and gates.

Most operators here are short sums of product operators. ``sum_of_products``
turns ``K`` such terms into an MPO of bond dimension ``K`` (block-diagonal
interior tensors, a row on the first site, a column on the last).
"""
from __future__ import annotations

import enum
from typing import Sequence

import numpy as np

from . import gates as g
from .errors import InvalidInputError
from .sat import Clause
from .tn import Mpo

# ancilla reset used by the clause operator: |0><0| + |0><1|
RESET = np.array([[1.0, 1.0], [0.0, 0.0]])
PLUS_PROJ = np.full((2, 2), 0.5)


class ClauseOperatorKind(enum.Enum):
    ANCILLA = "ancilla"
    PROJECTOR = "projector"


def sum_of_products(terms: Sequence[Sequence[np.ndarray]], first_site: int = 0) -> Mpo:
    """MPO for ``sum_k (terms[k][0] (x) terms[k][1] (x) ...)``.

    All terms must have the same length (one local matrix per site of the
    window) and the same local dimension.
    """
    k = len(terms)
    length = len(terms[0])
    if any(len(t) != length for t in terms):
        raise InvalidInputError("all product terms need one matrix per site")
    d = np.asarray(terms[0][0]).shape[0]
    dtype = np.result_type(*[np.asarray(m) for t in terms for m in t])
    if length == 1:
        w = sum(np.asarray(t[0], dtype=dtype) for t in terms)
        return Mpo((w.reshape(1, d, d, 1),), first_site)
    tensors = []
    for site in range(length):
        lb = 1 if site == 0 else k
        rb = 1 if site == length - 1 else k
        w = np.zeros((lb, d, d, rb), dtype=dtype)
        for j, t in enumerate(terms):
            w[0 if lb == 1 else j, :, :, 0 if rb == 1 else j] = t[site]
        tensors.append(w)
    return Mpo(tuple(tensors), first_site)


def _window(sites: dict, lo: int, hi: int, fill=g.I2) -> list:
    return [sites.get(s, fill) for s in range(lo, hi + 1)]


def clause_mpo(
    clause: Clause,
    n: int,
    ancilla_site: int | None = None,
    kind: ClauseOperatorKind = ClauseOperatorKind.ANCILLA,
    *,
    compact: bool = False,
) -> Mpo:
    """Operator enforcing one clause on the ``n`` data sites.

    With ``P`` the projector onto the clause's falsifying assignment:

    * PROJECTOR: ``1 - P`` (bond dimension 2).
    * ANCILLA: ``P (x) R + (1 - P) (x) 1_A`` with ``R = |0><0| + |0><1|``,
      which sends the ancilla of falsifying components to ``|0>`` and leaves
      every other component alone. Built from its three product terms (bond
      dimension 3), or from the equivalent ``1 + P (x) (R - 1)`` (bond
      dimension 2) when ``compact`` is set.

    Sites between the clause variables carry the bond through identities.
    """
    if max(clause.variables) > n:
        raise InvalidInputError(f"clause {clause.to_ints()} exceeds n={n}")
    proj = {n - v: (g.P1 if bit else g.P0) for v, bit in clause.falsifier().items()}
    lo = min(proj)
    if kind is ClauseOperatorKind.PROJECTOR:
        hi = max(proj)
        ones = _window({}, lo, hi)
        minus_p = _window(proj, lo, hi)
        minus_p[-1] = -minus_p[-1]
        return sum_of_products([ones, minus_p], lo)
    if ancilla_site != n:
        raise InvalidInputError("the ANCILLA clause operator needs ancilla_site == n")
    p_part = _window(proj, lo, n - 1)
    ones = _window({}, lo, n)
    if compact:
        return sum_of_products([ones, p_part + [RESET - g.I2]], lo)
    return sum_of_products([p_part + [RESET], ones, p_part + [-g.I2]], lo)


def oracle_mpo_known_w(solutions: Sequence[str], n: int) -> Mpo:
    """``1 - 2 sum_a |w_a><w_a|`` with bond dimension ``1 + S``."""
    sols = list(solutions)
    if not sols:
        raise InvalidInputError("at least one solution is required")
    if len(set(sols)) != len(sols):
        raise InvalidInputError("duplicate solutions")
    for w in sols:
        if len(w) != n or set(w) - {"0", "1"}:
            raise InvalidInputError(f"bad solution bitstring {w!r} for n={n}")
    terms = [[g.I2] * n]
    for w in sols:
        term = [g.P1 if ch == "1" else g.P0 for ch in w]
        term[-1] = -2.0 * term[-1]
        terms.append(term)
    return sum_of_products(terms)


def diffuser_mpo(n: int) -> Mpo:
    """``1 - 2|s><s|`` with bond dimension 2."""
    if n < 1:
        raise InvalidInputError("n must be at least 1")
    proj = [PLUS_PROJ] * n
    proj[-1] = -2.0 * PLUS_PROJ
    return sum_of_products([[g.I2] * n, proj])


_SINGLE = {"H": g.H, "X": g.X, "Z": g.Z}


def gate_mpo(gate: g.Gate, n: int) -> Mpo:
    """Exact MPO for one gate on an ``n``-site register.

    Controlled gates are ``1 + P_controls (x) (X - 1)`` (bond dimension 2).
    A two-site unitary is split by an operator Schmidt decomposition (bond
    dimension at most 4).
    """
    if max(gate.sites) >= n:
        raise InvalidInputError(f"gate sites {gate.sites} outside an {n}-site register")
    if gate.kind in _SINGLE:
        return sum_of_products([[_SINGLE[gate.kind]]], gate.target)
    if gate.kind == "U":
        if len(gate.sites) == 1:
            return sum_of_products([[gate.matrix]], gate.sites[0])
        return _two_site_unitary(gate.matrix, *gate.sites)
    local = {c: (g.P1 if pol else g.P0) for c, pol in zip(gate.controls, gate.control_polarity)}
    local[gate.target] = g.X - g.I2
    lo, hi = min(gate.sites), max(gate.sites)
    return sum_of_products([_window({}, lo, hi), _window(local, lo, hi)], lo)


def _two_site_unitary(u: np.ndarray, a: int, b: int) -> Mpo:
    if a > b:
        # reorder tensor factors so the first factor sits on the lower site
        u = u.reshape(2, 2, 2, 2).transpose(1, 0, 3, 2).reshape(4, 4)
        a, b = b, a
    # U[(y1 y2), (x1 x2)] -> M[(y1 x1), (y2 x2)]
    m = u.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
    uu, s, vh = np.linalg.svd(m)
    keep = max(1, int(np.count_nonzero(s > 1e-14 * s[0])))
    terms = []
    for k in range(keep):
        left = (uu[:, k] * s[k]).reshape(2, 2)
        right = vh[k].reshape(2, 2)
        terms.append(_window({a: left, b: right}, a, b))
    return sum_of_products(terms, a)
