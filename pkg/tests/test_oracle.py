import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from qigrover import gates as g
from qigrover.errors import InvalidInputError
from qigrover.oracle import (
    ClauseOperatorKind,
    clause_mpo,
    diffuser_mpo,
    gate_mpo,
    oracle_mpo_known_w,
    sum_of_products,
)
from qigrover.sat import Clause
from qigrover.tn import mpo_to_dense

ANC = ClauseOperatorKind.ANCILLA
PROJ = ClauseOperatorKind.PROJECTOR


def falsifies(bits, clause_ints, n):
    return all((bits[n - abs(l)] == "1") != (l > 0) for l in clause_ints)


clause_strategy = st.integers(3, 7).flatmap(
    lambda n: st.tuples(
        st.just(n),
        st.lists(st.integers(1, n), min_size=1, max_size=3, unique=True),
        st.lists(st.booleans(), min_size=3, max_size=3),
    )
)


@settings(max_examples=40, deadline=None)
@given(clause_strategy)
def test_projector_truth_table(data):
    n, vars_, signs = data
    ints = tuple(v if s else -v for v, s in zip(vars_, signs))
    m = mpo_to_dense(clause_mpo(Clause.from_ints(ints), n, kind=PROJ), n)
    want = np.diag([0.0 if falsifies(format(b, f"0{n}b"), ints, n) else 1.0 for b in range(2 ** n)])
    assert np.array_equal(m, want)


@settings(max_examples=40, deadline=None)
@given(clause_strategy, st.booleans())
def test_ancilla_truth_table(data, compact):
    n, vars_, signs = data
    ints = tuple(v if s else -v for v, s in zip(vars_, signs))
    m = mpo_to_dense(clause_mpo(Clause.from_ints(ints), n, n, ANC, compact=compact), n + 1)
    for b in range(2 ** n):
        bits = format(b, f"0{n}b")
        for a in (0, 1):
            col = m[:, 2 * b + a]
            out = np.zeros(2 ** (n + 1))
            # falsified components are reset to ancilla 0, others untouched
            out[2 * b + (0 if falsifies(bits, ints, n) else a)] = 1.0
            assert np.array_equal(col, out)


def test_clause_bond_dimensions():
    c = Clause.from_ints((1, -3, 5))
    assert clause_mpo(c, 6, kind=PROJ).max_bond == 2
    assert clause_mpo(c, 6, 6, ANC).max_bond == 3
    assert clause_mpo(c, 6, 6, ANC, compact=True).max_bond == 2


def test_compact_equals_literal():
    c = Clause.from_ints((-2, 4, 1))
    a = mpo_to_dense(clause_mpo(c, 5, 5, ANC), 6)
    b = mpo_to_dense(clause_mpo(c, 5, 5, ANC, compact=True), 6)
    assert np.array_equal(a, b)


def test_projector_is_idempotent():
    m = mpo_to_dense(clause_mpo(Clause.from_ints((1, 2, -4)), 5, kind=PROJ), 5)
    assert np.array_equal(m @ m, m)


def test_clause_operator_rejects_bad_input():
    with pytest.raises(InvalidInputError):
        clause_mpo(Clause.from_ints((1, 9)), 5, kind=PROJ)
    with pytest.raises(InvalidInputError):
        clause_mpo(Clause.from_ints((1, 2)), 5, 2, ANC)


@pytest.mark.parametrize("n", range(1, 8))
def test_diffuser_dense_and_involution(n):
    m = mpo_to_dense(diffuser_mpo(n))
    s = oracles.plus_state(n)
    assert np.allclose(m, np.eye(2 ** n) - 2 * np.outer(s, s), atol=1e-12)
    assert np.allclose(m @ m, np.eye(2 ** n), atol=1e-12)
    assert diffuser_mpo(n).max_bond <= 2


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 7).flatmap(lambda n: st.sets(st.integers(0, 2 ** n - 1), min_size=1, max_size=5)
                                  .map(lambda s: (n, sorted(format(x, f"0{n}b") for x in s)))))
def test_known_w_oracle(data):
    n, sols = data
    op = oracle_mpo_known_w(sols, n)
    m = mpo_to_dense(op)
    assert np.array_equal(m, oracles.reflection(n, sols))
    assert np.array_equal(m @ m, np.eye(2 ** n))
    if n > 1:
        assert op.max_bond <= 1 + len(sols)


def test_known_w_rejects_duplicates_and_bad_strings():
    with pytest.raises(InvalidInputError):
        oracle_mpo_known_w(["01", "01"], 2)
    with pytest.raises(InvalidInputError):
        oracle_mpo_known_w(["012"], 3)
    with pytest.raises(InvalidInputError):
        oracle_mpo_known_w([], 3)


def test_sum_of_products_rank():
    rng = np.random.default_rng(0)
    terms = [[rng.normal(size=(2, 2)) for _ in range(4)] for _ in range(3)]
    op = sum_of_products(terms)
    assert op.max_bond == 3
    want = sum(oracles.kron_all(t) for t in terms)
    assert np.allclose(mpo_to_dense(op), want)


def permutation_gate(n, fn):
    """Dense matrix of the basis permutation ``bits -> fn(bits)``."""
    m = np.zeros((2 ** n, 2 ** n))
    for bits in itertools.product((0, 1), repeat=n):
        out = fn(list(bits))
        m[int("".join(map(str, out)), 2), int("".join(map(str, bits)), 2)] = 1.0
    return m


def _toggle(controls, pols, target):
    def fn(b):
        if all(b[c] == int(p) for c, p in zip(controls, pols)):
            b[target] ^= 1
        return b
    return fn


@pytest.mark.parametrize("pols", list(itertools.product((True, False), repeat=2)))
@pytest.mark.parametrize("sites", [(0, 1, 2), (2, 0, 3), (3, 1, 0), (0, 3, 1)])
def test_ccx_dense(sites, pols):
    n = 4
    gate = g.ccx(*sites, polarity=pols)
    m = mpo_to_dense(gate_mpo(gate, n), n)
    assert np.array_equal(m, permutation_gate(n, _toggle(sites[:2], pols, sites[2])))


@pytest.mark.parametrize("pol", [True, False])
@pytest.mark.parametrize("c,t", [(0, 2), (2, 0), (1, 2)])
def test_cx_dense(c, t, pol):
    m = mpo_to_dense(gate_mpo(g.cx(c, t, pol), 3), 3)
    assert np.array_equal(m, permutation_gate(3, _toggle([c], [pol], t)))


@pytest.mark.parametrize("kind,mat", [("H", g.H), ("X", g.X), ("Z", g.Z)])
def test_single_qubit_gates(kind, mat):
    gate = getattr(g, kind.lower())(1)
    m = mpo_to_dense(gate_mpo(gate, 3), 3)
    assert np.allclose(m, oracles.kron_all([np.eye(2), mat, np.eye(2)]))
    assert np.allclose(m @ m, np.eye(8))


@pytest.mark.parametrize("sites", [(0, 1), (1, 3), (3, 1), (2, 0)])
def test_two_site_unitary(sites):
    rng = np.random.default_rng(1)
    q, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    n = 4
    m = mpo_to_dense(gate_mpo(g.Gate("U", sites, matrix=q), n), n)
    # reference: act with q on (sites[0], sites[1]) as the (high, low) factor
    want = np.zeros((16, 16), dtype=complex)
    for col in range(16):
        b = [int(ch) for ch in format(col, "04b")]
        for y in range(4):
            out = list(b)
            out[sites[0]], out[sites[1]] = y >> 1, y & 1
            want[int("".join(map(str, out)), 2), col] += q[y, 2 * b[sites[0]] + b[sites[1]]]
    assert np.allclose(m, want, atol=1e-12)


def test_gate_validation():
    with pytest.raises(InvalidInputError):
        g.Gate("CX", (1, 1))
    with pytest.raises(InvalidInputError):
        g.Gate("U", (0,), matrix=np.array([[1.0, 1.0], [0.0, 1.0]]))
    with pytest.raises(InvalidInputError):
        g.Gate("SWAP", (0, 1))
    with pytest.raises(InvalidInputError):
        gate_mpo(g.h(5), 3)
