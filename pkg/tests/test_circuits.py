import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from qigrover import gates as g
from qigrover.circuits import (
    Circuit,
    build_diffuser_circuit,
    build_oracle_circuit,
    circuit_from_text,
    circuit_to_text,
    data_operator,
    initial_register,
    run_circuit,
    run_grover_circuit,
)
from qigrover.errors import InvalidInputError
from qigrover.grover import ideal_success, two_state_entropy
from qigrover.tn import to_dense

bitstrings = st.integers(1, 4).flatmap(lambda n: st.text("01", min_size=n, max_size=n))


@settings(max_examples=20, deadline=None)
@given(bitstrings)
def test_oracle_circuit_reflects_w(w):
    n = len(w)
    m = data_operator(build_oracle_circuit(w))
    assert np.allclose(m, oracles.reflection(n, [w]), atol=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_diffuser_circuit(n):
    m = data_operator(build_diffuser_circuit(n))
    s = oracles.plus_state(n)
    assert np.allclose(m, np.eye(2 ** n) - 2 * np.outer(s, s), atol=1e-12)


def test_ancillas_are_restored():
    w = "101"
    for b in range(8):
        bits = format(b, "03b")
        state, _ = run_circuit(initial_register(3, bits), build_oracle_circuit(w))
        v = to_dense(state)
        sign = -1.0 if bits == w else 1.0
        want = to_dense(initial_register(3, bits)) * sign
        assert np.allclose(v, want, atol=1e-12)


def test_oracle_layout_and_marks():
    c = build_oracle_circuit("0110")
    assert (c.n_data, c.n_ancilla, c.n_sites) == (4, 5, 9)
    assert len(c.gates) == 2 * 4 + 1 and c.layer_marks == tuple(range(1, 10))
    assert c.labels[4] == "kickback"
    assert c.gates[0].control_polarity == (False,)
    assert c.gates[1].control_polarity == (True, True)
    d = build_diffuser_circuit(4)
    assert d.labels[0] == "diffuser:H-in" and d.labels[-1] == "diffuser:H-out"


def test_then_concatenates():
    a = build_oracle_circuit("01")
    both = a.then(build_diffuser_circuit(2))
    assert len(both.gates) == len(a.gates) + 2 + 5 + 2
    assert both.layer_marks[-1] == len(both.gates)
    with pytest.raises(InvalidInputError):
        a.then(build_diffuser_circuit(3))


@settings(max_examples=15, deadline=None)
@given(bitstrings)
def test_text_round_trip(w):
    c = build_oracle_circuit(w).then(build_diffuser_circuit(len(w)))
    back = circuit_from_text(circuit_to_text(c))
    assert back == c


def test_text_parse_comments_and_marks():
    text = "# demo\ncircuit 2 1\nMARK start\nH 0  # first\nCX 0:+ 1\nCCX 0:- 1:+ 2\nMARK end\n"
    c = circuit_from_text(text)
    assert c.layer_marks == (0, 3) and c.labels == ("start", "end")
    assert c.gates[2] == g.ccx(0, 1, 2, (False, True))


@pytest.mark.parametrize(
    "text",
    ["H 0\n", "circuit 2 1\nCX 0:x 1\n", "circuit 2 1\nSWAP 0 1\n", "circuit 2 1\nH 7\n", "circuit 2 1\nH\n"],
)
def test_text_parse_errors(text):
    with pytest.raises(InvalidInputError):
        circuit_from_text(text)


def test_circuit_validation():
    with pytest.raises(InvalidInputError):
        Circuit(2, 1, (g.h(0),), (1, 0), ("a", "b"))
    with pytest.raises(InvalidInputError):
        Circuit(2, 1, (g.h(0),), (2,), ("a",))
    with pytest.raises(InvalidInputError):
        build_oracle_circuit("")


@pytest.mark.parametrize("w", ["0110", "11111"])
def test_grover_circuit_matches_theory(w):
    n = len(w)
    tr = run_grover_circuit(w, 4)
    for q, p in enumerate(tr.p_success):
        assert p == pytest.approx(ideal_success(q, n), abs=1e-10)
    assert tr.boundary_chi == [1] + [2] * 4
    for q, snap in enumerate(tr.boundaries):
        # data bonds only; the ancilla register is back to a product state
        for k in range(n - 1):
            assert snap.entropies[k] == pytest.approx(two_state_entropy(n, q, k), abs=1e-9)
        assert max(snap.entropies[n - 1:], default=0.0) < 1e-9
