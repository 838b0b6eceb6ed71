import pytest
from hypothesis import given, settings, strategies as st

import oracles
from qigrover.errors import DimacsParseError, InvalidInputError
from qigrover.sat import (
    Clause,
    CnfFormula,
    Quasi1dSpec,
    brute_force,
    brute_force_count,
    evaluate,
    gen_quasi_1d,
    gen_random_3sat,
    parse_dimacs,
    solution_to_dimacs,
    write_dimacs,
)

# model counts from the reference enumerator in tests/oracles.py
FROZEN_COUNTS = {(8, 0): 0, (10, 1): 2, (12, 2): 1, (14, 3): 16, (16, 4): 24}
FROZEN_FIRST = {(10, 1): "0100100100", (12, 2): "101011001000", (14, 3): "00000000011001"}


@pytest.mark.parametrize("key", sorted(FROZEN_COUNTS))
def test_frozen_counts(key):
    f = gen_random_3sat(key[0], 4.2, key[1])
    count, sols = brute_force(f)
    assert count == FROZEN_COUNTS[key] == brute_force_count(f)
    if key in FROZEN_FIRST:
        assert sols[0] == FROZEN_FIRST[key]


@pytest.mark.parametrize("seed", range(6))
def test_brute_force_matches_reference(seed):
    n = 6 + seed
    f = gen_random_3sat(n, 3.5, 100 + seed)
    want = oracles.models(n, [c.to_ints() for c in f.clauses])
    assert brute_force(f) == (len(want), want)


def test_evaluate_bit_order():
    # variable 1 is the last character
    f = CnfFormula(3, ((1,),))
    assert evaluate(f, "001") and not evaluate(f, "100")
    with pytest.raises(InvalidInputError):
        evaluate(f, "01")


def test_solution_line():
    assert solution_to_dimacs("101") == "v 1 -2 3 0"


def test_brute_force_guard():
    with pytest.raises(InvalidInputError):
        brute_force(CnfFormula(31, ((1, 2, 3),)))


formulas = st.integers(3, 12).flatmap(
    lambda n: st.lists(
        st.lists(st.integers(1, n), min_size=1, max_size=3, unique=True).flatmap(
            lambda vs: st.lists(st.booleans(), min_size=len(vs), max_size=len(vs)).map(
                lambda ss: tuple(v if s else -v for v, s in zip(vs, ss)))),
        min_size=0, max_size=20,
    ).map(lambda cl: CnfFormula(n, tuple(cl)))
)


@settings(max_examples=60, deadline=None)
@given(formulas)
def test_dimacs_round_trip(f):
    back = parse_dimacs(write_dimacs(f, ["generated"]))
    assert back == f
    assert parse_dimacs(write_dimacs(f).decode()) == f


def test_parse_multiline_and_percent():
    text = "c hello\np cnf 4 2\n1 -2\n 3 0 -4\n0\n%\n0\n"
    f = parse_dimacs(text)
    assert [c.to_ints() for c in f.clauses] == [(1, -2, 3), (-4,)]


@pytest.mark.parametrize(
    "text,line",
    [
        ("p cnf 3 1\n1 x 0\n", 2),
        ("1 2 0\np cnf 3 1\n", 1),
        ("p cnf 3 1\n1 5 0\n", 2),
        ("p cnf 3 2\n1 2 0\n", 1),
        ("p cnf 3 1\np cnf 3 1\n", 2),
        ("p cnf 3 1\n0\n", 2),
        ("p cnf 3 1\n1 -1 0\n", 2),
        ("p dnf 3 1\n", 1),
    ],
)
def test_parse_errors_carry_line(text, line):
    with pytest.raises(DimacsParseError) as exc:
        parse_dimacs(text)
    assert exc.value.line == line
    assert str(exc.value).startswith(f"line {line}: ")


@pytest.mark.parametrize("text", ["c nothing\n", "p cnf 3 1\n1 2"])
def test_parse_errors_at_end(text):
    with pytest.raises(DimacsParseError) as exc:
        parse_dimacs(text)
    assert exc.value.line is None


def test_clause_rejects_repeated_variable():
    with pytest.raises(InvalidInputError):
        Clause.from_ints((2, 2))


@pytest.mark.parametrize("n,ratio", [(10, 4.2), (20, 4.2), (7, 3.0)])
def test_random_generator_shape(n, ratio):
    f = gen_random_3sat(n, ratio, 5)
    assert f.n_clauses == round(ratio * n)
    for c in f.clauses:
        assert len(set(c.variables)) == 3 and max(c.variables) <= n
    assert gen_random_3sat(n, ratio, 5) == f
    assert gen_random_3sat(n, ratio, 6) != f


def test_random_generator_signs_balanced():
    f = gen_random_3sat(200, 4.2, 0)
    neg = sum(l.negated for c in f.clauses for l in c.literals)
    total = 3 * f.n_clauses
    assert abs(neg / total - 0.5) < 0.05


@pytest.mark.parametrize("n", [20, 40, 60])
def test_quasi_1d_structure(n):
    spec = Quasi1dSpec(n, 10, 37, 2, seed=3)
    f = gen_quasi_1d(spec)
    blocks = n // 10
    assert f.n_clauses == blocks * 37 + 2 * (blocks - 1)
    intra, inter = f.clauses[: blocks * 37], f.clauses[blocks * 37:]
    for k, c in enumerate(intra):
        assert {(v - 1) // 10 for v in c.variables} == {k // 37}
    for c in inter:
        touched = sorted({(v - 1) // 10 for v in c.variables})
        assert len(touched) == 2 and touched[1] == touched[0] + 1
        assert len(set(c.variables)) == 3


def test_quasi_1d_validation():
    with pytest.raises(InvalidInputError):
        Quasi1dSpec(25, 10, 37, 2)
    with pytest.raises(InvalidInputError):
        Quasi1dSpec(20, 2, 1, 1)
