import json
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from qigrover.errors import InvalidInputError, NumericalFailure
from qigrover.oracle import ClauseOperatorKind
from qigrover.qiga import (
    ClauseOrder,
    QigaOptions,
    Status,
    apply_oracle_open,
    count_solutions,
    post_oracle_state,
    solve,
)
from qigrover.sat import CnfFormula, Quasi1dSpec, brute_force, evaluate, gen_quasi_1d, gen_random_3sat
from qigrover.tn import TruncationPolicy, to_dense

BY_SPAN = QigaOptions(clause_order=ClauseOrder.BY_SPAN)
PROJ = QigaOptions(clause_kind=ClauseOperatorKind.PROJECTOR)
LITERAL = QigaOptions(compact_clauses=False)


def reference(f):
    return oracles.models(f.n_vars, [c.to_ints() for c in f.clauses])


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 11), st.floats(1.0, 6.0), st.integers(0, 10_000),
       st.sampled_from([QigaOptions(), BY_SPAN, PROJ, LITERAL]))
def test_count_matches_reference(n, ratio, seed, opts):
    f = gen_random_3sat(n, ratio, seed)
    assert count_solutions(f, opts) == len(reference(f))


@pytest.mark.parametrize("n,seed", [(14, 3), (16, 4), (18, 7)])
def test_count_matches_brute_force(n, seed):
    f = gen_random_3sat(n, 4.2, seed)
    assert count_solutions(f) == brute_force(f)[0]


@pytest.mark.parametrize("n,seed", [(6, 1), (9, 2), (12, 3)])
@pytest.mark.parametrize("opts", [QigaOptions(), PROJ])
def test_post_oracle_amplitudes(n, seed, opts):
    f = gen_random_3sat(n, 3.0, seed)
    sols = set(reference(f))
    want = np.array([(-1.0 if format(b, f"0{n}b") in sols else 1.0) for b in range(2 ** n)])
    assert np.allclose(to_dense(post_oracle_state(f, opts)), want * 2.0 ** (-n / 2), atol=1e-12)


def test_open_run_keeps_ancilla():
    f = gen_random_3sat(8, 3.0, 0)
    run = apply_oracle_open(f, normalized=False)
    v = to_dense(run.state).reshape(-1, 2)
    sols = {int(b, 2) for b in reference(f)}
    # solutions keep the ancilla in |1>, everything else is reset to |0>
    for b in range(256):
        assert np.allclose(v[b], [0.0, 1.0] if b in sols else [1.0, 0.0], atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(4, 12), st.floats(2.0, 5.0), st.integers(0, 10_000),
       st.sampled_from([QigaOptions(), BY_SPAN, PROJ]))
def test_solve_enumerates_exact_set(n, ratio, seed, opts):
    f = gen_random_3sat(n, ratio, seed)
    rep = solve(f, opts)
    want = reference(f)
    assert rep.count == len(want)
    if not want:
        assert rep.status is Status.UNSAT and rep.solutions == [] and rep.samples == []
        return
    assert rep.status is Status.SOLVED and rep.enumerated
    assert rep.solutions == want
    assert len(rep.samples) == opts.sample_count
    assert all(evaluate(f, b) for b in rep.samples)


def test_samples_are_uniform_over_solutions():
    f = gen_random_3sat(14, 4.2, 3)  # 16 solutions
    rep = solve(f, QigaOptions(sample_count=16000, seed=1))
    hist = Counter(rep.samples)
    assert set(hist) == set(rep.solutions)
    expected = 16000 / rep.count
    # chi-square with 15 degrees of freedom; 99.99% quantile is about 44
    chi2 = sum((c - expected) ** 2 / expected for c in hist.values())
    assert chi2 < 44


def test_sampling_only_above_threshold():
    f = gen_random_3sat(16, 4.2, 4)
    rep = solve(f, QigaOptions(enumerate_threshold=10, sample_count=40))
    assert rep.count == 24 and not rep.enumerated
    assert rep.solutions == sorted(set(rep.samples))
    assert all(evaluate(f, b) for b in rep.samples)


def test_seed_determinism():
    f = gen_random_3sat(12, 3.5, 9)
    a = solve(f, QigaOptions(seed=3)).samples
    assert a == solve(f, QigaOptions(seed=3)).samples
    assert a != solve(f, QigaOptions(seed=4)).samples


def test_empty_and_trivial_formulas():
    assert count_solutions(CnfFormula(5, ())) == 32
    assert count_solutions(CnfFormula(3, ((1,), (-1,)))) == 0
    rep = solve(CnfFormula(3, ((1,), (2,), (3,))))
    assert rep.solutions == ["111"]


def test_quasi_1d_small_bond():
    f = gen_quasi_1d(Quasi1dSpec(40, 10, 37, 2, seed=0))
    rep = solve(f, QigaOptions(sample_count=8))
    assert rep.chi_max <= 64
    assert all(evaluate(f, b) for b in rep.samples)


def test_span_order_lowers_bond():
    f = gen_random_3sat(18, 4.2, 1)
    a = solve(f)
    b = solve(f, BY_SPAN)
    assert a.count == b.count and a.solutions == b.solutions
    assert b.chi_max <= a.chi_max


def test_truncation_overflow_is_reported():
    f = gen_random_3sat(14, 4.2, 2)
    with pytest.raises(NumericalFailure):
        solve(f, QigaOptions(truncation=TruncationPolicy(max_bond=2)))


@pytest.mark.parametrize("p", [1, 2, 3])
def test_slicing_matches_unsliced(p):
    f = gen_random_3sat(14, 4.2, 3)
    base = solve(f)
    sliced = solve(f, QigaOptions(slice_bits=p, sample_count=64))
    assert sliced.count == base.count and sliced.solutions == base.solutions
    assert len(sliced.slices) == 2 ** p
    assert sum(s["count"] for s in sliced.slices) == base.count
    for s in sliced.slices:
        assert s["count"] == sum(w.startswith(s["slice"]) for w in base.solutions)
    assert len(sliced.samples) == 64 and all(evaluate(f, b) for b in sliced.samples)


def test_slicing_is_deterministic_across_threads():
    f = gen_random_3sat(13, 4.0, 8)
    a = solve(f, QigaOptions(slice_bits=3, threads=1))
    b = solve(f, QigaOptions(slice_bits=3, threads=4))
    assert (a.solutions, a.samples, a.slices) == (b.solutions, b.samples, b.slices)


def test_slicing_validates():
    with pytest.raises(InvalidInputError):
        solve(gen_random_3sat(5, 3.0, 0), QigaOptions(slice_bits=5))


def test_report_json():
    f = gen_random_3sat(10, 4.2, 1)
    d = json.loads(solve(f).to_json(extra="x"))
    assert d["status"] == "SOLVED" and d["count"] == 2 and d["extra"] == "x"
    assert d["options"]["clause_order"] == "as-given"
