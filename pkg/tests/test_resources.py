import json
import math

import pytest
from hypothesis import given, settings, strategies as st

from qigrover.errors import InvalidInputError
from qigrover.resources import (
    ASSUMPTIONS,
    SECONDS_PER_YEAR,
    ResourceParams,
    code_size_bisection,
    code_size_closed_form,
    epsilon_budget,
    estimate,
    gate_count,
    rows_to_csv,
    rows_to_json,
    runtime_seconds,
    surface_code_qubits,
    total_noise_for,
)


def test_gate_count():
    assert gate_count(2) == 60 * 2 * 2
    assert gate_count(40) == 60 * 40 * 2 ** 20


def test_epsilon_spot_values():
    assert 4e-4 <= epsilon_budget(5, 0.5) <= 6e-4
    assert 3e-10 <= epsilon_budget(40, 0.5) <= 5e-10


@settings(max_examples=50)
@given(st.integers(1, 200), st.floats(0.01, 0.99))
def test_budget_times_gates_is_total_noise(n, p):
    assert epsilon_budget(n, p) * gate_count(n) == pytest.approx(total_noise_for(p), rel=1e-12)


def test_total_noise_convention():
    assert total_noise_for(0.5) == pytest.approx(0.8, rel=1e-15)
    assert total_noise_for(0.25) == pytest.approx(1.6)


@settings(max_examples=50)
@given(st.integers(1, 150))
def test_monotone_in_n(n):
    assert gate_count(n + 1) > gate_count(n)
    assert epsilon_budget(n + 1) < epsilon_budget(n)
    assert code_size_closed_form(n + 1, 1e-3) >= code_size_closed_form(n, 1e-3)


def test_runtime():
    years = runtime_seconds(80, 1e-8) / SECONDS_PER_YEAR
    assert years == pytest.approx(60 * 80 * 2 ** 40 * 1e-8 / SECONDS_PER_YEAR)
    assert runtime_seconds(100, 1e-8) / runtime_seconds(80, 1e-8) == pytest.approx(100 / 80 * 2 ** 10)


@settings(max_examples=80)
@given(st.integers(1, 400), st.sampled_from([1e-4, 1e-3, 3e-3, 9e-3]))
def test_code_size_closed_form_equals_bisection(n, eps):
    assert code_size_closed_form(n, eps) == code_size_bisection(n, eps)


def test_code_size_is_minimal():
    n, eps, th = 80, 1e-3, 1e-2
    nc = code_size_closed_form(n, eps, th)

    def ok(m):
        return eps * (eps / th) ** (math.sqrt(m) / 2) * math.sqrt(2) ** n <= 1.0 + 1e-12

    assert ok(nc) and not ok(nc - 1)


def test_code_size_grows_quadratically():
    sizes = [code_size_closed_form(n, 1e-3) for n in (160, 320, 640, 1280)]
    ratios = [b / a for a, b in zip(sizes, sizes[1:])]
    assert all(3.5 < r < 4.6 for r in ratios)
    assert ratios[-1] == pytest.approx(4.0, abs=0.15)


def test_surface_code_estimate():
    est = surface_code_qubits(40, 1e-3)
    assert est.total_physical == 40 * est.physical_per_logical
    assert est.logical_error * math.sqrt(2) ** 40 <= 1.0 + 1e-9
    assert any("prefactor" in a for a in est.assumptions)


def test_code_size_rejects_bad_rates():
    with pytest.raises(InvalidInputError):
        code_size_closed_form(10, 0.02, 0.01)
    with pytest.raises(InvalidInputError):
        code_size_bisection(10, -1.0)


def test_estimate_rows_and_serialization():
    rows = [estimate(ResourceParams(n, eps_ph=1e-3)) for n in (20, 40)]
    assert rows[1]["N_c"] == code_size_closed_form(40, 1e-3)
    assert rows_to_csv(rows).splitlines()[0].startswith("n,gate_count,")
    doc = json.loads(rows_to_json(rows, ResourceParams(20)))
    assert doc["assumptions"] == json.loads(json.dumps(ASSUMPTIONS))
    assert estimate(ResourceParams(10))["N_c"] is None


def test_input_validation():
    with pytest.raises(InvalidInputError):
        gate_count(0)
    with pytest.raises(InvalidInputError):
        total_noise_for(1.0)
    with pytest.raises(InvalidInputError):
        runtime_seconds(10, 0.0)
