"""Back-of-envelope hardware requirements for running Grover on a device.

Proportionality constants left open by the scaling laws are set to 1 and
reported under ``assumptions`` in every estimate.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass

from .errors import InvalidInputError

GATES_PER_QUBIT_ITERATION = 60
LAMBDA_AT_HALF = 0.8
DEFAULT_EPS_TH = 0.01
SECONDS_PER_YEAR = 365.25 * 24 * 3600


def gate_count(n: int) -> float:
    """``60 n 2^{n/2}`` gates for a full search."""
    if n < 1:
        raise InvalidInputError("n must be at least 1")
    return GATES_PER_QUBIT_ITERATION * n * 2.0 ** (n / 2.0)


def total_noise_for(target_success: float) -> float:
    """``Lambda(p) = -ln(p) * 0.8 / ln 2``, so that ``Lambda(1/2) = 0.8``."""
    if not 0.0 < target_success < 1.0:
        raise InvalidInputError("target_success must lie in (0, 1)")
    return -math.log(target_success) * LAMBDA_AT_HALF / math.log(2.0)


def epsilon_budget(n: int, target_success: float = 0.5) -> float:
    """Largest error per gate compatible with ``target_success``."""
    return total_noise_for(target_success) / gate_count(n)


def runtime_seconds(n: int, gate_time: float) -> float:
    if gate_time <= 0:
        raise InvalidInputError("gate_time must be positive")
    return gate_count(n) * gate_time


def _log_logical_budget(n_c: float, n: int, eps_ph: float, eps_th: float) -> float:
    """``log(eps_L (sqrt 2)^n)`` with ``eps_L = eps_ph (eps_ph/eps_th)^{sqrt(N_c)/2}``."""
    return (
        math.log(eps_ph)
        + 0.5 * math.sqrt(n_c) * math.log(eps_ph / eps_th)
        + 0.5 * n * math.log(2.0)
    )


def _check_code_inputs(eps_ph: float, eps_th: float):
    if eps_ph <= 0 or eps_th <= 0:
        raise InvalidInputError("error rates must be positive")
    if eps_ph >= eps_th:
        raise InvalidInputError("eps_ph must be below eps_th; error correction cannot help")


def code_size_closed_form(n: int, eps_ph: float, eps_th: float = DEFAULT_EPS_TH) -> int:
    _check_code_inputs(eps_ph, eps_th)
    root = 2.0 * (0.5 * n * math.log(2.0) + math.log(eps_ph)) / math.log(eps_th / eps_ph)
    n_c = max(1, math.ceil(root * root)) if root > 0 else 1
    # ceil() of a float square can land one off; settle on the boundary
    while n_c > 1 and _log_logical_budget(n_c - 1, n, eps_ph, eps_th) <= 0.0:
        n_c -= 1
    while _log_logical_budget(n_c, n, eps_ph, eps_th) > 0.0:
        n_c += 1
    return n_c


def code_size_bisection(n: int, eps_ph: float, eps_th: float = DEFAULT_EPS_TH) -> int:
    _check_code_inputs(eps_ph, eps_th)
    hi = 1
    while _log_logical_budget(hi, n, eps_ph, eps_th) > 0.0:
        hi *= 2
    lo = 0  # predicate false at lo (or lo is a sentinel), true at hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _log_logical_budget(mid, n, eps_ph, eps_th) <= 0.0:
            hi = mid
        else:
            lo = mid
    return max(hi, 1)


@dataclass(frozen=True)
class SurfaceCodeEstimate:
    n: int
    eps_ph: float
    eps_th: float
    physical_per_logical: int
    logical_error: float
    total_physical: int
    assumptions: tuple = (
        "eps_L = eps_ph * (eps_ph/eps_th)**(sqrt(N_c)/2) with unit prefactor",
        "requirement eps_L * sqrt(2)**n <= 1",
        "total footprint counts n logical qubits",
    )


def surface_code_qubits(n: int, eps_ph: float, eps_th: float = DEFAULT_EPS_TH) -> SurfaceCodeEstimate:
    """Smallest code size ``N_c`` keeping the whole run's logical error O(1).

    ``N_c`` grows like ``n^2``, so the footprint ``n N_c`` grows like ``n^3``.
    """
    n_c = code_size_closed_form(n, eps_ph, eps_th)
    eps_l = eps_ph * (eps_ph / eps_th) ** (math.sqrt(n_c) / 2.0)
    return SurfaceCodeEstimate(n, eps_ph, eps_th, n_c, eps_l, n_c * n)


@dataclass(frozen=True)
class ResourceParams:
    n: int
    target_success: float = 0.5
    gate_time_seconds: float = 1e-8
    eps_ph: float | None = None
    eps_th: float = DEFAULT_EPS_TH


def estimate(p: ResourceParams) -> dict:
    row = {
        "n": p.n,
        "gate_count": gate_count(p.n),
        "total_noise_Lambda": total_noise_for(p.target_success),
        "epsilon_budget": epsilon_budget(p.n, p.target_success),
        "runtime_s": runtime_seconds(p.n, p.gate_time_seconds),
        "runtime_years": runtime_seconds(p.n, p.gate_time_seconds) / SECONDS_PER_YEAR,
        "N_c": None,
        "total_physical_qubits": None,
    }
    if p.eps_ph is not None:
        sc = surface_code_qubits(p.n, p.eps_ph, p.eps_th)
        row["N_c"] = sc.physical_per_logical
        row["total_physical_qubits"] = sc.total_physical
    return row


ASSUMPTIONS = {
    "gate_model": "60 n gates per iteration, 2^(n/2) iterations",
    "Lambda(p)": "-ln(p)*0.8/ln(2); equals 0.8 at p=1/2, other p extrapolated",
    "surface_code": list(SurfaceCodeEstimate.assumptions),
}


def rows_to_csv(rows) -> str:
    rows = list(rows)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def rows_to_json(rows, params: ResourceParams | None = None) -> str:
    doc = {"rows": list(rows), "assumptions": ASSUMPTIONS}
    if params is not None:
        doc["params"] = asdict(params)
    return json.dumps(doc, indent=2, sort_keys=True)
