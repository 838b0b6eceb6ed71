"""Gate-level oracle and diffuser built from a Toffoli ladder.

Register layout for ``n`` data qubits (``2n + 1`` sites)::

    sites 0 .. n-1      data qubits, in bitstring order
    sites n .. 2n-1     ladder ancillas a_1 .. a_n, prepared in |0>
    site  2n            kickback ancilla, prepared in |->

The ladder sets ``a_k = 1`` iff data bits ``1..k`` agree with ``w``; each
data qubit controls with polarity ``w_k`` (anti-control where ``w_k = 0``).
A CX from ``a_n`` onto the ``|->`` ancilla flips the sign of the matching
component, and the reversed ladder returns every ``a_k`` to ``|0>``.
"""
from __future__ import annotations

import dataclasses
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import gates as g
from .errors import InvalidInputError
from .gates import Gate
from .oracle import gate_mpo
from .tn import (
    Mps,
    TruncationPolicy,
    amplitude,
    apply_mpo,
    entanglement_profile,
    product_state,
)

MINUS = np.array([1.0, -1.0]) / math.sqrt(2.0)
PLUS = np.array([1.0, 1.0]) / math.sqrt(2.0)


@dataclass(frozen=True)
class Circuit:
    """Gate list with snapshot positions.

    ``layer_marks[k]`` is the number of gates applied when snapshot ``k`` is
    taken; ``labels[k]`` names it.
    """

    n_data: int
    n_ancilla: int
    gates: tuple = ()
    layer_marks: tuple = ()
    labels: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "layer_marks", tuple(self.layer_marks))
        labels = tuple(self.labels) or tuple(f"layer{k}" for k in range(len(self.layer_marks)))
        object.__setattr__(self, "labels", labels)
        if len(labels) != len(self.layer_marks):
            raise InvalidInputError("one label per layer mark")
        if list(self.layer_marks) != sorted(self.layer_marks):
            raise InvalidInputError("layer marks must be ascending")
        if self.layer_marks and not (0 <= self.layer_marks[0] and self.layer_marks[-1] <= len(self.gates)):
            raise InvalidInputError("layer mark outside the gate list")
        for gate in self.gates:
            if max(gate.sites) >= self.n_sites:
                raise InvalidInputError(f"gate {gate} outside the {self.n_sites}-site register")

    @property
    def n_sites(self) -> int:
        return self.n_data + self.n_ancilla

    def then(self, other: "Circuit") -> "Circuit":
        if (self.n_data, self.n_ancilla) != (other.n_data, other.n_ancilla):
            raise InvalidInputError("circuits act on different registers")
        shift = len(self.gates)
        return Circuit(
            self.n_data,
            self.n_ancilla,
            self.gates + other.gates,
            self.layer_marks + tuple(m + shift for m in other.layer_marks),
            self.labels + other.labels,
        )


def _ancilla(n: int, k: int) -> int:
    return n + k - 1


def build_oracle_circuit(w: str) -> Circuit:
    """Sign-flip oracle for the single marked string ``w``."""
    n = len(w)
    if n < 1 or set(w) - {"0", "1"}:
        raise InvalidInputError("w must be a nonempty 0/1 string")
    ladder = [g.cx(0, _ancilla(n, 1), w[0] == "1")]
    for k in range(2, n + 1):
        ladder.append(g.ccx(k - 1, _ancilla(n, k - 1), _ancilla(n, k), (w[k - 1] == "1", True)))
    kick = g.cx(_ancilla(n, n), 2 * n)
    gates_ = ladder + [kick] + ladder[::-1]
    marks = list(range(1, len(gates_) + 1))
    labels = [f"ladder{k}" for k in range(1, n + 1)] + ["kickback"]
    labels += [f"unladder{k}" for k in range(n, 0, -1)]
    return Circuit(n, n + 1, tuple(gates_), tuple(marks), tuple(labels))


def _hadamard_column(n: int, label: str) -> Circuit:
    return Circuit(n, n + 1, tuple(g.h(k) for k in range(n)), (n,), (label,))


def build_diffuser_circuit(n: int) -> Circuit:
    """``H^n . oracle(0...0) . H^n``, which equals ``1 - 2|s><s|`` exactly."""
    if n < 1:
        raise InvalidInputError("n must be at least 1")
    core = build_oracle_circuit("0" * n)
    core = dataclasses.replace(core, labels=tuple("diffuser:" + s for s in core.labels))
    return _hadamard_column(n, "diffuser:H-in").then(core).then(_hadamard_column(n, "diffuser:H-out"))


def initial_register(n: int, data: str | None = None) -> Mps:
    """``|s>`` (or the basis string ``data``) on the data sites, ancillas ready."""
    vecs = []
    for k in range(n):
        if data is None:
            vecs.append(PLUS)
        else:
            vecs.append(np.array([1.0, 0.0]) if data[k] == "0" else np.array([0.0, 1.0]))
    vecs += [np.array([1.0, 0.0])] * n + [MINUS]
    return product_state(2 * n + 1, np.array(vecs))


@dataclass(frozen=True)
class LayerSnapshot:
    mark: int
    label: str
    chi: int
    entropies: tuple

    @property
    def max_entropy(self) -> float:
        return max(self.entropies, default=0.0)


def run_circuit(
    state: Mps,
    circuit: Circuit,
    policy: TruncationPolicy | None = None,
    snapshots: bool = True,
) -> tuple[Mps, list]:
    """Apply the gates in order, recording a profile at every layer mark."""
    if state.n_sites != circuit.n_sites:
        raise InvalidInputError("state and circuit sizes differ")
    policy = TruncationPolicy() if policy is None else policy
    marks = dict(zip(circuit.layer_marks, circuit.labels)) if snapshots else {}
    out = []
    for k, gate in enumerate(circuit.gates, start=1):
        state = apply_mpo(gate_mpo(gate, circuit.n_sites), state, policy)
        if k in marks:
            prof = entanglement_profile(state)
            out.append(LayerSnapshot(k, marks[k], state.max_bond, tuple(e.entropy for e in prof)))
    return state, out


@dataclass
class CircuitGroverTrace:
    """Per-layer snapshots of a gate-level Grover run.

    ``boundaries[q]`` is the snapshot of the state after ``q`` full
    iterations; ``p_success[q]`` the probability of the marked string there.
    """

    n: int
    w: str
    layers: list = field(default_factory=list)
    boundaries: list = field(default_factory=list)
    p_success: list = field(default_factory=list)

    @property
    def intra_chi_max(self) -> int:
        return max(s.chi for _, s in self.layers)

    @property
    def boundary_chi(self) -> list:
        return [s.chi for s in self.boundaries]


def _snapshot(state: Mps, mark: int, label: str) -> LayerSnapshot:
    prof = entanglement_profile(state)
    return LayerSnapshot(mark, label, state.max_bond, tuple(e.entropy for e in prof))


def run_grover_circuit(
    w: str, iterations: int, policy: TruncationPolicy | None = None
) -> CircuitGroverTrace:
    """Gate-level Grover search for ``w`` from ``|s>|0...0->``."""
    n = len(w)
    policy = TruncationPolicy() if policy is None else policy
    step = build_oracle_circuit(w).then(build_diffuser_circuit(n))
    state = initial_register(n)
    target = w + "0" * n
    trace = CircuitGroverTrace(n, w)

    def success(st):
        # the kickback ancilla is |->, whose overlap is sqrt(2) <0|psi>
        a0 = amplitude(st, target + "0").value
        return abs(a0 * math.sqrt(2.0)) ** 2

    start = _snapshot(state, 0, "start")
    trace.boundaries.append(start)
    trace.p_success.append(success(state))
    for q in range(1, iterations + 1):
        state, snaps = run_circuit(state, step, policy)
        trace.layers.extend((q, s) for s in snaps)
        trace.boundaries.append(snaps[-1])
        trace.p_success.append(success(state))
    return trace


def data_operator(circuit: Circuit) -> np.ndarray:
    """Dense action on the data register with ancillas prepared and read back.

    Entry ``[b', b]`` is ``<b'|<0...0-| C |b>|0...0->``; small ``n`` only.
    """
    n = circuit.n_data
    dim = 2 ** n
    out = np.zeros((dim, dim), dtype=complex)
    for b in range(dim):
        bits = format(b, f"0{n}b")
        state, _ = run_circuit(initial_register(n, bits), circuit, snapshots=False)
        for bp in range(dim):
            bra = format(bp, f"0{n}b")
            # <-| = (<0| - <1|)/sqrt(2)
            a = amplitude(state, bra + "0" * n + "0").value - amplitude(state, bra + "0" * n + "1").value
            out[bp, b] = a / math.sqrt(2.0)
    return out


# ---------------------------------------------------------------------------
# text format
# ---------------------------------------------------------------------------


def _pol(p: bool) -> str:
    return "+" if p else "-"


def circuit_to_text(c: Circuit) -> str:
    lines = [f"circuit {c.n_data} {c.n_ancilla}"]
    marks = dict(zip(c.layer_marks, c.labels))
    if 0 in marks:
        lines.append(f"MARK {marks[0]}")
    for k, gate in enumerate(c.gates, start=1):
        if gate.kind in ("CX", "CCX"):
            ctrl = " ".join(f"{s}:{_pol(p)}" for s, p in zip(gate.controls, gate.control_polarity))
            lines.append(f"{gate.kind} {ctrl} {gate.target}")
        elif gate.kind == "U":
            raise InvalidInputError("explicit-matrix gates have no text form")
        else:
            lines.append(f"{gate.kind} {gate.target}")
        if k in marks:
            lines.append(f"MARK {marks[k]}")
    return "\n".join(lines) + "\n"


def circuit_from_text(text: str) -> Circuit:
    header = None
    gates_, marks, labels = [], [], []
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        op = parts[0]
        try:
            if op == "circuit":
                header = (int(parts[1]), int(parts[2]))
            elif op == "MARK":
                marks.append(len(gates_))
                labels.append(" ".join(parts[1:]) or f"layer{len(marks) - 1}")
            elif op in ("H", "X", "Z"):
                (site,) = parts[1:]
                gates_.append(Gate(op, (int(site),)))
            elif op in ("CX", "CCX"):
                *ctrls, tgt = parts[1:]
                sites, pols = [], []
                for tok in ctrls:
                    s, p = tok.split(":")
                    if p not in "+-" or len(p) != 1:
                        raise ValueError(tok)
                    sites.append(int(s))
                    pols.append(p == "+")
                gates_.append(Gate(op, tuple(sites) + (int(tgt),), tuple(pols)))
            else:
                raise ValueError(op)
        except (ValueError, IndexError, InvalidInputError) as exc:
            raise InvalidInputError(f"line {lineno}: cannot parse {line!r} ({exc})") from None
    if header is None:
        raise InvalidInputError("missing 'circuit <n_data> <n_ancilla>' header")
    return Circuit(header[0], header[1], tuple(gates_), tuple(marks), tuple(labels))
