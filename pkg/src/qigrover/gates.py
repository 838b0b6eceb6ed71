"""Elementary gate descriptions shared by the oracle and circuit layers."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

H = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
X = np.array([[0.0, 1.0], [1.0, 0.0]])
Z = np.array([[1.0, 0.0], [0.0, -1.0]])
I2 = np.eye(2)
P0 = np.array([[1.0, 0.0], [0.0, 0.0]])
P1 = np.array([[0.0, 0.0], [0.0, 1.0]])

UNITARY_TOLERANCE = 1e-10

_N_CONTROLS = {"H": 0, "X": 0, "Z": 0, "CX": 1, "CCX": 2}


@dataclass(frozen=True)
class Gate:
    """One gate on explicit MPS sites.

    For ``CX`` and ``CCX`` the controls come first in ``sites`` and the target
    last. ``control_polarity[k]`` is True for an ordinary control (acts when
    the qubit is 1) and False for an anti-control (acts when it is 0). Kind
    ``U`` carries an explicit 2x2 or 4x4 ``matrix`` on one or two sites, the
    first listed site being the more significant factor.
    """

    kind: str
    sites: tuple
    control_polarity: tuple = ()
    matrix: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "sites", tuple(int(s) for s in self.sites))
        if len(set(self.sites)) != len(self.sites):
            raise InvalidInputError(f"{self.kind}: repeated site in {self.sites}")
        if any(s < 0 for s in self.sites):
            raise InvalidInputError(f"{self.kind}: negative site")
        if self.kind == "U":
            m = np.asarray(self.matrix)
            dim = 2 ** len(self.sites)
            if len(self.sites) not in (1, 2) or m.shape != (dim, dim):
                raise InvalidInputError("U gate needs one or two sites and a matching matrix")
            if np.max(np.abs(m.conj().T @ m - np.eye(dim))) > UNITARY_TOLERANCE:
                raise InvalidInputError("supplied gate matrix is not unitary")
            object.__setattr__(self, "matrix", m)
            return
        if self.kind not in _N_CONTROLS:
            raise InvalidInputError(f"unknown gate kind {self.kind!r}")
        nc = _N_CONTROLS[self.kind]
        if len(self.sites) != nc + 1:
            raise InvalidInputError(f"{self.kind} acts on {nc + 1} sites")
        pol = tuple(bool(p) for p in self.control_polarity) or (True,) * nc
        if len(pol) != nc:
            raise InvalidInputError(f"{self.kind} needs {nc} control polarities")
        object.__setattr__(self, "control_polarity", pol)

    @property
    def controls(self) -> tuple:
        return self.sites[:-1] if self.kind in ("CX", "CCX") else ()

    @property
    def target(self) -> int:
        return self.sites[-1]


def h(site: int) -> Gate:
    return Gate("H", (site,))


def x(site: int) -> Gate:
    return Gate("X", (site,))


def z(site: int) -> Gate:
    return Gate("Z", (site,))


def cx(control: int, target: int, polarity: bool = True) -> Gate:
    return Gate("CX", (control, target), (polarity,))


def ccx(c1: int, c2: int, target: int, polarity=(True, True)) -> Gate:
    return Gate("CCX", (c1, c2, target), tuple(polarity))
