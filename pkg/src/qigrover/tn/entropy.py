"""Bipartite entanglement diagnostics."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .core import Mps, _svd, canonicalize

RANK_TOLERANCE = 1e-12


class BondEntropy(NamedTuple):
    bond: int  # cut between sites ``bond`` and ``bond + 1``
    entropy: float  # von Neumann entropy in log-2 units
    chi: int  # Schmidt rank across the cut


def schmidt_entropy(s: np.ndarray) -> float:
    p = s * s
    total = p.sum()
    if total <= 0.0:
        return 0.0
    p = p[p > 0.0] / total
    return max(0.0, float(-(p * np.log2(p)).sum()))


def entanglement_profile(state: Mps) -> list[BondEntropy]:
    """Schmidt entropy and rank at every bond of ``state``."""
    ts = list(canonicalize(state, 0).tensors)
    out = []
    for k in range(len(ts) - 1):
        l, d, r = ts[k].shape
        u, s, vh = _svd(ts[k].reshape(l * d, r))
        rank = int(np.count_nonzero(s > RANK_TOLERANCE * s[0])) if s[0] > 0 else 0
        out.append(BondEntropy(k, schmidt_entropy(s), max(rank, 1)))
        ts[k] = u.reshape(l, d, -1)
        ts[k + 1] = np.tensordot(s[:, None] * vh, ts[k + 1], axes=(1, 0))
    return out
