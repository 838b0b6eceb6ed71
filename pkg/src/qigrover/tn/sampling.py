"""Perfect sampling and exhaustive support enumeration for MPS."""
from __future__ import annotations

import numpy as np

from .. import _kernels
from ..errors import InvalidStateError
from .core import Mps, canonicalize, norm_squared

NORM_TOLERANCE = 1e-6


def _right_canonical(state: Mps) -> list[np.ndarray]:
    """Site tensors of ``state`` in right-canonical form with unit norm."""
    ns = norm_squared(state)
    if abs(ns.real - 1.0) > NORM_TOLERANCE:
        raise InvalidStateError(f"state is not normalized (norm^2 = {ns.real:.3e})")
    rc = canonicalize(state, 0)
    ts = list(rc.tensors)
    ts[0] = ts[0] / np.linalg.norm(ts[0])
    return ts


def _stack(ts: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    chi = max(max(t.shape[0], t.shape[2]) for t in ts)
    d = ts[0].shape[1]
    stack = np.zeros((len(ts), chi, d, chi), dtype=np.result_type(*ts))
    for k, t in enumerate(ts):
        stack[k, : t.shape[0], :, : t.shape[2]] = t
    left = np.array([t.shape[0] for t in ts], dtype=np.int64)
    return stack, left


def sample(state: Mps, rng_seed: int, size: int | None = None):
    """Draw bitstrings exactly from ``|<b|state>|^2``.

    Each site is sampled from its conditional distribution given the values
    already drawn to its left, which needs the state to be normalized and is
    exact (no Markov chain). Returns one string, or a list of ``size`` strings.
    """
    ts = _right_canonical(state)
    stack, left = _stack(ts)
    rng = np.random.default_rng(rng_seed)
    count = 1 if size is None else size
    draws = _kernels.sample_batch(stack, left, rng.random((count, len(ts))))
    digits = "0123456789abcdef"
    out = ["".join(digits[x] for x in row) for row in draws]
    return out[0] if size is None else out


def enumerate_support(state: Mps, min_probability: float) -> list[tuple[str, float]]:
    """All basis strings whose probability is at least ``min_probability``.

    Depth-first search over prefixes; a prefix is abandoned once its marginal
    probability drops below the threshold, so the cost is proportional to the
    number of surviving strings times ``n chi^2``.
    """
    ts = _right_canonical(state)
    n = len(ts)
    d = ts[0].shape[1]
    found: list[tuple[str, float]] = []
    stack = [(0, np.ones(1, dtype=ts[0].dtype), "")]
    while stack:
        k, env, prefix = stack.pop()
        if k == n:
            found.append((prefix, float(np.vdot(env, env).real)))
            continue
        for x in range(d - 1, -1, -1):
            nxt = env @ ts[k][:, x, :]
            if np.vdot(nxt, nxt).real >= min_probability:
                stack.append((k + 1, nxt, prefix + str(x)))
    found.sort()
    return found
