"""Hot inner loops, compiled with numba when available.

Every kernel has a pure-numpy twin with the same signature. The compiled path
is used unless ``QIGROVER_NUMBA`` is set to ``0``/``false``/``no`` or numba
cannot be imported. ``USE_NUMBA`` reflects the choice made at import time; the
``*_numpy`` and ``*_numba`` names stay importable for benchmarks and tests.
"""
from __future__ import annotations

import os

import numpy as np

_FLAG = os.environ.get("QIGROVER_NUMBA", "1").strip().lower()

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _FLAG not in ("0", "false", "no", "off")

# 2**20 assignments per numpy chunk keeps temporaries around 8 MB
_CHUNK = 1 << 20


def _njit(func):
    if HAVE_NUMBA:
        return numba.njit(cache=True, nogil=True)(func)
    return func


# --------------------------------------------------------------------------
# brute-force model counting
#
# A clause is encoded as (mask, pattern): assignment b falsifies it iff
# (b & mask) == pattern, where bit j-1 of b holds variable j.
# --------------------------------------------------------------------------


def count_models_numpy(masks: np.ndarray, patterns: np.ndarray, n: int) -> int:
    total = 0
    size = 1 << n
    for start in range(0, size, _CHUNK):
        b = np.arange(start, min(size, start + _CHUNK), dtype=np.int64)
        alive = np.ones(b.shape, dtype=bool)
        for m, p in zip(masks, patterns):
            alive &= (b & m) != p
        total += int(np.count_nonzero(alive))
    return total


def list_models_numpy(masks: np.ndarray, patterns: np.ndarray, n: int) -> np.ndarray:
    out = []
    size = 1 << n
    for start in range(0, size, _CHUNK):
        b = np.arange(start, min(size, start + _CHUNK), dtype=np.int64)
        alive = np.ones(b.shape, dtype=bool)
        for m, p in zip(masks, patterns):
            alive &= (b & m) != p
        out.append(b[alive])
    return np.concatenate(out) if out else np.zeros(0, dtype=np.int64)


@_njit
def _count_models_jit(masks, patterns, n):
    total = 0
    n_clauses = masks.shape[0]
    for b in range(1 << n):
        ok = True
        for c in range(n_clauses):
            if (b & masks[c]) == patterns[c]:
                ok = False
                break
        if ok:
            total += 1
    return total


@_njit
def _list_models_jit(masks, patterns, n, count):
    out = np.empty(count, dtype=np.int64)
    k = 0
    n_clauses = masks.shape[0]
    for b in range(1 << n):
        ok = True
        for c in range(n_clauses):
            if (b & masks[c]) == patterns[c]:
                ok = False
                break
        if ok:
            out[k] = b
            k += 1
    return out


def count_models_numba(masks: np.ndarray, patterns: np.ndarray, n: int) -> int:
    return int(_count_models_jit(masks, patterns, n))


def list_models_numba(masks: np.ndarray, patterns: np.ndarray, n: int) -> np.ndarray:
    count = _count_models_jit(masks, patterns, n)
    return _list_models_jit(masks, patterns, n, count)


# --------------------------------------------------------------------------
# batched perfect sampling from a right-canonical MPS
#
# ``stack`` holds the site tensors zero-padded to (n, chi, d, chi) and
# ``left`` the true left bond dimension of each site. ``uniforms`` has one row
# per draw and one column per site.
# --------------------------------------------------------------------------


def sample_batch_numpy(stack: np.ndarray, left: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
    n_draws, n_sites = uniforms.shape
    d = stack.shape[2]
    out = np.empty((n_draws, n_sites), dtype=np.int64)
    env = np.zeros((n_draws, stack.shape[1]), dtype=stack.dtype)
    env[:, 0] = 1.0
    rows = np.arange(n_draws)
    for k in range(n_sites):
        cand = np.einsum("dl,lxr->dxr", env, stack[k])
        probs = np.einsum("dxr,dxr->dx", cand, cand.conj()).real
        cum = np.cumsum(probs, axis=1)
        target = uniforms[:, k] * cum[:, -1]
        x = np.minimum((cum <= target[:, None]).sum(axis=1), d - 1)
        out[:, k] = x
        chosen = cand[rows, x]
        norm = np.sqrt(probs[rows, x])
        norm[norm == 0.0] = 1.0
        env = chosen / norm[:, None]
    return out


@_njit
def _sample_batch_jit(stack, left, uniforms):
    n_draws, n_sites = uniforms.shape
    chi = stack.shape[1]
    d = stack.shape[2]
    out = np.empty((n_draws, n_sites), dtype=np.int64)
    env = np.zeros(chi, dtype=stack.dtype)
    cand = np.zeros((d, chi), dtype=stack.dtype)
    probs = np.zeros(d)
    for s in range(n_draws):
        env[:] = 0.0
        env[0] = 1.0
        for k in range(n_sites):
            lk = left[k]
            total = 0.0
            for x in range(d):
                p = 0.0
                for r in range(chi):
                    acc = stack[k, 0, x, r] * 0.0
                    for l in range(lk):
                        acc += env[l] * stack[k, l, x, r]
                    cand[x, r] = acc
                    p += (acc.real * acc.real) + (acc.imag * acc.imag)
                probs[x] = p
                total += p
            target = uniforms[s, k] * total
            cum = 0.0
            pick = d - 1
            for x in range(d):
                cum += probs[x]
                if cum > target:
                    pick = x
                    break
            out[s, k] = pick
            norm = np.sqrt(probs[pick])
            if norm == 0.0:
                norm = 1.0
            for r in range(chi):
                env[r] = cand[pick, r] / norm
    return out


def sample_batch_numba(stack: np.ndarray, left: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
    return _sample_batch_jit(np.ascontiguousarray(stack), left.astype(np.int64), uniforms)


if USE_NUMBA:
    count_models = count_models_numba
    list_models = list_models_numba
    sample_batch = sample_batch_numba
else:
    count_models = count_models_numpy
    list_models = list_models_numpy
    sample_batch = sample_batch_numpy
