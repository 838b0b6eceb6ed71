"""Matrix product states and operators.

Conventions used throughout the package:

* MPS site tensors have legs ``(left, phys, right)``; MPO tensors have legs
  ``(left, phys_out, phys_in, right)``. Boundary bonds have dimension 1.
* Site 0 is the leftmost tensor and carries the most significant qubit, so a
  bitstring written ``b_{n-1} ... b_0`` lists site values in site order and the
  dense vector index of a basis state is ``int(bitstring, 2)``.
* The overall scale of a state lives in ``log2_prefactor``; tensor entries are
  kept O(1) by shifting powers of two into the prefactor, which is exact in
  floating point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
import scipy.linalg

from ..errors import InvalidInputError

DEFAULT_CUTOFF = 1e-12


@dataclass
class TruncationPolicy:
    """How SVD compressions discard weight.

    Singular values below ``rel_cutoff * s_max`` are dropped at every bond, and
    at most ``max_bond`` are kept when it is set. ``error`` accumulates the
    relative squared weight discarded by every truncation made with this
    policy; it is the only mutable state in the tn layer.
    """

    rel_cutoff: float = DEFAULT_CUTOFF
    max_bond: int | None = None
    error: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.rel_cutoff < 1.0:
            raise InvalidInputError("rel_cutoff must lie in [0, 1)")
        if self.max_bond is not None and self.max_bond < 1:
            raise InvalidInputError("max_bond must be positive")

    def keep(self, s: np.ndarray) -> int:
        """Number of singular values (sorted descending) to retain."""
        if s.size == 0 or s[0] <= 0.0:
            return 1
        k = int(np.count_nonzero(s > self.rel_cutoff * s[0]))
        k = max(k, 1)
        if self.max_bond is not None:
            k = min(k, self.max_bond)
        total = float(np.dot(s, s))
        if k < s.size and total > 0.0:
            tail = s[k:]
            self.error += float(np.dot(tail, tail)) / total
        return k


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    if a.flags.writeable:
        a = a.copy()
        a.flags.writeable = False
    return a


def _pow2_shift(t: np.ndarray) -> int:
    """Exponent e such that t * 2**-e has max-abs entry in [0.5, 1)."""
    m = float(np.max(np.abs(t))) if t.size else 0.0
    if m == 0.0 or not math.isfinite(m):
        return 0
    return math.frexp(m)[1]


def _rescaled(t: np.ndarray) -> tuple[np.ndarray, int]:
    e = _pow2_shift(t)
    if e == 0:
        return t, 0
    return t * (2.0 ** -e), e


@dataclass(frozen=True)
class Mps:
    """Chain of order-3 tensors times ``2**log2_prefactor``.

    ``center`` records an orthogonality centre when one is known: every tensor
    left of it is left-orthonormal and every tensor right of it is
    right-orthonormal. Values are immutable; operations return new states.
    """

    tensors: tuple
    log2_prefactor: float = 0.0
    center: int | None = None

    def __post_init__(self):
        ts = tuple(_frozen(t) for t in self.tensors)
        object.__setattr__(self, "tensors", ts)
        if not ts:
            raise InvalidInputError("an MPS needs at least one site")
        d = ts[0].shape[1]
        if ts[0].shape[0] != 1 or ts[-1].shape[2] != 1:
            raise InvalidInputError("boundary bonds must have dimension 1")
        for i, t in enumerate(ts):
            if t.ndim != 3 or t.shape[1] != d:
                raise InvalidInputError(f"site {i}: bad tensor shape {t.shape}")
            if i and ts[i - 1].shape[2] != t.shape[0]:
                raise InvalidInputError(f"bond {i - 1}: dimensions disagree")
        if self.center is not None and not 0 <= self.center < len(ts):
            raise InvalidInputError("center outside the chain")

    @property
    def n_sites(self) -> int:
        return len(self.tensors)

    @property
    def phys_dim(self) -> int:
        return self.tensors[0].shape[1]

    @property
    def bond_dims(self) -> list[int]:
        return [t.shape[2] for t in self.tensors[:-1]]

    @property
    def max_bond(self) -> int:
        return max(self.bond_dims, default=1)

    @property
    def dtype(self):
        return np.result_type(*self.tensors)

    def replace(self, tensors=None, log2_prefactor=None, center="keep") -> "Mps":
        return Mps(
            tuple(self.tensors if tensors is None else tensors),
            self.log2_prefactor if log2_prefactor is None else log2_prefactor,
            self.center if center == "keep" else center,
        )


@dataclass(frozen=True)
class Mpo:
    """Operator acting on sites ``first_site .. first_site + len(tensors) - 1``."""

    tensors: tuple
    first_site: int = 0

    def __post_init__(self):
        ts = tuple(_frozen(t) for t in self.tensors)
        object.__setattr__(self, "tensors", ts)
        if not ts:
            raise InvalidInputError("an MPO needs at least one site")
        if ts[0].shape[0] != 1 or ts[-1].shape[3] != 1:
            raise InvalidInputError("boundary bonds must have dimension 1")
        d = ts[0].shape[1]
        for i, t in enumerate(ts):
            if t.ndim != 4 or t.shape[1] != d or t.shape[2] != d:
                raise InvalidInputError(f"MPO site {i}: bad tensor shape {t.shape}")
            if i and ts[i - 1].shape[3] != t.shape[0]:
                raise InvalidInputError(f"MPO bond {i - 1}: dimensions disagree")
        if self.first_site < 0:
            raise InvalidInputError("first_site must be nonnegative")

    @property
    def n_sites(self) -> int:
        return len(self.tensors)

    @property
    def last_site(self) -> int:
        return self.first_site + len(self.tensors) - 1

    @property
    def phys_dim(self) -> int:
        return self.tensors[0].shape[1]

    @property
    def bond_dims(self) -> list[int]:
        return [t.shape[3] for t in self.tensors[:-1]]

    @property
    def max_bond(self) -> int:
        return max(self.bond_dims, default=1)


class Scaled(NamedTuple):
    """A scalar represented as ``mantissa * 2**log2``."""

    mantissa: complex
    log2: float

    @property
    def value(self) -> complex:
        return self.mantissa * 2.0 ** self.log2

    @property
    def real(self) -> float:
        return float(np.real(self.mantissa)) * 2.0 ** self.log2

    @property
    def log2_abs(self) -> float:
        """``log2 |value|``; exact when the mantissa is a power of two."""
        m = abs(self.mantissa)
        if m == 0.0:
            return -math.inf
        return math.log2(m) + self.log2


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------


def product_state(n: int, local_vectors) -> Mps:
    """Product state from one local vector per site (or one shared vector).

    >>> s = product_state(3, np.ones(2) / np.sqrt(2))
    >>> s.max_bond
    1
    """
    if n < 1:
        raise InvalidInputError("n must be at least 1")
    vecs = np.asarray(local_vectors)
    if vecs.ndim == 1:
        vecs = np.broadcast_to(vecs, (n, vecs.shape[0]))
    if vecs.shape[0] != n:
        raise InvalidInputError(f"expected {n} local vectors, got {vecs.shape[0]}")
    tensors = []
    log2 = 0
    for i, v in enumerate(vecs):
        if not np.any(v):
            raise InvalidInputError(f"local vector {i} is zero")
        v, e = _rescaled(np.array(v))
        log2 += e
        tensors.append(v.reshape(1, -1, 1))
    return Mps(tuple(tensors), float(log2), None)


def basis_state(bits: str, d: int = 2) -> Mps:
    """Computational basis state for a bitstring written in site order."""
    vecs = np.zeros((len(bits), d))
    for i, ch in enumerate(bits):
        vecs[i, int(ch)] = 1.0
    return product_state(len(bits), vecs)


def identity_mpo(first_site: int, length: int, d: int = 2) -> Mpo:
    eye = np.eye(d).reshape(1, d, d, 1)
    return Mpo(tuple(eye for _ in range(length)), first_site)


# ---------------------------------------------------------------------------
# linear algebra helpers
# ---------------------------------------------------------------------------


def _svd(m: np.ndarray):
    try:
        return np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError:
        return scipy.linalg.svd(m, full_matrices=False, lapack_driver="gesvd")


def _left_push(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Left-orthonormalize ``a`` and absorb the remainder into ``b``."""
    l, d, r = a.shape
    q, rr = np.linalg.qr(a.reshape(l * d, r))
    return q.reshape(l, d, q.shape[1]), np.tensordot(rr, b, axes=(1, 0))


def _right_push(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Right-orthonormalize ``b`` and absorb the remainder into ``a``."""
    l, d, r = b.shape
    q, rr = np.linalg.qr(b.reshape(l, d * r).T)
    return np.tensordot(a, rr.T, axes=(2, 0)), q.T.reshape(q.shape[1], d, r)


def _move_center(ts: list, log2: float, frm: int | None, to: int) -> tuple[list, float]:
    n = len(ts)
    if frm is None:
        for k in range(n - 1):
            ts[k], ts[k + 1] = _left_push(ts[k], ts[k + 1])
            ts[k + 1], e = _rescaled(ts[k + 1])
            log2 += e
        frm = n - 1
    for k in range(frm, to):
        ts[k], ts[k + 1] = _left_push(ts[k], ts[k + 1])
        ts[k + 1], e = _rescaled(ts[k + 1])
        log2 += e
    for k in range(frm, to, -1):
        ts[k - 1], ts[k] = _right_push(ts[k - 1], ts[k])
        ts[k - 1], e = _rescaled(ts[k - 1])
        log2 += e
    return ts, log2


def canonicalize(state: Mps, center: int = 0) -> Mps:
    """Return an equivalent state with its orthogonality centre at ``center``."""
    if center < 0:
        center += state.n_sites
    if state.center == center:
        return state
    ts, log2 = _move_center(list(state.tensors), state.log2_prefactor, state.center, center)
    return Mps(tuple(ts), log2, center)


def _sweep_truncate(ts: list, log2: float, start: int, stop: int, policy: TruncationPolicy):
    """Right-to-left SVD truncation from centre ``start`` down to ``stop``."""
    for k in range(start, stop, -1):
        l, d, r = ts[k].shape
        u, s, vh = _svd(ts[k].reshape(l, d * r))
        keep = policy.keep(s)
        ts[k] = vh[:keep].reshape(keep, d, r)
        ts[k - 1] = np.tensordot(ts[k - 1], u[:, :keep] * s[:keep], axes=(2, 0))
        ts[k - 1], e = _rescaled(ts[k - 1])
        log2 += e
    return ts, log2


def compress(state: Mps, policy: TruncationPolicy | None = None) -> Mps:
    """SVD-compress every bond; the result has its centre at site 0."""
    policy = TruncationPolicy() if policy is None else policy
    n = state.n_sites
    ts, log2 = _move_center(list(state.tensors), state.log2_prefactor, state.center, n - 1)
    ts, log2 = _sweep_truncate(ts, log2, n - 1, 0, policy)
    return Mps(tuple(ts), log2, 0)


# ---------------------------------------------------------------------------
# the three workhorse operations: contraction, MPO application, summation
# ---------------------------------------------------------------------------


def inner(a: Mps, b: Mps) -> Scaled:
    """``<a|b>`` as mantissa and base-2 exponent."""
    if a.n_sites != b.n_sites or a.phys_dim != b.phys_dim:
        raise InvalidInputError("inner product of states with different shapes")
    env = np.ones((1, 1))
    log2 = 0
    for ta, tb in zip(a.tensors, b.tensors):
        env = np.tensordot(env, tb, axes=(1, 0))  # (la, d, rb)
        env = np.tensordot(ta.conj(), env, axes=((0, 1), (0, 1)))  # (ra, rb)
        env, e = _rescaled(env)
        log2 += e
    return Scaled(complex(env[0, 0]), float(log2) + a.log2_prefactor + b.log2_prefactor)


def norm_squared(state: Mps) -> Scaled:
    return inner(state, state)


def normalize(state: Mps) -> Mps:
    ns = norm_squared(state)
    m = float(np.real(ns.mantissa))
    if m <= 0.0:
        raise InvalidInputError("cannot normalize a zero state")
    # sqrt(m) is absorbed into the first tensor, the exponent into the prefactor
    ts = list(state.tensors)
    ts[0] = ts[0] / math.sqrt(m)
    center = state.center if state.center == 0 else None
    return Mps(tuple(ts), state.log2_prefactor - ns.log2 / 2.0, center)


def scale(state: Mps, c: complex) -> Mps:
    """Multiply a state by a scalar."""
    if c == 0:
        return zero_like(state)
    m, e = math.frexp(abs(c))
    factor = complex(c) / abs(c) * m
    ts = list(state.tensors)
    ts[0] = ts[0] * (factor.real if factor.imag == 0.0 else factor)
    return Mps(tuple(ts), state.log2_prefactor + e, state.center)


def zero_like(state: Mps) -> Mps:
    d = state.phys_dim
    z = np.zeros((1, d, 1), dtype=state.dtype)
    return Mps(tuple(z for _ in range(state.n_sites)), 0.0, None)


def _fuse(a: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Contract an MPO tensor into an MPS tensor, merging the bonds."""
    l, _, r = a.shape
    big_l, y, _, big_r = w.shape
    t = np.tensordot(a, w, axes=(1, 2))  # (l, r, L, y, R)
    t = t.transpose(0, 2, 3, 1, 4)
    return t.reshape(l * big_l, y, r * big_r)


def apply_mpo(op: Mpo, state: Mps, policy: TruncationPolicy | None = None) -> Mps:
    """Apply ``op`` to ``state`` and recompress the touched window.

    Sites outside ``op``'s window are left untouched. The returned state has
    its orthogonality centre at the first window site.
    """
    policy = TruncationPolicy() if policy is None else policy
    a, b = op.first_site, op.last_site
    if b >= state.n_sites:
        raise InvalidInputError("MPO window does not fit inside the state")
    if op.phys_dim != state.phys_dim:
        raise InvalidInputError("MPO and MPS physical dimensions differ")
    ts, log2 = _move_center(list(state.tensors), state.log2_prefactor, state.center, a)
    for k, w in enumerate(op.tensors):
        ts[a + k] = _fuse(ts[a + k], w)
    for k in range(a, b):
        ts[k], ts[k + 1] = _left_push(ts[k], ts[k + 1])
    ts[b], e = _rescaled(ts[b])
    log2 += e
    ts, log2 = _sweep_truncate(ts, log2, b, a, policy)
    ts[a], e = _rescaled(ts[a])
    return Mps(tuple(ts), log2 + e, a)


def add(
    a: Mps,
    b: Mps,
    coeff_a: complex = 1.0,
    coeff_b: complex = 1.0,
    policy: TruncationPolicy | None = None,
    *,
    compress_result: bool = True,
) -> Mps:
    """``coeff_a * a + coeff_b * b`` via the block-diagonal construction.

    With ``compress_result=False`` the raw block sum is returned, whose
    interior bond dimensions are exactly ``chi_a + chi_b``.
    """
    if a.n_sites != b.n_sites or a.phys_dim != b.phys_dim:
        raise InvalidInputError("cannot add states with different shapes")
    top = max(a.log2_prefactor, b.log2_prefactor)
    ca = coeff_a * 2.0 ** (a.log2_prefactor - top)
    cb = coeff_b * 2.0 ** (b.log2_prefactor - top)
    n = a.n_sites
    dtype = np.result_type(a.dtype, b.dtype, np.asarray(ca), np.asarray(cb))
    if n == 1:
        t = ca * a.tensors[0] + cb * b.tensors[0]
        return Mps((t.astype(dtype, copy=False),), top, None)
    ts = []
    for k, (ta, tb) in enumerate(zip(a.tensors, b.tensors)):
        la, d, ra = ta.shape
        lb, _, rb = tb.shape
        if k == 0:
            t = np.concatenate([ca * ta, cb * tb], axis=2)
        elif k == n - 1:
            t = np.concatenate([ta, tb], axis=0)
        else:
            t = np.zeros((la + lb, d, ra + rb), dtype=dtype)
            t[:la, :, :ra] = ta
            t[la:, :, ra:] = tb
        ts.append(t.astype(dtype, copy=False))
    raw = Mps(tuple(ts), top, None)
    if not compress_result:
        return raw
    return compress(raw, policy)


# ---------------------------------------------------------------------------
# local projections, amplitudes, dense mirrors
# ---------------------------------------------------------------------------


def project_site(state: Mps, site: int, bra) -> Mps:
    """Contract ``<bra|`` into one site and drop it from the chain."""
    n = state.n_sites
    if n < 2:
        raise InvalidInputError("cannot drop the only site of a state")
    if site < 0:
        site += n
    bra = np.asarray(bra)
    mat = np.tensordot(state.tensors[site], bra.conj(), axes=(1, 0))  # (l, r)
    ts = list(state.tensors)
    del ts[site]
    if site > 0:
        ts[site - 1] = np.tensordot(ts[site - 1], mat, axes=(2, 0))
        ts[site - 1], e = _rescaled(ts[site - 1])
    else:
        ts[0] = np.tensordot(mat, ts[0], axes=(1, 0))
        ts[0], e = _rescaled(ts[0])
    return Mps(tuple(ts), state.log2_prefactor + e, None)


def amplitude(state: Mps, bits: Sequence[int] | str) -> Scaled:
    """``<bits|state>`` for a computational basis configuration."""
    if len(bits) != state.n_sites:
        raise InvalidInputError("bitstring length differs from the site count")
    env = np.ones(1)
    log2 = 0
    for t, x in zip(state.tensors, bits):
        env = env @ t[:, int(x), :]
        env, e = _rescaled(env)
        log2 += e
    return Scaled(complex(env[0]), float(log2) + state.log2_prefactor)


def to_dense(state: Mps) -> np.ndarray:
    """Full state vector (exponential in size; meant for checks at small n)."""
    v = state.tensors[0].reshape(state.phys_dim, -1)
    for t in state.tensors[1:]:
        v = np.tensordot(v, t, axes=(1, 0)).reshape(-1, t.shape[2])
    return v.reshape(-1) * 2.0 ** state.log2_prefactor


def mpo_to_dense(op: Mpo, n_sites: int | None = None) -> np.ndarray:
    """Dense matrix of ``op``, padded with identities to ``n_sites`` sites."""
    d = op.phys_dim
    m = op.tensors[0][0]  # (y, x, r)
    for w in op.tensors[1:]:
        m = np.tensordot(m, w, axes=(2, 0))  # (Y, X, y, x, R)
        big_y, big_x, y, x, r = m.shape
        m = m.transpose(0, 2, 1, 3, 4).reshape(big_y * y, big_x * x, r)
    m = m[:, :, 0]
    if n_sites is None:
        return m
    left = d ** op.first_site
    right = d ** (n_sites - op.last_site - 1)
    return np.kron(np.kron(np.eye(left), m), np.eye(right))
