import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qigrover import _kernels as k
from qigrover.sat import clause_masks, gen_random_3sat
from qigrover.tn import Mps, normalize
from qigrover.tn.sampling import _right_canonical, _stack

pytestmark = pytest.mark.skipif(not k.HAVE_NUMBA, reason="numba not importable")


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 14), st.floats(1.0, 6.0), st.integers(0, 1000))
def test_model_kernels_agree(n, ratio, seed):
    masks, patterns = clause_masks(gen_random_3sat(n, ratio, seed))
    assert k.count_models_numpy(masks, patterns, n) == k.count_models_numba(masks, patterns, n)
    assert np.array_equal(k.list_models_numpy(masks, patterns, n), k.list_models_numba(masks, patterns, n))


@pytest.mark.parametrize("cplx", [False, True])
def test_sampling_kernels_agree(cplx):
    rng = np.random.default_rng(0)
    n, chi = 7, 4
    dims = [1] + [min(chi, 2 ** min(j, n - j)) for j in range(1, n)] + [1]
    ts = []
    for j in range(n):
        t = rng.normal(size=(dims[j], 2, dims[j + 1]))
        ts.append(t + 1j * rng.normal(size=t.shape) if cplx else t)
    stack, left = _stack(_right_canonical(normalize(Mps(tuple(ts), 0.0, None))))
    uniforms = rng.random((500, n))
    assert np.array_equal(k.sample_batch_numpy(stack, left, uniforms), k.sample_batch_numba(stack, left, uniforms))


def test_flag_selects_implementation():
    assert k.count_models is (k.count_models_numba if k.USE_NUMBA else k.count_models_numpy)


def test_env_flag_disables_numba(monkeypatch):
    import importlib

    monkeypatch.setenv("QIGROVER_NUMBA", "0")
    fresh = importlib.reload(k)
    try:
        assert not fresh.USE_NUMBA
        assert fresh.count_models is fresh.count_models_numpy
    finally:
        monkeypatch.delenv("QIGROVER_NUMBA")
        importlib.reload(k)
