"""Compare the numba kernels against their numpy twins.

Run: python3 benchmarks/bench_kernels.py [--n 22] [--repeat 3]
"""
import argparse
import time

import numpy as np

from qigrover import _kernels as k
from qigrover.sat import clause_masks, gen_random_3sat
from qigrover.tn import canonicalize
from qigrover.tn.sampling import _right_canonical, _stack
from qigrover.qiga import post_oracle_state


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=22)
    ap.add_argument("--draws", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    if not k.HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")

    f = gen_random_3sat(args.n, 4.2, 1)
    masks, patterns = clause_masks(f)
    state = canonicalize(post_oracle_state(gen_random_3sat(16, 3.0, 2)), 0)
    stack, left = _stack(_right_canonical(state))
    uniforms = np.random.default_rng(0).random((args.draws, stack.shape[0]))

    cases = [
        ("count_models", lambda impl: impl(masks, patterns, args.n), k.count_models_numpy, k.count_models_numba),
        ("list_models", lambda impl: impl(masks, patterns, args.n), k.list_models_numpy, k.list_models_numba),
        ("sample_batch", lambda impl: impl(stack, left, uniforms), k.sample_batch_numpy, k.sample_batch_numba),
    ]
    print(f"{'kernel':<14}{'numpy [s]':>12}{'numba [s]':>12}{'speedup':>10}  agree")
    for name, call, np_impl, nb_impl in cases:
        call(nb_impl)  # compile outside the timing
        t_np, out_np = best_of(lambda: call(np_impl), args.repeat)
        t_nb, out_nb = best_of(lambda: call(nb_impl), args.repeat)
        agree = np.array_equal(np.asarray(out_np), np.asarray(out_nb))
        print(f"{name:<14}{t_np:>12.4f}{t_nb:>12.4f}{t_np / t_nb:>10.1f}  {agree}")


if __name__ == "__main__":
    main()
