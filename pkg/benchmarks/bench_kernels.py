"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 5]

The first numba call compiles (or loads the on-disk cache) and is excluded.
"""

import argparse
import time

import numpy as np

from freeball import _kernels as K
from freeball.freepoly import words_of_degree


def _best(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(rng):
    # a degree-6 polynomial in 2 variables evaluated at 200 tuples of 4x4 matrices
    words = [w for k in range(7) for w in words_of_degree(2, k)]
    index = {w: i for i, w in enumerate(words)}
    parent = np.array([index[w[:-1]] if len(w) > 1 else -1 for w in words])
    letter = np.array([w[-1] if w else -1 for w in words])
    x = (rng.standard_normal((200, 2, 4, 4)) + 1j * rng.standard_normal((200, 2, 4, 4))) / 4
    coeffs = rng.standard_normal((len(words), 2, 2)) + 0j
    t = (rng.standard_normal((24, 24)) + 1j * rng.standard_normal((24, 24))) / 12
    mono = K._np_word_products(x, parent, letter)
    # sparse 12x12 pencil coefficients, the common case for linearizations
    pen = (rng.standard_normal((2, 12, 12)) * (rng.random((2, 12, 12)) < 0.1)) + 0j
    xs = mono[:, 1:3]
    return [
        ("word_products", lambda: K._np_word_products(x, parent, letter),
         lambda: K._nb_word_products(x, parent, letter)),
        ("kron_dense", lambda: K._np_kron_accumulate(coeffs, mono),
         lambda: K._nb_kron_accumulate(coeffs, mono)),
        ("kron_pencil", lambda: K._np_kron_accumulate(pen, xs), lambda: K._nb_kron_accumulate(pen, xs)),
        ("neumann_sum", lambda: K._np_neumann_sum(t, 200), lambda: K._nb_neumann_sum(t, 200)),
    ]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not K.HAS_NUMBA:
        print("numba not installed; only the numpy path is available")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<18}{'numpy [ms]':>12}{'numba [ms]':>12}{'ratio':>8}")
    for name, f_np, f_nb in cases(rng):
        a = np.asarray(f_np())
        b = np.asarray(f_nb())
        assert np.allclose(a, b, atol=1e-10), name
        t_np = _best(f_np, args.repeat)
        t_nb = _best(f_nb, args.repeat) if K.HAS_NUMBA else float("nan")
        print(f"{name:<18}{1e3 * t_np:>12.3f}{1e3 * t_nb:>12.3f}{t_np / t_nb:>8.2f}")


if __name__ == "__main__":
    main()
