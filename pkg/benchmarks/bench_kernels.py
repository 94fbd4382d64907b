"""Compare the compiled and numpy kernels on random Pauli workloads.

Usage::

    python benchmarks/bench_kernels.py [--sites 8 10 12] [--terms 64] [--repeat 5]

Prints one CSV row per (kernel, sites) with the best wall time of each
backend and the speed-up.  Results are also checked for agreement.
"""

import argparse
import sys
import timeit

import numpy as np

from bbdfs import _pykernels

try:
    from bbdfs import _ckernels
except ImportError:  # pragma: no cover - extension not built
    _ckernels = None


def workload(n, terms, columns, seed=0):
    rng = np.random.default_rng(seed)
    dim = 1 << n
    x = rng.integers(0, dim, size=terms, dtype=np.uint64)
    z = rng.integers(0, dim, size=terms, dtype=np.uint64)
    c = rng.normal(size=terms) + 1j * rng.normal(size=terms)
    states = rng.normal(size=(dim, columns)) + 1j * rng.normal(size=(dim, columns))
    u = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))[0]
    return x, z, c, np.ascontiguousarray(states), u


def cases(mod, n, w):
    x, z, c, states, u = w
    return {
        "pauli_dense": lambda: mod.pauli_dense(x, z, c, n),
        "apply_pauli": lambda: mod.apply_pauli(int(x[0]), int(z[0]), complex(c[0]), states),
        "apply_1q": lambda: mod.apply_1q(u, n // 2, states),
    }


def best(fn, repeat):
    """Best per-call time; each repeat runs enough calls to last about 0.2 s."""
    timer = timeit.Timer(fn)
    number, _ = timer.autorange()
    return min(timer.repeat(repeat=repeat, number=number)) / number


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sites", type=int, nargs="+", default=[8, 9, 10, 11, 12])
    p.add_argument("--terms", type=int, default=64)
    p.add_argument("--columns", type=int, default=8)
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    if _ckernels is None:
        print("compiled extension not built; only the numpy backend is available", file=sys.stderr)
    print("kernel,sites,python_s,cython_s,speedup")
    for n in args.sites:
        w = workload(n, args.terms, args.columns)
        py = cases(_pykernels, n, w)
        cy = cases(_ckernels, n, w) if _ckernels else {}
        for name, fn in py.items():
            t_py = best(fn, args.repeat)
            if name in cy:
                assert np.allclose(fn(), cy[name](), atol=1e-9), name
                t_cy = best(cy[name], args.repeat)
                print(f"{name},{n},{t_py:.6f},{t_cy:.6f},{t_py / t_cy:.2f}")
            else:
                print(f"{name},{n},{t_py:.6f},,")


if __name__ == "__main__":
    main()
