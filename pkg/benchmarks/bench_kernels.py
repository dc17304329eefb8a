"""Compare the numba and numpy implementations of the pointwise kernels.

    python benchmarks/bench_kernels.py [--sizes 256 1024 4096] [--repeats 50]

The numba timings exclude compilation (one warm-up call per kernel).
"""

import argparse
import statistics
import time

import numpy as np

from gnrelax import _kernels


def _time(fn, args, repeats):
    fn(*args)
    samples = []
    for _ in range(repeats):
        tic = time.perf_counter()
        fn(*args)
        samples.append(time.perf_counter() - tic)
    return statistics.median(samples)


def cases(n, rng):
    x = np.linspace(0, 2 * np.pi, n, endpoint=False)
    h = 1.0 + 0.3 * np.cos(x)
    e = 1e-3 * rng.standard_normal(n)
    w = rng.standard_normal(n)
    zeta = h - 1.0
    u = 0.1 * np.sin(x)
    eta = h + e
    k = np.fft.fftfreq(n, 1.0 / n).astype(float)
    c = rng.standard_normal(n) / n
    d = rng.standard_normal(n) / n
    xs = rng.uniform(0, 2 * np.pi, n)
    return {
        "relax_rotate": (e, w, h, 300.0, 1e-4),
        "margin_ratio": (h, e, w),
        "fg_pointwise": (zeta, u, eta, w, 1e4),
        "trig_interp": (c, d, k, xs),
        "trig_interp_real": (c, d, k, xs),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[256, 1024, 4096])
    ap.add_argument("--repeats", type=int, default=50)
    args = ap.parse_args(argv)
    if _kernels.numba_impl is None:
        raise SystemExit("numba is not importable; nothing to compare")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<18}{'n':>7}{'numpy [us]':>14}{'numba [us]':>14}{'speedup':>10}")
    for n in args.sizes:
        for name, fargs in cases(n, rng).items():
            reps = max(3, args.repeats // (10 if name.startswith("trig") and n > 1024 else 1))
            t_np = _time(getattr(_kernels.numpy_impl, name), fargs, reps)
            t_nb = _time(getattr(_kernels.numba_impl, name), fargs, reps)
            print(f"{name:<18}{n:>7}{1e6 * t_np:>14.1f}{1e6 * t_nb:>14.1f}{t_np / t_nb:>10.2f}")


if __name__ == "__main__":
    main()
