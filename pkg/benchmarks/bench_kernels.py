"""Compare the Cython kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Kernel timings call both modules directly. Full fits run in a subprocess per
backend, because the backend is chosen once at import.
"""
import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from robustpca2d import _fallback

try:
    from robustpca2d import _kernels
except ImportError:
    _kernels = None

FIT_SNIPPET = """
import json, time
import numpy as np
from robustpca2d import BACKEND
from robustpca2d.datasets import synth_face_stack, vectorize
from robustpca2d.l1 import fit_l1_pca, fit_2dl1_pca
from robustpca2d.r1 import R1Options, fit_2dr1_pca
ds = synth_face_stack(20, 5, (56, 46), seed=0)
out = {"backend": BACKEND}
for name, fn in [
    ("2dr1pca", lambda: fit_2dr1_pca(ds, 10, R1Options(max_iters=60))),
    ("l1pca", lambda: fit_l1_pca(vectorize(ds), 10, seed=0)),
    ("2dl1pca", lambda: fit_2dl1_pca(ds, 10, seed=0)),
]:
    t = time.perf_counter(); fn(); out[name] = time.perf_counter() - t
print(json.dumps(out))
"""


def kernel_cases(rng):
    A = rng.standard_normal((60, 60))
    A = A @ A.T
    Xt = rng.standard_normal((400, 1000))
    w = rng.standard_normal(1000)
    p = np.where(rng.standard_normal(400) < 0, -1, 1).astype(np.int8)
    F = rng.standard_normal((200, 56, 46))
    wr = rng.standard_normal(56)
    q = rng.integers(0, 46, 200).astype(np.intp)
    return {
        "jacobi_eigh 60x60": lambda m: m.jacobi_eigh(A, 1e-12, 100),
        "polarity_1d 400x1000": lambda m: m.polarity_1d(Xt, w),
        "flip_sum_1d 400x1000": lambda m: m.flip_sum_1d(Xt, p),
        "polarity_2d 200x56x46": lambda m: m.polarity_2d(F, wr),
        "flip_sum_2d 200x56x46": lambda m: m.flip_sum_2d(F, p[:200], q),
    }


def best_time(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def run_fits(backend):
    env = dict(os.environ, ROBUSTPCA2D_BACKEND=backend)
    res = subprocess.run([sys.executable, "-c", FIT_SNIPPET], env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--skip-fits", action="store_true")
    args = ap.parse_args(argv)

    if _kernels is None:
        print("compiled extension not available; only the fallback can be timed")
    rng = np.random.default_rng(0)
    print(f"{'kernel':28s} {'python':>10s} {'cython':>10s} {'speedup':>8s}")
    for name, call in kernel_cases(rng).items():
        tp = best_time(lambda: call(_fallback), args.repeat)
        if _kernels is None:
            print(f"{name:28s} {tp:10.5f} {'-':>10s} {'-':>8s}")
            continue
        tc = best_time(lambda: call(_kernels), args.repeat)
        print(f"{name:28s} {tp:10.5f} {tc:10.5f} {tp / tc:7.2f}x")

    if args.skip_fits:
        return 0
    backends = ["python"] + (["cython"] if _kernels is not None else [])
    fits = {b: run_fits(b) for b in backends}
    print()
    print(f"{'fit (k = 10, 100 images 56x46)':28s} " + " ".join(f"{b:>10s}" for b in backends))
    for name in ("2dr1pca", "l1pca", "2dl1pca"):
        print(f"{name:28s} " + " ".join(f"{fits[b][name]:10.3f}" for b in backends))
    return 0


if __name__ == "__main__":
    sys.exit(main())
