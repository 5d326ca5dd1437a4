"""Time the numba kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Both backends are called in-process through the ``backend=`` argument, and
the numba one is warmed up first so compilation stays out of the timings.
Outputs are compared before timing.
"""

from __future__ import annotations

import argparse
import json
import math
import time

import numpy as np

from schreier_kit import SchreierFamily, kernels
from schreier_kit.family import incidence_matrix
from schreier_kit.isometry import all_signed_permutations


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def norm_case(dim, rows, seed=0):
    fam = SchreierFamily(2, max(12, dim))
    A = incidence_matrix(fam.maximal_elements(range(1, dim + 1)), dim)
    X = np.random.default_rng(seed).standard_normal((rows, dim))
    return (X, A, 3.0), f"family_norms S_2 dim={dim} rows={rows} maximal={len(A)}"


def search_case(dim, restarts, seed=0):
    fam = SchreierFamily(1, 12)
    A = incidence_matrix(fam.maximal_elements(range(1, dim + 1)), dim)
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((60, dim))
    X /= kernels.family_norms(X, A, 3.0, backend="numpy")[0][:, None]
    starts = rng.standard_normal((restarts, dim, dim)) / math.sqrt(dim)
    perms = all_signed_permutations(dim)
    return (starts, X, A, 3.0, perms, 0.5, 1.0, 100), f"lm_restarts S_1 dim={dim} restarts={restarts}"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", default=None)
    args = ap.parse_args()
    if not kernels.HAVE_NUMBA:
        raise SystemExit("numba unavailable (or disabled); nothing to compare")
    cases = [(kernels.family_norms, *norm_case(8, 20_000)),
             (kernels.family_norms, *norm_case(12, 20_000)),
             (kernels.lm_restarts, *search_case(2, 200)),
             (kernels.lm_restarts, *search_case(3, 200))]
    rows = []
    for fn, case_args, label in cases:
        fast = fn(*case_args, backend="numba")
        slow = fn(*case_args, backend="numpy")
        agree = max(float(np.nanmax(np.abs(np.asarray(a, float) - np.asarray(b, float))))
                    for a, b in zip(fast, slow))
        t_nb = best_of(lambda: fn(*case_args, backend="numba"), args.repeat)
        t_np = best_of(lambda: fn(*case_args, backend="numpy"), args.repeat)
        rows.append({"case": label, "numba_s": t_nb, "numpy_s": t_np, "speedup": t_np / t_nb,
                     "max_abs_difference": agree})
        print(f"{label:48s} numba {t_nb * 1e3:9.2f} ms  numpy {t_np * 1e3:9.2f} ms  "
              f"x{t_np / t_nb:6.1f}  diff {agree:.1e}")
    if args.json:
        with open(args.json, "w") as f:
            json.dump(rows, f, indent=2)


if __name__ == "__main__":
    main()
