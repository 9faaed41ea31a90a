"""Compare the numba kernels with their pure-numpy fallbacks.

Run ``python benchmarks/bench_kernels.py``. Kernel timings call both
flavors in-process; the end-to-end energy timing starts a fresh interpreter
with ``QPCASIMIR_DISABLE_NUMBA=1`` so the library's own dispatch is measured.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from qpcasimir import _accel, kernels

ENERGY_SNIPPET = (
    "import time;"
    "from qpcasimir.energy import energy_word;"
    "from qpcasimir.lattice import iterate, preset;"
    "w = iterate(preset('fibonacci'), 4);"
    "energy_word(w, 'finite', 1.0);"
    "t = time.perf_counter();"
    "[energy_word(w, 'finite', s) for s in (0.1, 1.0, 10.0)];"
    "print(time.perf_counter() - t)"
)


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def kernel_rows(n_plates, n_points, repeat):
    rng = np.random.default_rng(0)
    r = rng.uniform(-1, 1, (n_plates, n_points))
    t = rng.uniform(0, 1, (n_plates, n_points))
    q = rng.uniform(0, 1, (n_plates - 1, n_points))
    x = rng.uniform(-1, 1, n_points)
    cases = [
        ("delta_total", lambda: kernels.delta_total_nb(r, t * t, q),
         lambda: kernels.delta_total_np(r, t * t, q)),
        ("delta_oracle", lambda: kernels.delta_oracle_nb(r, t, q),
         lambda: kernels.delta_oracle_np(r, t, q)),
        ("li4", lambda: kernels.li4_nb(x), lambda: kernels.li4_np(x)),
    ]
    rows = []
    for name, nb, npy in cases:
        nb()  # compile
        t_nb = best_of(nb, repeat)
        t_np = best_of(npy, repeat)
        rows.append((name, t_nb, t_np))
    return rows


def energy_time(disable):
    env = dict(os.environ, QPCASIMIR_DISABLE_NUMBA="1" if disable else "0")
    out = subprocess.run([sys.executable, "-c", ENERGY_SNIPPET], env=env, check=True,
                         capture_output=True, text=True)
    return float(out.stdout.strip())


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--plates", type=int, default=8)
    ap.add_argument("--points", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--skip-energy", action="store_true")
    args = ap.parse_args(argv)
    if not _accel.HAS_NUMBA:
        print("numba is not installed; nothing to compare")
        return 1
    print(f"kernels on {args.points} points, {args.plates} plates (best of {args.repeat})")
    print(f"{'kernel':<14}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}")
    for name, t_nb, t_np in kernel_rows(args.plates, args.points, args.repeat):
        print(f"{name:<14}{1e3 * t_nb:>12.2f}{1e3 * t_np:>12.2f}{t_np / t_nb:>10.1f}")
    if not args.skip_energy:
        t_nb, t_np = energy_time(False), energy_time(True)
        print(f"\nFibonacci I=4 finite energy, 3 sigma values: numba {t_nb:.2f}s, "
              f"numpy {t_np:.2f}s ({t_np / t_nb:.1f}x)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
