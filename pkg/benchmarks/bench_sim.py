"""Time the compiled event loop against the pure-Python twin.

Run from the repo root:  python3 benchmarks/bench_sim.py [customers]
Both kernels consume the random stream identically, so the outputs are
checked bit-for-bit while timing.
"""

import sys
import time

import numpy as np

from thresholdq.simulator import _core_py

try:
    from thresholdq.simulator import _core
except ImportError:
    _core = None

CASES = (
    ("continuous", 0, 0.0),
    ("exponential", 1, 0.125),
    ("erlang2", 2, 0.125),
)

LAM, MU0, MU1, K = 1.125, 1.0, 1.5, 2


def run(mod, regime_code, gamma, customers):
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(20260819)))
    samples = np.empty(customers)
    occ = np.zeros(K + 40)
    seen = np.zeros(K + 40)
    t0 = time.perf_counter()
    mod.run_kernel(LAM, MU0, MU1, gamma, K, regime_code, customers, 1000,
                   rng, samples, occ, seen)
    return time.perf_counter() - t0, samples


def main():
    customers = int(sys.argv[1]) if len(sys.argv) > 1 else 200_000
    print(f"{customers} customers per run, lam={LAM} mu0={MU0} mu1={MU1} K={K}")
    print(f"{'regime':<12} {'python':>10} {'cython':>10} {'speedup':>8}   rate (cust/s)")
    for name, code, gamma in CASES:
        t_py, s_py = run(_core_py, code, gamma, customers)
        if _core is None:
            print(f"{name:<12} {t_py:>9.3f}s {'n/a':>10} {'':>8}")
            continue
        t_cy, s_cy = run(_core, code, gamma, customers)
        assert np.array_equal(s_py, s_cy), "backends diverged"
        print(f"{name:<12} {t_py:>9.3f}s {t_cy:>9.3f}s {t_py / t_cy:>7.1f}x"
              f"   {customers / t_cy:,.0f}")


if __name__ == "__main__":
    main()
