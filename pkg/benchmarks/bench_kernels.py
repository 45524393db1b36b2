"""Timing comparison of the jitted kernels against the pure-python fallback.

Run with:  python3 benchmarks/bench_kernels.py
The script times the kernels in the current process, then re-runs itself
in a subprocess with GAITPIPE_NO_NUMBA=1 so the fallback numbers come from
a fully uncompiled import (the inner kernels are swapped at import time).
"""
import json
import math
import os
import subprocess
import sys
import time

import numpy as np

from gaitpipe import factors, kernels


def timeit(fn, *args, repeats=3):
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def run_benchmarks():
    n = 200_000
    rng = np.random.default_rng(0)
    accel = rng.normal(0, 1, (n, 3)) + np.array([0.0, 0.0, 9.81])
    gyro = rng.normal(0, 0.1, (n, 3))
    q0 = np.array([1.0, 0.0, 0.0, 0.0])
    mad_args = (accel, gyro, 0.02, 0.041, q0)
    kernels.madgwick_batch(*mad_args)  # trigger compilation
    mad = timeit(kernels.madgwick_batch, *mad_args)

    obs, _ = factors.simulate_dataset(n_subjects=20, obs_per_subject=8, seed=1)
    f1, age, sex, dis, sub, env, aid, starts, n_sub = factors._pack_data(obs)
    dim = kernels.N_GLOBAL + n_sub
    theta0 = np.zeros(dim)
    theta0[0] = math.log(10.0)
    step0 = np.full(dim, 0.1)
    chain_args = (theta0, step0, 100, 100, 0, f1, age, sex, dis, sub, env,
                  aid, starts, factors.DEFAULT_PRIOR_SCALE)
    kernels.chain(*chain_args)
    ch = timeit(kernels.chain, *chain_args)

    return {"madgwick_s": mad, "madgwick_n": n,
            "chain_s": ch, "chain_dim": dim, "chain_obs": len(f1)}


def main():
    jit = run_benchmarks()
    env = dict(os.environ, GAITPIPE_NO_NUMBA="1")
    out = subprocess.run([sys.executable, __file__, "--raw"], env=env,
                         capture_output=True, text=True, check=True)
    pure = json.loads(out.stdout)

    print(f"madgwick_batch ({jit['madgwick_n']} samples):")
    print(f"  jitted       {jit['madgwick_s'] * 1e3:9.1f} ms")
    print(f"  pure python  {pure['madgwick_s'] * 1e3:9.1f} ms   "
          f"({pure['madgwick_s'] / jit['madgwick_s']:5.1f}x slower)")
    print(f"mcmc chain (dim {jit['chain_dim']}, 200 iterations, "
          f"{jit['chain_obs']} obs):")
    print(f"  jitted       {jit['chain_s'] * 1e3:9.1f} ms")
    print(f"  pure python  {pure['chain_s'] * 1e3:9.1f} ms   "
          f"({pure['chain_s'] / jit['chain_s']:5.1f}x slower)")


if __name__ == "__main__":
    if "--raw" in sys.argv:
        json.dump(run_benchmarks(), sys.stdout)
    else:
        main()
