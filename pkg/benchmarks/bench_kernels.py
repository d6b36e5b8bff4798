"""Time the compiled kernels against the pure-Python reference.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import math
import timeit

import numpy as np

from blochphase import kernels


def cases(mod):
    xi = np.zeros(1)
    thermal_x = np.linspace(-1 / math.pi, 50.0, 100_000)
    values = np.random.default_rng(0).normal(size=200_000)
    return {
        "propagate rk4, 20k steps": lambda: mod.propagate(
            kernels.RK4, kernels.CANONICAL, 0.2, 0.4, 0.0, 0.0, xi, 10 ** 9, 1e-3, 20_000, 1, 1e-9),
        "propagate heun, 20k steps": lambda: mod.propagate(
            kernels.HEUN, kernels.CANONICAL, 0.2, 0.4, 0.0, 0.0, xi, 10 ** 9, 1e-3, 20_000, 1, 1e-9),
        "thermal_kernel, 1e5 points": lambda: mod.thermal_kernel(thermal_x),
        "neumaier_sum, 2e5 values": lambda: mod.neumaier_sum(values),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = kernels.backends()
    if "cython" not in backends:
        print("compiled extension not built; only the Python backend is available")
    names = list(cases(backends["python"]))
    timings = {}
    for label, mod in backends.items():
        for name, fn in cases(mod).items():
            timings[label, name] = min(timeit.repeat(fn, number=1, repeat=args.repeat))
    print(f"{'kernel':<30}" + "".join(f"{b:>12}" for b in backends) + "     speedup")
    for name in names:
        row = [timings[b, name] for b in backends]
        line = f"{name:<30}" + "".join(f"{t * 1e3:>10.2f}ms" for t in row)
        if "cython" in backends:
            line += f"{timings['python', name] / timings['cython', name]:>11.1f}x"
        print(line)


if __name__ == "__main__":
    main()
