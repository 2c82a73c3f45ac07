"""Compare the compiled and NumPy panel kernels.

Times the dense potential and field blocks and one full slab-mode extraction
for each available backend, and checks that both give the same matrix.

    python3 benchmarks/bench_kernels.py --refinement 8 12 --repeat 3
"""

import argparse
import time

import numpy as np

from cptsim import kernels
from cptsim.field_solver import extract
from cptsim.geometry import mesh, standard_geometry
from cptsim.materials import default_registry


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--refinement", type=int, nargs="+", default=[6, 10, 14])
    parser.add_argument("--gap", type=float, default=0.05)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)

    backends = kernels.available_backends()
    water = default_registry().lookup("water")
    print(f"backends: {', '.join(backends)} (active: {kernels.BACKEND})")
    print(f"{'n':>3} {'panels':>7} {'stage':>10} " + " ".join(f"{b:>10}" for b in backends)
          + ("    speedup" if len(backends) > 1 else ""))
    for n in args.refinement:
        m = mesh(standard_geometry(0.30, args.gap), n)
        stages = {
            "potential": lambda b: kernels.potential_block(m.centroid, m, backend=b),
            "field": lambda b: kernels.field_block(m.centroid, m.normal, m, backend=b),
            "extract": lambda b: extract(m, water, backend=b).maxwell,
        }
        for stage, fn in stages.items():
            times, outs = [], []
            for b in backends:
                t, out = best_of(lambda: fn(b), args.repeat)
                times.append(t)
                outs.append(out)
            line = f"{n:>3} {len(m):>7} {stage:>10} " + " ".join(f"{t:>9.4f}s" for t in times)
            if len(backends) > 1:
                diff = np.abs(outs[0] - outs[1]).max() / np.abs(outs[1]).max()
                line += f"  {times[1] / times[0]:>8.1f}x  (max rel diff {diff:.1e})"
            print(line)


if __name__ == "__main__":
    main()
