#!/usr/bin/env python3
"""Benchmark: compiled hot kernels vs the pure-NumPy fallback.

Runs each backend on identical inputs and prints per-op timings plus an
end-to-end blur comparison. Usage: python benchmarks/bench_core.py
"""

import importlib
import time

import numpy as np


def best_of(fn, repeats=5):
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def main():
    from tfblur import _hot_py

    backends = {"python": _hot_py}
    try:
        cython_mod = importlib.import_module("tfblur._hot")
        backends["cython"] = cython_mod
    except ImportError:
        print("compiled extension not available; benchmarking fallback only")

    rng = np.random.default_rng(0)
    n_frames, channels = 64, 1024
    x = np.ascontiguousarray(rng.standard_normal(16384)
                             + 1j * rng.standard_normal(16384))
    window = np.ascontiguousarray(rng.standard_normal(1024) + 0j)
    grid = np.ascontiguousarray(rng.standard_normal((n_frames, channels))
                                + 1j * rng.standard_normal((n_frames, channels)))
    taps9 = np.ascontiguousarray(rng.standard_normal((9, 17)))
    field = np.ascontiguousarray(rng.standard_normal((n_frames, channels, 3, 3)))

    cases = {
        "extract_frames":
            lambda mod: mod.extract_frames(x, window, 256, n_frames, True),
        "ola_synthesize":
            lambda mod: mod.ola_synthesize(grid, window, 256, 16384, True),
        "conv2d_taps 9x17":
            lambda mod: mod.conv2d_taps(grid, taps9, 4, 8, True),
        "field_apply 3x3":
            lambda mod: mod.field_apply(grid, field, 1, 1, True),
    }

    print(f"{'op':<20} " + " ".join(f"{name:>12}" for name in backends)
          + ("        speedup" if len(backends) == 2 else ""))
    for name, runner in cases.items():
        times = {b: best_of(lambda m=mod: runner(m)) for b, mod in backends.items()}
        row = f"{name:<20} " + " ".join(f"{times[b] * 1e3:>10.2f}ms"
                                        for b in backends)
        if len(backends) == 2:
            row += f"   {times['python'] / times['cython']:>10.1f}x"
        print(row)

    # agreement check on the heaviest op
    results = [mod.conv2d_taps(grid, taps9, 4, 8, True)
               for mod in backends.values()]
    if len(results) == 2:
        gap = np.max(np.abs(results[0] - results[1]))
        print(f"\nbackend agreement (conv2d_taps): max abs diff {gap:.3e}")

    import os
    import subprocess
    import sys

    print("\nend-to-end blur (gaussian 2x4, hann-1024 lattice, L=16384, "
          "tap convolution):")
    script = (
        "import time, numpy as np, tfblur as tb;"
        "lat = tb.Lattice(16384, 256, 1024, 1024, 'circular');"
        "w = tb.make_window('hann', 1024);"
        "k = tb.gaussian_kernel(2.0, 4.0);"
        "x = tb.gen_signal('white_noise', sample_rate=16000, length=16384, seed=0);"
        "spec = tb.BlurSpec(w, k, lat, conv_mode='zeropad-time');"
        "tb.blur(x, spec);"
        "t0 = time.perf_counter();"
        "n = 5;"
        "[tb.blur(x, spec) for _ in range(n)];"
        "print(f'  {tb.BACKEND:<8} {(time.perf_counter() - t0) / n * 1e3:.1f} ms/blur')"
    )
    for backend in ("cython", "python"):
        env = dict(os.environ, TFBLUR_BACKEND=backend)
        proc = subprocess.run([sys.executable, "-c", script], env=env,
                              capture_output=True, text=True)
        print(proc.stdout, end="")
        if proc.returncode:
            print(f"  {backend}: failed ({proc.stderr.strip().splitlines()[-1]})")


if __name__ == "__main__":
    main()
