"""Benchmark the compiled statevector kernels against the numpy
fallback, plus one end-to-end adaptive run on each backend.

Usage: python benchmarks/bench_kernels.py [--n 16] [--repeats 20]
"""

import argparse
import time

import numpy as np

from mosaic_qaoa.kernels import compiled_available, numpy_backend

if compiled_available():
    from mosaic_qaoa.kernels import _statevec as compiled_backend
else:
    compiled_backend = None


def timeit(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(n: int, repeats: int):
    rng = np.random.default_rng(0)
    dim = 1 << n
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    psi /= np.linalg.norm(psi)
    values = rng.integers(0, 40, size=dim).astype(np.float64)
    x_mask, zy_mask, y_count = 0b1010, 0b0110, 1
    bra = rng.normal(size=dim) + 1j * rng.normal(size=dim)

    cases = {
        "phase_inplace": lambda b: b.phase_inplace(psi.copy(), values, 0.37),
        "rotation_inplace": lambda b: b.rotation_inplace(
            psi.copy(), x_mask, zy_mask, y_count, 0.37
        ),
        "apply_pauli": lambda b: b.apply_pauli(psi, x_mask, zy_mask, y_count),
        "expectation": lambda b: b.expectation(values, psi),
        "pauli_inner": lambda b: b.pauli_inner(bra, psi, x_mask, zy_mask, y_count),
    }
    print(f"\nkernel timings at n={n} ({dim} amplitudes), best of {repeats}:")
    print(f"{'kernel':<18}{'numpy':>12}{'compiled':>12}{'speedup':>10}")
    for name, fn in cases.items():
        t_np = timeit(lambda: fn(numpy_backend), repeats)
        if compiled_backend is None:
            print(f"{name:<18}{t_np * 1e6:>10.1f}us{'-':>12}{'-':>10}")
            continue
        t_cy = timeit(lambda: fn(compiled_backend), repeats)
        print(
            f"{name:<18}{t_np * 1e6:>10.1f}us{t_cy * 1e6:>10.1f}us"
            f"{t_np / t_cy:>9.2f}x"
        )


def bench_engine(repeats: int):
    import os
    import subprocess
    import sys
    import textwrap

    script = textwrap.dedent(
        """
        import time
        from mosaic_qaoa.kernels import BACKEND_NAME
        from mosaic_qaoa.sat import generate_uniform, canonicalize
        from mosaic_qaoa.engine import EngineConfig, Strategy, run
        f = canonicalize(generate_uniform(7, 12345))
        t0 = time.perf_counter()
        result = run(f, EngineConfig(gamma0=0.5, strategy=Strategy.MOSAIC))
        print(f"{BACKEND_NAME}: {time.perf_counter() - t0:.2f}s "
              f"({len(result.circuit.layers)} layers, "
              f"E={result.final_energy:.6f})")
        """
    )
    print("\nfull adaptive run, n=7 (same formula on both backends):")
    for env_value in ("", "1"):
        env = dict(os.environ)
        if env_value:
            env["MOSAIC_QAOA_PURE_PY"] = env_value
        else:
            env.pop("MOSAIC_QAOA_PURE_PY", None)
        subprocess.run([sys.executable, "-c", script], env=env, check=True)


if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("--n", type=int, default=16)
    parser.add_argument("--repeats", type=int, default=20)
    args = parser.parse_args()
    if compiled_backend is None:
        print("compiled extension unavailable; showing numpy fallback only")
    bench_kernels(args.n, args.repeats)
    bench_engine(args.repeats)
