#!/usr/bin/env python3
"""Benchmark the master-equation step kernel: numba JIT vs pure numpy.

Builds the real 23-state array problem (with and without leak channels) and
times the inner step loop under both backends.

Usage:
    python benchmarks/bench_step_kernel.py [--steps N] [--repeats R]
"""

import argparse
import time

import numpy as np

from csign import _kernels, circuit, fock
from csign.circuit import SimParams
from csign.dynamics import build_array_hamiltonian
from csign.lindblad import leak_channels, unitary_step_matrix


def problem(ly_over_g):
    space = fock.default_state_space()
    params = SimParams(t=99.0, ly_over_g=ly_over_g)
    h = build_array_hamiltonian(space, params.phys, frame="rotating")
    dt = params.total_time / 20000
    u = unitary_step_matrix(h, dt)
    channels = leak_channels(space, ly_over_g * params.g)
    if channels:
        jumps = np.stack([c.matrix for c in channels])
    else:
        jumps = np.zeros((0, space.dim, space.dim), dtype=complex)
    jumps_dag = jumps.conj().transpose(0, 2, 1)
    half_m = 0.5 * np.einsum("kij,kjl->il", jumps_dag, jumps)
    rho = np.array(circuit.p_test(space).matrix)
    b = circuit.beamsplitter_unitary(("x1", "y1"), space)
    rho = b @ rho @ b.conj().T
    return rho, u, u.conj().T, jumps, jumps_dag, half_m, dt


def time_backend(backend, args_tuple, steps, repeats):
    rho, u, udag, jumps, jumps_dag, half_m, dt = args_tuple
    # warm-up covers JIT compilation for the numba path
    _kernels.step_loop(rho, u, udag, jumps, jumps_dag, half_m, dt, 10,
                       backend=backend)
    best = np.inf
    for _ in range(repeats):
        start = time.perf_counter()
        out = _kernels.step_loop(rho, u, udag, jumps, jumps_dag, half_m, dt,
                                 steps, backend=backend)
        best = min(best, time.perf_counter() - start)
    return best, out


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=20000)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    backends = ["numpy"] + (["numba"] if _kernels.HAVE_NUMBA else [])
    if not _kernels.HAVE_NUMBA:
        print("numba not importable: benchmarking the numpy path only")

    for label, ly in (("unitary only (no leak)", 0.0), ("with leak channels", 0.05)):
        args_tuple = problem(ly)
        print(f"\n{label}, dim={args_tuple[0].shape[0]}, steps={args.steps}")
        results = {}
        outputs = {}
        for backend in backends:
            elapsed, out = time_backend(backend, args_tuple, args.steps, args.repeats)
            results[backend] = elapsed
            outputs[backend] = out
            rate = args.steps / elapsed
            print(f"  {backend:6s}: {elapsed * 1e3:9.1f} ms  ({rate:,.0f} steps/s)")
        if len(backends) == 2:
            diff = np.max(np.abs(outputs["numba"] - outputs["numpy"]))
            print(f"  speedup numba/numpy: {results['numpy'] / results['numba']:.2f}x"
                  f"  (max result difference {diff:.2e})")


if __name__ == "__main__":
    main()
