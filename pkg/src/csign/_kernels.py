"""Hot stepping kernels: numba-JIT with a pure-numpy fallback.

The trotterized master-equation update is the only part of the package where
runtime matters (a parameter sweep runs it tens of millions of times), so the
step loop is compiled with numba when available.  Set ``CSIGN_FORCE_NUMPY=1``
to force the numpy path; it is also used automatically when numba is missing.
``benchmarks/bench_step_kernel.py`` compares the two.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

_FORCE_NUMPY = os.environ.get("CSIGN_FORCE_NUMPY", "").strip() not in ("", "0", "false", "False")
USE_NUMBA = HAVE_NUMBA and not _FORCE_NUMPY


def _step_loop_numpy(rho, u, udag, jumps, jumps_dag, half_m, dt, n_steps):
    for _ in range(n_steps):
        rho = u @ rho @ udag
        if jumps.shape[0]:
            acc = np.zeros_like(rho)
            for k in range(jumps.shape[0]):
                acc += jumps[k] @ rho @ jumps_dag[k]
            rho = rho + dt * (acc - (half_m @ rho + rho @ half_m))
    return rho


if HAVE_NUMBA:

    @njit(cache=True)
    def _step_loop_numba(rho, u, udag, jumps, jumps_dag, half_m, dt, n_steps):
        for _ in range(n_steps):
            rho = np.dot(np.dot(u, rho), udag)
            if jumps.shape[0]:
                acc = np.zeros_like(rho)
                for k in range(jumps.shape[0]):
                    acc += np.dot(np.dot(jumps[k], rho), jumps_dag[k])
                rho = rho + dt * (acc - (np.dot(half_m, rho) + np.dot(rho, half_m)))
        return rho


def step_loop(rho, u, udag, jumps, jumps_dag, half_m, dt, n_steps,
              backend: str = None):
    """Apply ``n_steps`` trotter updates: unitary conjugation plus dissipator.

    ``jumps`` is a (k, D, D) stack of jump matrices (k may be 0) and
    ``half_m`` is one half of the summed L^dag L.  Arrays must be complex128;
    the input ``rho`` is not modified.
    """
    rho = np.ascontiguousarray(rho, dtype=np.complex128)
    u = np.ascontiguousarray(u, dtype=np.complex128)
    udag = np.ascontiguousarray(udag, dtype=np.complex128)
    jumps = np.ascontiguousarray(jumps, dtype=np.complex128)
    jumps_dag = np.ascontiguousarray(jumps_dag, dtype=np.complex128)
    half_m = np.ascontiguousarray(half_m, dtype=np.complex128)
    if backend is None:
        backend = "numba" if USE_NUMBA else "numpy"
    if backend == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is not importable")
        return _step_loop_numba(rho, u, udag, jumps, jumps_dag, half_m, dt, n_steps)
    if backend == "numpy":
        return _step_loop_numpy(rho, u, udag, jumps, jumps_dag, half_m, dt, n_steps)
    raise ValueError(f"unknown backend {backend!r}")
