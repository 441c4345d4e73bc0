"""
numba kernels over the packed block layout.

Block M (M = 0..N) is a dense (M+1)x(M+1) matrix stored row-major starting
at offsets[M]; offsets has N+2 entries, the last one being the total size.
Row/column index i is the Dicke excitation, the pseudomode holds M - i
photons. hops[M, i] (1 <= i <= M) is the Hamiltonian element between i and
i - 1 inside block M.
"""

import numpy as np
from numba import njit, prange


@njit(parallel=True, cache=True)
def generator_(rho, out, offsets, hops, lam):
    """out = L(rho): commutator, pseudomode decay and the feed from block M+1.

    Each block only writes its own slots, so blocks run in parallel.
    """
    n_blocks = offsets.size - 1
    for M in prange(n_blocks):
        size = M + 1
        base = offsets[M]
        has_feed = M + 1 < n_blocks
        upper = offsets[M + 1] if has_feed else 0
        for i in range(size):
            for j in range(size):
                k = base + i * size + j
                comm = 0j
                if i >= 1:
                    comm += hops[M, i] * rho[k - size]
                if i + 1 < size:
                    comm += hops[M, i + 1] * rho[k + size]
                if j >= 1:
                    comm -= rho[k - 1] * hops[M, j]
                if j + 1 < size:
                    comm -= rho[k + 1] * hops[M, j + 1]
                value = -1j * comm - lam * ((M - i) + (M - j)) * rho[k]
                if has_feed:
                    value += 2.0 * lam * np.sqrt((M + 1.0 - i) * (M + 1.0 - j)) * rho[upper + i * (size + 1) + j]
                out[k] = value


@njit(parallel=True, cache=True)
def coherence_current(rho, offsets, hops):
    """sum_M sum_i hops[M, i] Im rho^(M)_{i-1, i}; the intensity is -2 omega0 times this."""
    n_blocks = offsets.size - 1
    total = 0.0
    for M in prange(n_blocks):
        size = M + 1
        base = offsets[M]
        partial = 0.0
        for i in range(1, size):
            partial += hops[M, i] * rho[base + (i - 1) * size + i].imag
        total += partial
    return total


@njit(parallel=True, cache=True)
def diagonal_moments_(rho, offsets, traces, moments):
    """Per-block trace and sum_i i rho_ii (real parts)."""
    n_blocks = offsets.size - 1
    for M in prange(n_blocks):
        size = M + 1
        base = offsets[M]
        trace = 0.0
        moment = 0.0
        for i in range(size):
            value = rho[base + i * (size + 1)].real
            trace += value
            moment += i * value
        traces[M] = trace
        moments[M] = moment
