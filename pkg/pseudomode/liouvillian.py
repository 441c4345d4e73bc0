"""
Pseudomode master equation in the weak-symmetry block representation.

The atoms couple to one damped bosonic mode b through the Tavis-Cummings
Hamiltonian (gamma0/sqrt2)(J- b^dag + J+ b), and the mode decays through the
dissipator 2 lambda D[b]. Total excitation n + b^dag b is a weak symmetry, so
starting from |N>|0> only the diagonal sectors of fixed excitation M are
populated and the dissipator couples sector M+1 into sector M only.
"""

import math
from dataclasses import dataclass

import numpy as np
from absl import logging

from model import CapacityError, SystemParams, validate_params
from pseudomode.block_state import BlockDensityMatrix, block_offsets, storage_size
from pseudomode.kernels import coherence_current, generator_

DEFAULT_MEMORY_BUDGET = 8 * 2 ** 30
# packed-state copies alive during an RK45 step with dense output
WORKING_COPIES = 16


@dataclass(frozen=True)
class BlockLiouvillian:
    n_atoms: int
    gamma0: float
    lam: float
    omega0: float
    offsets: np.ndarray
    hops: np.ndarray

    def hamiltonian(self, M: int) -> np.ndarray:
        """Tridiagonal real symmetric H^(M)."""
        h = np.zeros((M + 1, M + 1))
        i = np.arange(1, M + 1)
        h[i, i - 1] = self.hops[M, i]
        h[i - 1, i] = self.hops[M, i]
        return h

    def decay(self, M: int) -> np.ndarray:
        """Elementwise factors lambda (l + m), l = M - i, m = M - j."""
        photons = M - np.arange(M + 1)
        return self.lam * (photons[:, None] + photons[None, :])

    def feed(self, M: int) -> np.ndarray:
        """Coefficients 2 lambda sqrt((M - i)(M - j)) carrying block M into block M - 1."""
        photons = M - np.arange(M).astype(float)
        return 2 * self.lam * np.sqrt(photons[:, None] * photons[None, :])

    @property
    def storage(self) -> int:
        return int(self.offsets[-1])


def hop_table(n_atoms: int, gamma0: float) -> np.ndarray:
    """hops[M, i] = (gamma0/sqrt2) sqrt(i (N - i + 1)) sqrt(M - i + 1) for 1 <= i <= M."""
    n = n_atoms
    M = np.arange(n + 1)[:, None].astype(float)
    i = np.arange(n + 1)[None, :].astype(float)
    valid = (i >= 1) & (i <= M)
    radicand = np.where(valid, i * (n - i + 1) * (M - i + 1), 0.0)
    return gamma0 / math.sqrt(2.0) * np.sqrt(radicand)


def required_bytes(n_atoms: int) -> int:
    return storage_size(n_atoms) * np.dtype(complex).itemsize * WORKING_COPIES


def build_liouvillian(p: SystemParams, memory_budget: int = DEFAULT_MEMORY_BUDGET) -> BlockLiouvillian:
    validate_params(p)
    needed = required_bytes(p.n_atoms)
    if needed > memory_budget:
        raise CapacityError(
            f"N={p.n_atoms} needs about {needed / 2 ** 30:.2f} GiB for the integrator, "
            f"budget is {memory_budget / 2 ** 30:.2f} GiB",
            required_bytes=needed, memory_budget=memory_budget)
    L = BlockLiouvillian(p.n_atoms, p.gamma0, p.lam, p.omega0, block_offsets(p.n_atoms),
                         hop_table(p.n_atoms, p.gamma0))
    if not np.all(np.isfinite(L.hops)):
        raise ArithmeticError("non-finite Hamiltonian elements")
    logging.info("pseudomode Liouvillian: N=%d, %d blocks, %d complex entries (%.1f MiB per state)",
                 p.n_atoms, p.n_atoms + 1, L.storage, L.storage * 16 / 2 ** 20)
    return L


def apply_generator(L: BlockLiouvillian, rho: BlockDensityMatrix) -> BlockDensityMatrix:
    """d rho / dt as a new block state."""
    out = np.empty_like(rho.data, dtype=complex)
    generator_(np.ascontiguousarray(rho.data, dtype=complex), out, L.offsets, L.hops, L.lam)
    return BlockDensityMatrix(L.n_atoms, out)


def intensity_from_generator(L: BlockLiouvillian, rho: BlockDensityMatrix) -> float:
    """-omega0 Tr[n d rho/dt]; only the commutator contributes.

    Tr[n [H, rho]] reduces to the coherences next to the diagonal, so the
    intensity is -2 omega0 sum_M sum_i hops[M, i] Im rho^(M)_{i-1, i}.
    """
    return -2.0 * L.omega0 * coherence_current(np.ascontiguousarray(rho.data, dtype=complex), L.offsets, L.hops)


def expectation_n(rho: BlockDensityMatrix) -> float:
    return rho.expectation_n()
