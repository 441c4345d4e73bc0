from typing import Iterator, Optional, Tuple

import numpy as np

from pseudomode.kernels import diagonal_moments_


def block_offsets(n_atoms: int) -> np.ndarray:
    """Start of each block in the packed layout, plus the total size as last entry."""
    sizes = np.arange(1, n_atoms + 2, dtype=np.int64) ** 2
    return np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)


def storage_size(n_atoms: int) -> int:
    """Number of complex entries, (N+1)(N+2)(2N+3)/6."""
    n = n_atoms
    return (n + 1) * (n + 2) * (2 * n + 3) // 6


class BlockDensityMatrix:
    """Atoms plus pseudomode state restricted to the sectors reachable from |N>|0>.

    Block M collects the states |i>|M - i>, i = 0..M, of total excitation M.
    data is the packed complex vector; blocks are views into it.
    """

    def __init__(self, n_atoms: int, data: Optional[np.ndarray] = None):
        self.n_atoms = int(n_atoms)
        self.offsets = block_offsets(self.n_atoms)
        size = int(self.offsets[-1])
        if data is None:
            data = np.zeros(size, dtype=complex)
        data = np.asarray(data)
        if data.shape != (size,):
            raise ValueError(f"packed state for N={n_atoms} needs {size} entries, got {data.shape}")
        self.data = data

    @classmethod
    def initial(cls, n_atoms: int) -> "BlockDensityMatrix":
        """All atoms excited, pseudomode in vacuum: entry (N, N) of block N."""
        state = cls(n_atoms)
        state.block(n_atoms)[n_atoms, n_atoms] = 1.0
        return state

    @classmethod
    def ground(cls, n_atoms: int) -> "BlockDensityMatrix":
        state = cls(n_atoms)
        state.block(0)[0, 0] = 1.0
        return state

    def copy(self) -> "BlockDensityMatrix":
        return BlockDensityMatrix(self.n_atoms, self.data.copy())

    def block(self, M: int) -> np.ndarray:
        if not 0 <= M <= self.n_atoms:
            raise IndexError(f"block index {M} outside 0..{self.n_atoms}")
        start, stop = self.offsets[M], self.offsets[M + 1]
        return self.data[start:stop].reshape(M + 1, M + 1)

    def blocks(self) -> Iterator[Tuple[int, np.ndarray]]:
        for M in range(self.n_atoms + 1):
            yield M, self.block(M)

    def _moments(self) -> Tuple[np.ndarray, np.ndarray]:
        traces = np.empty(self.n_atoms + 1)
        moments = np.empty(self.n_atoms + 1)
        diagonal_moments_(self.data, self.offsets, traces, moments)
        return traces, moments

    def block_occupations(self) -> np.ndarray:
        """Trace of each block."""
        return self._moments()[0]

    def trace(self) -> float:
        return float(self._moments()[0].sum())

    def expectation_n(self) -> float:
        """<n> = sum_M sum_i i rho^(M)_ii."""
        return float(self._moments()[1].sum())

    def total_excitation(self) -> float:
        """<n + b^dag b> = sum_M M Tr rho^(M)."""
        traces = self._moments()[0]
        return float(np.arange(self.n_atoms + 1) @ traces)

    def hermiticity_error(self) -> float:
        return max(float(np.max(np.abs(b - b.conj().T))) for _, b in self.blocks())

    def min_block_eigenvalues(self) -> np.ndarray:
        """Smallest eigenvalue of the Hermitian part of each block."""
        return np.array([np.linalg.eigvalsh(0.5 * (b + b.conj().T))[0] for _, b in self.blocks()])
