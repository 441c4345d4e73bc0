"""
Numerically exact solver for arbitrary N: atoms plus one damped pseudomode,
reduced to the excitation-number blocks reachable from the fully excited state.
"""

from pseudomode.block_state import BlockDensityMatrix, block_offsets, storage_size
from pseudomode.integrator import evolve
from pseudomode.liouvillian import (
    DEFAULT_MEMORY_BUDGET,
    BlockLiouvillian,
    apply_generator,
    build_liouvillian,
    expectation_n,
    hop_table,
    intensity_from_generator,
    required_bytes,
)
