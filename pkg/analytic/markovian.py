"""
Markovian references: the mean-field superradiant pulse and the exact
Dicke-ladder population cascade of the Markovian master equation.
"""

import math
from typing import Optional, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from model import IntensityTrace, StiffnessError, SystemParams, horizon_cap, markovian_rate, validate_params


def meanfield_delay(p: SystemParams) -> float:
    """Time of the mean-field burst maximum, log(N+1) / (N gamma_M)."""
    return math.log(p.n_atoms + 1) / (p.n_atoms * markovian_rate(p))


def meanfield_intensity(p: SystemParams, t):
    """omega0 gamma_M N^2/4 sech^2(gamma_M N (t - t0) / 2)."""
    gamma_m = markovian_rate(p)
    n = p.n_atoms
    t = np.asarray(t, dtype=float)
    argument = gamma_m * n * (t - meanfield_delay(p)) / 2
    return p.omega0 * gamma_m * n * n / 4 / np.cosh(argument) ** 2


def _ladder(n: int) -> Tuple[np.ndarray, np.ndarray]:
    m = np.arange(n + 1)
    # |<m-1|J-|m>|^2 = m (N - m + 1)
    return m, m * (n - m + 1.0)


def cascade_rhs(gamma_m: float, rates: np.ndarray):
    def rhs(t, populations):
        loss = rates * populations
        gain = np.zeros_like(populations)
        gain[:-1] = loss[1:]
        return gamma_m * (gain - loss)
    return rhs


def markovian_cascade(p: SystemParams, grid=None, n_samples: int = 4001,
                      return_populations: bool = False):
    """Integrate dp_m/dt = gamma_M [(m+1)(N-m) p_{m+1} - m(N-m+1) p_m] from |N>.

    The intensity is -omega0 sum_m m dp_m/dt, evaluated from the right-hand
    side at each sample. Without a grid the window runs until <n> drops below
    excitation_epsilon * N.
    """
    validate_params(p)
    gamma_m = markovian_rate(p)
    n = p.n_atoms
    m, rates = _ladder(n)
    rhs = cascade_rhs(gamma_m, rates)
    initial = np.zeros(n + 1)
    initial[n] = 1.0
    abs_tol, rel_tol = p.tolerances

    if grid is None:
        exhausted = lambda t, y: float(m @ y) - p.excitation_epsilon * n
        exhausted.terminal = True
        scout = solve_ivp(rhs, (0.0, horizon_cap(p)), initial, method="LSODA", events=exhausted,
                          rtol=rel_tol, atol=abs_tol * 1e-3)
        t_end = float(scout.t_events[0][0]) if scout.t_events[0].size else horizon_cap(p)
        grid = np.linspace(0.0, t_end, n_samples)
    grid = np.asarray(grid, dtype=float)

    solution = solve_ivp(rhs, (0.0, grid[-1]), initial, method="LSODA", t_eval=grid,
                         rtol=rel_tol, atol=abs_tol * 1e-3)
    if not solution.success:
        raise StiffnessError(f"cascade integration failed: {solution.message}", n_atoms=n)
    populations = solution.y
    derivatives = np.stack([rhs(t, populations[:, k]) for k, t in enumerate(grid)], axis=1)
    intensity = -p.omega0 * (m @ derivatives)
    excitation = m @ populations
    meta = {"solver": "markovian-cascade", "params": p.snapshot(), "gamma_markov": gamma_m}
    trace = IntensityTrace(grid, intensity, excitation, meta)
    if return_populations:
        return trace, populations
    return trace
