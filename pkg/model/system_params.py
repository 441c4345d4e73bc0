"""
Physical parameters of N identical two-level emitters coupled to a lossy
resonant cavity with a Lorentzian spectral density.

All quantities are expressed in units of the transition frequency omega0:
times in 1/omega0, rates and spectral widths in omega0. omega0 itself only
scales the radiated intensity.
"""

import math
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional, Tuple

import numpy as np

from model.errors import ParameterError, UndefinedRateError

DEFAULT_GAMMA0 = 1e-3
EXCITATION_EPSILON = 1e-3
HORIZON_FACTOR = 50.0
LARGE_N_THRESHOLD = 100


@dataclass(frozen=True)
class SystemParams:
    """Single source of truth for one run.

    Attributes:
        n_atoms: number of emitters N.
        gamma0: coupling strength of the Lorentzian spectral density.
        lam: spectral width lambda (half width of the cavity line).
        omega0: transition frequency; sets the intensity unit.
        abs_tol, rel_tol: integrator tolerances, None selects the N-dependent default.
        excitation_epsilon: horizon stops once the remaining excitation is below this fraction of N.
        horizon_factor: t_cap = horizon_factor / gamma_M for a lossy cavity.
    """
    n_atoms: int
    gamma0: float = DEFAULT_GAMMA0
    lam: float = 0.0
    omega0: float = 1.0
    abs_tol: Optional[float] = None
    rel_tol: Optional[float] = None
    excitation_epsilon: float = EXCITATION_EPSILON
    horizon_factor: float = HORIZON_FACTOR

    @property
    def tolerances(self) -> Tuple[float, float]:
        default = 1e-9 if self.n_atoms <= LARGE_N_THRESHOLD else 1e-7
        abs_tol = default if self.abs_tol is None else self.abs_tol
        rel_tol = default if self.rel_tol is None else self.rel_tol
        return abs_tol, rel_tol

    @property
    def lambda_over_gamma0(self) -> float:
        return self.lam / self.gamma0

    def with_lambda(self, lam: float) -> "SystemParams":
        return replace(self, lam=float(lam))

    def with_atoms(self, n_atoms: int) -> "SystemParams":
        return replace(self, n_atoms=int(n_atoms))

    def snapshot(self) -> dict:
        abs_tol, rel_tol = self.tolerances
        return {
            "n_atoms": self.n_atoms,
            "gamma0": self.gamma0,
            "lambda": self.lam,
            "omega0": self.omega0,
            "abs_tol": abs_tol,
            "rel_tol": rel_tol,
            "excitation_epsilon": self.excitation_epsilon,
            "horizon_factor": self.horizon_factor,
        }


class DerivedFrequencies(NamedTuple):
    """Characteristic frequencies sqrt(lambda^2 - k*gamma0^2), k = 2, 4, 8."""
    omega1: complex
    omega: complex
    omega_tilde: complex


def validate_params(p: SystemParams) -> SystemParams:
    """Check every SystemParams invariant and return p unchanged.

    Inputs are already in units of omega0, so no rescaling happens here.
    """
    checks = (
        ("n_atoms >= 1", isinstance(p.n_atoms, (int, np.integer)) and p.n_atoms >= 1),
        ("gamma0 > 0", _finite(p.gamma0) and p.gamma0 > 0),
        ("lambda >= 0", _finite(p.lam) and p.lam >= 0),
        ("omega0 > 0", _finite(p.omega0) and p.omega0 > 0),
        ("abs_tol > 0", p.abs_tol is None or p.abs_tol > 0),
        ("rel_tol > 0", p.rel_tol is None or p.rel_tol > 0),
        ("0 < excitation_epsilon < 1", 0 < p.excitation_epsilon < 1),
        ("horizon_factor > 0", p.horizon_factor > 0),
    )
    for name, holds in checks:
        if not holds:
            raise ParameterError(f"invalid parameters: {name} violated", invariant=name)
    return p


def _finite(value) -> bool:
    return isinstance(value, (int, float, np.floating, np.integer)) and math.isfinite(value)


def markovian_rate(p: SystemParams) -> float:
    """Markovian decay rate gamma_M = gamma0^2 / lambda."""
    if p.lam <= 0:
        raise UndefinedRateError("gamma_markov is undefined for lambda = 0 (lossless cavity)",
                                 invariant="lambda > 0")
    return p.gamma0 ** 2 / p.lam


def derived_frequencies(p: SystemParams) -> DerivedFrequencies:
    lam2 = complex(p.lam * p.lam)
    g2 = p.gamma0 * p.gamma0
    return DerivedFrequencies(
        omega1=complex(np.sqrt(lam2 - 2 * g2)),
        omega=complex(np.sqrt(lam2 - 4 * g2)),
        omega_tilde=complex(np.sqrt(lam2 - 8 * g2)),
    )


def horizon_cap(p: SystemParams) -> float:
    """Latest time any solver path integrates to."""
    if p.lam > 0:
        return p.horizon_factor / markovian_rate(p)
    return p.horizon_factor * math.sqrt(2.0) / (p.gamma0 * math.sqrt(p.n_atoms))


def oscillation_period(p: SystemParams) -> float:
    """Rabi period of the collective exchange, estimated from sqrt(N)*gamma0."""
    return 2 * math.pi * math.sqrt(2.0) / (p.gamma0 * math.sqrt(p.n_atoms))


def markovianity_indicator(p: SystemParams) -> float:
    """lambda / (sqrt(N) * gamma0); values well above one favor Markovian dynamics."""
    return p.lam / (math.sqrt(p.n_atoms) * p.gamma0)


def decay_horizon(p: SystemParams, excitation, n_scan: int = 20001) -> float:
    """End of the horizon for a closed-form excitation curve.

    excitation is a vectorized callable t -> remaining excitation. The horizon
    is the first scan time after which the excitation stays below
    excitation_epsilon * N, capped at horizon_cap.
    """
    cap = horizon_cap(p)
    if p.lam == 0:
        return cap
    times = np.linspace(0.0, cap, n_scan)
    above = np.flatnonzero(np.asarray(excitation(times)) >= p.excitation_epsilon * p.n_atoms)
    if above.size == 0:
        return times[1]
    last = above[-1]
    return float(times[min(last + 1, n_scan - 1)])
