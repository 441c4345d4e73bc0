"""
Closed-form dynamics of a single emitter in a Lorentzian cavity.

The excited-state amplitude obeys c'' + lambda c' + (gamma0^2/2) c = 0 with
c(0) = 1, c'(0) = 0. Every expression is written in terms of
x = Omega1 t / 2 and sinhc(x) = sinh(x)/x, which stays finite and real-valued
across lambda = sqrt(2) gamma0 where Omega1 turns imaginary.
"""

import math
from typing import NamedTuple, Optional, Tuple

import numpy as np

from model import IntensityTrace, PoleError, SystemParams, decay_horizon, derived_frequencies, validate_params
from utils.general_utils import atanhc, real_part, sinhc

POLE_GUARD = 1e-6


class SingleExtrema(NamedTuple):
    max: Tuple[float, float]
    min: Optional[Tuple[float, float]]


def _half_phase(p: SystemParams, t):
    t = np.asarray(t, dtype=float)
    x = derived_frequencies(p).omega1 * t / 2
    return t, x, np.cosh(x), sinhc(x)


def single_amplitude(p: SystemParams, t):
    """Excited-state amplitude c(t)."""
    t, x, ch, sc = _half_phase(p, t)
    return real_part(np.exp(-p.lam * t / 2) * (ch + p.lam * (t / 2) * sc), "single-atom amplitude", scale=1.0)


def single_amplitude_derivative(p: SystemParams, t):
    t, x, ch, sc = _half_phase(p, t)
    return real_part(-p.gamma0 ** 2 * np.exp(-p.lam * t / 2) * (t / 2) * sc, "single-atom amplitude rate",
                     scale=p.gamma0)


def single_excitation(p: SystemParams, t):
    """Excited-state population |c(t)|^2."""
    return single_amplitude(p, t) ** 2


def single_total_excitation(p: SystemParams, t):
    """Atomic plus pseudomode excitation |c|^2 + 2|c'|^2 / gamma0^2."""
    return single_excitation(p, t) + 2 * single_amplitude_derivative(p, t) ** 2 / p.gamma0 ** 2


def single_rate_poles(p: SystemParams, count: int = 1, start: int = 1) -> np.ndarray:
    """Pole times t_n of the decay rate, n = start .. start + count - 1.

    Only exists for lambda < sqrt(2) gamma0; empty otherwise.
    """
    w = abs(derived_frequencies(p).omega1)
    if p.lam ** 2 >= 2 * p.gamma0 ** 2 or w == 0:
        return np.empty(0)
    n = np.arange(start, start + count)
    return (2 / w) * (math.pi * n - math.atan2(w, p.lam))


def single_decay_rate(p: SystemParams, t):
    """Time-dependent decay rate 2 gamma0^2 / (lambda + Omega1 coth(Omega1 t / 2)).

    Written as 2 gamma0^2 t sinhc(x) / (lambda t sinhc(x) + 2 cosh(x)) so t = 0
    and Omega1 = 0 need no special casing. Raises PoleError when t lies within
    1e-6/|Omega1| of a pole.
    """
    t, x, ch, sc = _half_phase(p, t)
    w = abs(derived_frequencies(p).omega1)
    if p.lam ** 2 < 2 * p.gamma0 ** 2 and t.size:
        guard = POLE_GUARD / w
        t_max = float(np.max(t))
        period = 2 * math.pi / w
        poles = single_rate_poles(p, count=int(t_max / period) + 2)
        distance = np.min(np.abs(t[..., None] - poles), axis=-1)
        if np.any(distance < guard):
            hit = float(np.ravel(t)[np.argmin(np.ravel(distance))])
            raise PoleError(f"t = {hit:.6g} is within {guard:.3g} of a decay-rate pole", t=hit, pole_guard=guard)
    numerator = 2 * p.gamma0 ** 2 * t * sc
    denominator = p.lam * t * sc + 2 * ch
    return real_part(numerator / denominator, "single-atom decay rate", scale=p.gamma0)


def single_intensity(p: SystemParams, t):
    """Radiated intensity of one emitter, -omega0 d|c|^2/dt."""
    t, x, ch, sc = _half_phase(p, t)
    half = t / 2
    value = 2 * p.omega0 * p.gamma0 ** 2 * np.exp(-p.lam * t) * (ch * half * sc + p.lam * half ** 2 * sc ** 2)
    return real_part(value, "single-atom intensity", scale=p.omega0 * p.gamma0)


def single_extrema(p: SystemParams) -> SingleExtrema:
    """First emission maximum and, below lambda = sqrt(2) gamma0, the first reabsorption minimum."""
    omega1 = derived_frequencies(p).omega1
    root = math.sqrt(p.lam ** 2 + 2 * p.gamma0 ** 2)
    t_max = float(real_part(2 / root * atanhc(omega1 / root), "t_max"))
    i_max = 0.5 * p.omega0 * (p.lam + root) * math.exp(-p.lam * t_max)
    if p.lam ** 2 >= 2 * p.gamma0 ** 2 or abs(omega1) == 0:
        return SingleExtrema(max=(t_max, i_max), min=None)
    w = abs(omega1)
    t_min = (2 / w) * (math.pi - math.atan(w / root))
    i_min = -0.5 * p.omega0 * (root - p.lam) * math.exp(-p.lam * t_min)
    return SingleExtrema(max=(t_max, i_max), min=(t_min, i_min))


def single_trace(p: SystemParams, grid=None, n_samples: int = 4001) -> IntensityTrace:
    """Closed-form intensity trace, on grid or on a uniform grid up to the decay horizon."""
    validate_params(p)
    if grid is None:
        t_end = decay_horizon(p, lambda t: single_excitation(p, t))
        grid = np.linspace(0.0, t_end, n_samples)
    grid = np.asarray(grid, dtype=float)
    meta = {"solver": "analytic-single", "params": p.snapshot()}
    return IntensityTrace(grid, single_intensity(p, grid), single_excitation(p, grid), meta,
                          single_total_excitation(p, grid))
