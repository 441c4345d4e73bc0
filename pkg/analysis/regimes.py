"""
Regime classification of intensity traces and the trace producers that feed it.
"""

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from model import (
    IncompleteTraceError,
    IntensityTrace,
    SystemParams,
    decay_horizon,
    horizon_cap,
    markovianity_indicator,
    oscillation_period,
    validate_params,
)

EPSILON_SCALE = 1e-5
ANALYSIS_PERIODS = 5
REVIVAL_FRACTION = 1e-3

MARKOVIAN = "markovian"
CRITICAL_PULSED = "critical_pulsed"
NON_MARKOVIAN = "non_markovian"


@dataclass(frozen=True)
class RegimeReport:
    regime: str
    min_intensity: float
    t_min: float
    max_intensity: float
    t_max: float
    zero_touch_times: Tuple[float, ...]
    thresholds: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "regime": self.regime,
            "min_intensity_omega0": self.min_intensity,
            "t_min_over_omega0_inv": self.t_min,
            "max_intensity_omega0": self.max_intensity,
            "t_max_over_omega0_inv": self.t_max,
            "zero_touch_times_over_omega0_inv": list(self.zero_touch_times),
            **{f"{name}_omega0": value for name, value in self.thresholds.items()},
        }


def intensity_epsilon(p: SystemParams) -> float:
    """Reabsorption threshold epsilon_I = 1e-5 omega0 gamma0 N."""
    return EPSILON_SCALE * p.omega0 * p.gamma0 * p.n_atoms


def analysis_window(p: SystemParams, periods: float = ANALYSIS_PERIODS) -> float:
    """Search window for extrema.

    The model horizon when the Markovianity indicator is at least one,
    otherwise the first few collective oscillation periods.
    """
    cap = horizon_cap(p)
    if p.lam > 0 and markovianity_indicator(p) >= 1:
        return cap
    return min(cap, periods * oscillation_period(p))


def simulate(p: SystemParams, solver: str = "auto", t_end: Optional[float] = None,
             n_samples: int = 4001, **solver_options) -> IntensityTrace:
    """Intensity trace over the analysis window.

    solver "auto" takes the closed forms for N = 1, 2 and the pseudomode
    integrator otherwise; "analytic", "pseudomode" and "cascade" force a path.
    """
    from analytic import build_pair_propagators, markovian_cascade, pair_excitation, pair_trace, single_excitation, single_trace
    from pseudomode import evolve

    validate_params(p)
    if solver == "auto":
        solver = "analytic" if p.n_atoms <= 2 else "pseudomode"
    t_end = analysis_window(p) if t_end is None else t_end

    if solver == "analytic":
        if p.n_atoms == 1:
            if p.lam > 0:
                t_end = min(t_end, decay_horizon(p, lambda t: single_excitation(p, t)))
            return single_trace(p, np.linspace(0.0, t_end, n_samples))
        if p.n_atoms == 2:
            pp = build_pair_propagators(p, allow_degenerate=True)
            if p.lam > 0:
                t_end = min(t_end, decay_horizon(p, lambda t: pair_excitation(pp, t)))
            return pair_trace(p, np.linspace(0.0, t_end, n_samples), pp=pp)
        raise ValueError(f"no closed form for N={p.n_atoms}")
    if solver == "cascade":
        trace = markovian_cascade(p, n_samples=n_samples)
        return trace if trace.times[-1] <= t_end else trace.truncated(t_end)
    if solver == "pseudomode":
        trace, _ = evolve(p, t_end=t_end, **solver_options)
        return trace
    raise ValueError(f"unknown solver {solver!r}")


def _refine(times: np.ndarray, values: np.ndarray, k: int) -> Tuple[float, float]:
    """Vertex of the parabola through samples k-1, k, k+1."""
    if k <= 0 or k >= times.size - 1:
        return float(times[k]), float(values[k])
    t = times[k - 1:k + 2]
    origin, width = t[1], t[2] - t[0]
    a, b, c = np.polyfit((t - origin) / width, values[k - 1:k + 2], 2)
    if a == 0:
        return float(times[k]), float(values[k])
    x = float(np.clip(-b / (2 * a), (t[0] - origin) / width, (t[2] - origin) / width))
    return float(origin + x * width), float(np.polyval([a, b, c], x))


def trace_extrema(trace: IntensityTrace) -> Tuple[Tuple[float, float], Tuple[float, float]]:
    """Refined global ((t_max, I_max), (t_min, I_min)).

    Raises IncompleteTraceError when the global maximum sits on the last sample.
    """
    values = trace.intensity
    k_max = int(np.argmax(values))
    if k_max == values.size - 1:
        raise IncompleteTraceError(f"trace ends at t = {trace.times[-1]:.6g} before its intensity maximum",
                                   t_end=float(trace.times[-1]))
    k_min = int(np.argmin(values))
    return _refine(trace.times, values, k_max), _refine(trace.times, values, k_min)


def zero_touches(trace: IntensityTrace, epsilon: float, i_max: float) -> Tuple[float, ...]:
    """Interior local minima within epsilon of zero that are followed by renewed emission."""
    values = trace.intensity
    interior = np.arange(1, values.size - 1)
    is_min = (values[interior] <= values[interior - 1]) & (values[interior] <= values[interior + 1]) & \
             ((values[interior] < values[interior - 1]) | (values[interior] < values[interior + 1]))
    touches = []
    for k in interior[is_min]:
        t_k, v_k = _refine(trace.times, values, int(k))
        if abs(v_k) > epsilon:
            continue
        if values[k + 1:].max(initial=-np.inf) >= REVIVAL_FRACTION * i_max:
            touches.append(t_k)
    return tuple(touches)


def classify_regime(trace: IntensityTrace, epsilon: Optional[float] = None) -> RegimeReport:
    """Markovian, critical (pulsed) or non-Markovian (reabsorbing) emission."""
    if epsilon is None:
        params = trace.meta["params"]
        epsilon = EPSILON_SCALE * params["omega0"] * params["gamma0"] * params["n_atoms"]
    (t_max, i_max), (t_min, i_min) = trace_extrema(trace)
    touches = zero_touches(trace, epsilon, i_max)
    if i_min < -epsilon:
        regime = NON_MARKOVIAN
    elif touches:
        regime = CRITICAL_PULSED
    else:
        regime = MARKOVIAN
    return RegimeReport(regime, i_min, t_min, i_max, t_max, touches,
                        {"epsilon_intensity": epsilon, "revival_fraction": REVIVAL_FRACTION * i_max})


def min_intensity(p: SystemParams, solver: str = "auto", **options) -> float:
    """Refined min_t I(t) over the analysis window."""
    trace = simulate(p, solver, **options)
    k = int(np.argmin(trace.intensity))
    return _refine(trace.times, trace.intensity, k)[1]
