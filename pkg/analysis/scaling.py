"""
Scaling analysis across N and lambda: critical spectral width, local
peak-intensity exponents, reabsorption depth and the relaxation-time estimate.

Sweep points are independent and go through utils.sweep_utils.run_jobs, so
tables come out in input order whatever the number of workers.
"""

import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from absl import logging

from analysis.regimes import analysis_window, intensity_epsilon, min_intensity, simulate, trace_extrema
from model import (
    BracketError,
    ExponentDataError,
    IncompleteTraceError,
    SystemParams,
    markovian_rate,
    markovianity_indicator,
    oscillation_period,
    validate_params,
)
from utils.sweep_utils import run_jobs

CRITICAL_REL_WIDTH = 1e-3
BRACKET_LOW = 0.1
BRACKET_HIGH = 2.0


def default_bracket(p: SystemParams) -> Tuple[float, float]:
    """[0.1 gamma0, 2 gamma0 sqrt(N)]."""
    return BRACKET_LOW * p.gamma0, BRACKET_HIGH * p.gamma0 * math.sqrt(p.n_atoms)


def reabsorbs(p: SystemParams, solver: str = "auto", **options) -> bool:
    """Whether the intensity dips below -epsilon_I within the analysis window.

    For one emitter the closed form decides exactly: a reabsorption minimum
    exists iff lambda < sqrt(2) gamma0.
    """
    if p.n_atoms == 1 and solver in ("auto", "analytic"):
        from analytic import single_extrema
        return single_extrema(p).min is not None
    return min_intensity(p, solver, **options) < -intensity_epsilon(p)


def bracket_critical_lambda(p_base: SystemParams, bracket: Optional[Tuple[float, float]] = None,
                            rel_width: float = CRITICAL_REL_WIDTH, solver: str = "auto",
                            **options) -> Tuple[float, float]:
    """Bisect to (lo, hi) with lo reabsorbing, hi not, and (hi - lo) <= rel_width * midpoint."""
    validate_params(p_base)
    lo, hi = bracket or default_bracket(p_base)
    if not 0 < lo < hi:
        raise BracketError(f"bracket must satisfy 0 < lo < hi, got [{lo:g}, {hi:g}]", lower=lo, upper=hi)
    if not reabsorbs(p_base.with_lambda(lo), solver, **options):
        raise BracketError(f"no reabsorption at the lower end lambda = {lo / p_base.gamma0:.6g} gamma0",
                           lower=lo, upper=hi, n_atoms=p_base.n_atoms)
    if reabsorbs(p_base.with_lambda(hi), solver, **options):
        raise BracketError(f"reabsorption persists at the upper end lambda = {hi / p_base.gamma0:.6g} gamma0",
                           lower=lo, upper=hi, n_atoms=p_base.n_atoms)
    steps = 0
    while hi - lo > rel_width * 0.5 * (lo + hi):
        mid = 0.5 * (lo + hi)
        if reabsorbs(p_base.with_lambda(mid), solver, **options):
            lo = mid
        else:
            hi = mid
        steps += 1
        logging.vlog(1, "critical lambda N=%d: [%.9g, %.9g] gamma0", p_base.n_atoms,
                     lo / p_base.gamma0, hi / p_base.gamma0)
    logging.info("critical lambda N=%d: %.6g gamma0 after %d bisections", p_base.n_atoms,
                 0.5 * (lo + hi) / p_base.gamma0, steps)
    return lo, hi


def find_critical_lambda(p_base: SystemParams, bracket: Optional[Tuple[float, float]] = None,
                         rel_width: float = CRITICAL_REL_WIDTH, solver: str = "auto", **options) -> float:
    """Spectral width at which the first reabsorption disappears (absolute lambda)."""
    lo, hi = bracket_critical_lambda(p_base, bracket, rel_width, solver, **options)
    return 0.5 * (lo + hi)


def _critical_job(job):
    p, rel_width, solver = job
    return find_critical_lambda(p, rel_width=rel_width, solver=solver)


def critical_lambda_scan(p_base: SystemParams, n_list: Sequence[int], rel_width: float = CRITICAL_REL_WIDTH,
                         solver: str = "auto", threads: int = 1, quiet: bool = True) -> np.ndarray:
    """lambda_crit(N) for every N in n_list, in input order."""
    jobs = [(p_base.with_atoms(n), rel_width, solver) for n in n_list]
    return np.array(run_jobs(_critical_job, jobs, threads, desc="critical lambda", quiet=quiet))


def peak_intensity(p: SystemParams, solver: str = "auto") -> Tuple[float, float]:
    """(t_max, max_t I) of the first emission burst.

    Starts with one oscillation period in the non-Markovian regime and
    doubles the horizon until the maximum is interior.
    """
    window = analysis_window(p)
    if p.lam > 0 and markovianity_indicator(p) >= 1:
        t_end = window
    else:
        t_end = min(window, oscillation_period(p))
    while True:
        trace = simulate(p, solver, t_end=t_end)
        try:
            return trace_extrema(trace)[0]
        except IncompleteTraceError:
            if t_end >= window:
                raise
            t_end = min(2 * t_end, window)


def _peak_job(job):
    p, solver = job
    return peak_intensity(p, solver)[1]


class ExponentRow(NamedTuple):
    n_atoms: int
    n_next: int
    max_intensity: float
    nu: float


@dataclass(frozen=True)
class ExponentTable:
    """Local exponents nu_m = log(I_max(N_m+1) / I_max(N_m)) / log(N_m+1 / N_m)."""
    n_values: np.ndarray
    max_intensity: np.ndarray
    nu: np.ndarray

    @classmethod
    def from_maxima(cls, n_values: Sequence[int], maxima: Sequence[float]) -> "ExponentTable":
        n = np.asarray(n_values, dtype=np.int64)
        peaks = np.asarray(maxima, dtype=float)
        if n.size < 2 or n.size != peaks.size:
            raise ExponentDataError(f"need at least two (N, max I) pairs, got {n.size} N and {peaks.size} maxima")
        steps = np.diff(n)
        if np.any(steps == 0):
            raise ExponentDataError("N list contains equal consecutive entries", n_values=n.tolist())
        if np.any(steps < 0):
            raise ExponentDataError("N list must be increasing", n_values=n.tolist())
        if np.any(~(peaks > 0)):
            raise ExponentDataError("maximum intensities must be positive",
                                    n_values=n.tolist(), max_intensity=peaks.tolist())
        nu = np.log(peaks[1:] / peaks[:-1]) / np.log(n[1:] / n[:-1])
        return cls(n, peaks, nu)

    def rows(self) -> List[ExponentRow]:
        return [ExponentRow(int(self.n_values[m]), int(self.n_values[m + 1]), float(self.max_intensity[m]),
                            float(self.nu[m])) for m in range(self.nu.size)]


def local_exponent(p_base: SystemParams, n_list: Sequence[int], solver: str = "auto", threads: int = 1,
                   quiet: bool = True) -> ExponentTable:
    """Peak intensity per N and the local exponents between neighbours.

    solver "cascade" uses the Markovian rate-equation reference instead of
    the exact dynamics.
    """
    n_list = list(n_list)
    if len(n_list) < 2:
        raise ExponentDataError(f"need at least two N values, got {n_list}")
    if len(set(n_list)) != len(n_list):
        raise ExponentDataError("N list contains equal entries", n_values=n_list)
    jobs = [(p_base.with_atoms(n), solver) for n in n_list]
    maxima = run_jobs(_peak_job, jobs, threads, desc="peak intensity", quiet=quiet)
    return ExponentTable.from_maxima(n_list, maxima)


def _depth_job(job):
    p, solver = job
    value = min_intensity(p, solver)
    return -value if value < -intensity_epsilon(p) else 0.0


@dataclass(frozen=True)
class ReabsorptionTable:
    """depth[k, j] = |min_t I| for (n_values[k], lambdas[j]); zero without reabsorption.

    slopes[k, j] is the log-log slope in N between rows k and k + 1, NaN
    where either depth vanishes.
    """
    n_values: np.ndarray
    lambdas: np.ndarray
    depth: np.ndarray
    slopes: np.ndarray


def reabsorption_scan(p_base: SystemParams, n_list: Sequence[int], lambda_list: Sequence[float],
                      solver: str = "auto", threads: int = 1, quiet: bool = True) -> ReabsorptionTable:
    """Reabsorption depth on the (N, lambda) grid; lambdas are absolute."""
    n = np.asarray(list(n_list), dtype=np.int64)
    lambdas = np.asarray(list(lambda_list), dtype=float)
    jobs = [(p_base.with_atoms(int(N)).with_lambda(lam), solver) for N in n for lam in lambdas]
    depth = np.array(run_jobs(_depth_job, jobs, threads, desc="reabsorption", quiet=quiet)).reshape(n.size, lambdas.size)
    slopes = np.full((max(n.size - 1, 0), lambdas.size), np.nan)
    if n.size > 1:
        both = (depth[1:] > 0) & (depth[:-1] > 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.log(depth[1:] / depth[:-1]) / np.log(n[1:] / n[:-1])[:, None]
        slopes[both] = ratio[both]
    return ReabsorptionTable(n, lambdas, depth, slopes)


class RelaxationEstimate(NamedTuple):
    tau_r: float
    indicator: float


def relaxation_time(p: SystemParams) -> RelaxationEstimate:
    """tau_R = 2 / (N gamma_M) and the Markovianity indicator lambda / (sqrt(N) gamma0).

    An indicator below one flags parameters where the Markovian estimate is
    not expected to hold.
    """
    validate_params(p)
    return RelaxationEstimate(2.0 / (p.n_atoms * markovian_rate(p)), markovianity_indicator(p))
