"""
Eternal non-Markovianity of two emitters in a broad cavity line.

For lambda >> gamma0 the third canonical rate of the pair behaves as
gamma3(t) ~ 3 (gamma0^6 / lambda^5) G(lambda t), with G negative for every
t > 0. The exact rate is a difference of O(gamma0^2 / lambda) quantities, so
it is evaluated with the extended-precision ExpSum mode.
"""

from dataclasses import dataclass
from typing import Optional

import mpmath
import numpy as np
from absl import logging

from model import SystemParams

DEFAULT_DPS = 50
# below this tau, G ~ -tau^5/18 and the float form loses all digits
SMALL_TAU = 0.1
SMALL_TAU_DPS = 30


def g_function(tau):
    """G(tau) = e^{-3 tau}/3 {1 + e^tau [2 tau - 5 + e^tau (4 tau^2 - 2 tau + 7)]} - 1.

    Expanded so that no positive exponential appears; small tau goes through mpmath.
    """
    tau = np.asarray(tau, dtype=float)
    flat = np.atleast_1d(tau)
    values = (np.exp(-3 * flat) + np.exp(-2 * flat) * (2 * flat - 5)
              + np.exp(-flat) * (4 * flat ** 2 - 2 * flat + 7)) / 3.0 - 1.0
    small = np.abs(flat) < SMALL_TAU
    values[small] = [float(_g_mp(x, SMALL_TAU_DPS)) for x in flat[small]]
    return values.reshape(tau.shape) if tau.ndim else float(values[0])


def leading_order_gamma3(gamma0: float, lam: float, t):
    return 3.0 * gamma0 ** 6 / lam ** 5 * g_function(lam * np.asarray(t, dtype=float))


@dataclass(frozen=True)
class EternalReport:
    """G on the scaled grid and the exact-versus-leading-order gamma3 comparison."""
    gamma0: float
    lam: float
    times: np.ndarray
    g_values: np.ndarray
    g_at_zero: float
    g_limit: float
    gamma3_exact: np.ndarray
    gamma3_leading: np.ndarray
    relative_residual: np.ndarray

    @property
    def g_negative(self) -> bool:
        positive_tau = self.times > 0
        return bool(np.all(self.g_values[positive_tau] < 0))

    @property
    def gamma3_negative(self) -> bool:
        positive_tau = self.times > 0
        return bool(np.all(self.gamma3_exact[positive_tau] < 0))

    @property
    def max_relative_residual(self) -> float:
        return float(np.nanmax(self.relative_residual))

    def to_dict(self) -> dict:
        return {
            "gamma0_omega0": self.gamma0,
            "lambda_over_gamma0": self.lam / self.gamma0,
            "g_at_zero": self.g_at_zero,
            "g_limit": self.g_limit,
            "g_negative": self.g_negative,
            "gamma3_negative": self.gamma3_negative,
            "max_relative_residual": self.max_relative_residual,
            "n_samples": int(self.times.size),
        }


def eternal_nm_check(gamma0: float, lam: float, t_grid, dps: Optional[int] = DEFAULT_DPS) -> EternalReport:
    """Compare the exact pair gamma3(t) with its leading order in gamma0 / lambda.

    t_grid is in units of 1/omega0. Samples where the exact coefficients are
    singular come back as NaN residuals.
    """
    from analytic import build_pair_propagators, canonical_rates, pair_gamma_matrix

    p = SystemParams(n_atoms=2, gamma0=gamma0, lam=lam)
    times = np.asarray(t_grid, dtype=float)
    g_values = g_function(lam * times)
    # G(inf) from the asymptotic form, evaluated where e^{-tau} underflows
    g_limit = float(g_function(1e3))

    pp = build_pair_propagators(p, dps=dps)
    _, _, gamma3 = canonical_rates(pair_gamma_matrix(pp, p), times)
    gamma3 = np.atleast_1d(np.asarray(gamma3, dtype=float))
    leading = np.atleast_1d(leading_order_gamma3(gamma0, lam, times))
    with np.errstate(divide="ignore", invalid="ignore"):
        residual = np.abs(gamma3 - leading) / np.abs(leading)
    residual[~np.isfinite(residual)] = np.nan

    logging.info("eternal check lambda/gamma0=%.4g (dps=%s): max relative gamma3 residual %.3g over %d samples",
                 lam / gamma0, dps, float(np.nanmax(residual)) if np.any(np.isfinite(residual)) else float("nan"),
                 times.size)
    return EternalReport(gamma0, lam, times, np.atleast_1d(g_values), float(g_function(0.0)), g_limit,
                         gamma3, leading, residual)


def _g_mp(tau, dps: int):
    with mpmath.workdps(dps):
        tau = mpmath.mpf(tau)
        return (mpmath.exp(-3 * tau) + mpmath.exp(-2 * tau) * (2 * tau - 5)
                + mpmath.exp(-tau) * (4 * tau ** 2 - 2 * tau + 7)) / 3 - 1
