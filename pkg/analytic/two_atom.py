"""
Exact dynamics of two emitters starting in the doubly excited Dicke state.

The propagators solve constant-coefficient linear ODEs:

    upsilon, eta : x'' + lambda x' + gamma0^2 x = 0,  (1, 0) and (0, 1)
    phi          : x'' + lambda x' + 2 gamma0^2 x = 0, (1, 0)
    zeta         : x''' + 3 lambda x'' + (2 lambda^2 + 3 gamma0^2) x'
                   + 2 lambda gamma0^2 x = 0,          (1, 0, -gamma0^2)

and the overlap integrals I1, I2 are double integrals against the kernel
e^{-lambda |t' - t''|}. All of them are carried as ExpSums, so populations,
intensities and the time-local master equation coefficients come out in
closed form with exact derivatives.
"""

import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Tuple

import numpy as np
from absl import logging

from model import DegenerateParametersError, IntensityTrace, ParameterError, SystemParams, decay_horizon, validate_params
from utils.expsum_utils import (
    ROOT_CLUSTER_TOL,
    ExpSum,
    abs_kernel_convolution,
    polynomial_roots,
    solve_linear_ode,
    split_difference,
    working_precision,
)
from utils.general_utils import real_part

ZERO_GUARD = 1e-12


def critical_degenerate_lambda(gamma0: float) -> float:
    """Spectral width at which two real roots of the zeta cubic coincide."""
    root2 = math.sqrt(2.0)
    return gamma0 * math.sqrt(1.5 * (2 + np.cbrt(3 - 2 * root2) + np.cbrt(3 + 2 * root2)))


def zeta_polynomial(p: SystemParams) -> List[float]:
    lam, g2 = p.lam, p.gamma0 ** 2
    return [1.0, 3 * lam, 2 * lam ** 2 + 3 * g2, 2 * lam * g2]


@dataclass(frozen=True)
class PairPropagators:
    """Closed-form propagators of the two-atom problem.

    upsilon, eta, phi and zeta are the ODE solutions listed in the module
    docstring and roots are the three zeta exponents. i1 and i2 are the
    overlap integrals as functions of the upper limit, excitation is
    <n>(t) = 2 zeta^2 + I2.
    """
    upsilon: ExpSum
    zeta: ExpSum
    eta: ExpSum
    phi: ExpSum
    roots: Tuple[complex, complex, complex]
    i1: ExpSum
    i2: ExpSum
    excitation: ExpSum
    gamma0: float
    lam: float

    @property
    def dps(self) -> Optional[int]:
        return self.zeta.dps


def _combine_factors(pairs: List[Tuple[ExpSum, ExpSum]]) -> List[Tuple[ExpSum, ExpSum]]:
    # merge (T, S) pairs whose monic t-factors coincide
    combined: List[Tuple[ExpSum, ExpSum]] = []
    for T, S in pairs:
        (_, mu, power), = T.terms()
        for index, (T_seen, S_seen) in enumerate(combined):
            (_, mu_seen, power_seen), = T_seen.terms()
            if power_seen == power and abs(mu_seen - mu) <= max(T.eps_merge, T_seen.eps_merge):
                combined[index] = (T_seen, S_seen + S)
                break
        else:
            combined.append((T, S))
    return combined


def _overlap_sums(upsilon: ExpSum, eta: ExpSum, zeta: ExpSum, p: SystemParams) -> Tuple[ExpSum, ExpSum]:
    """I1(t) and I2(t) as ExpSums in the upper integration limit t.

    upsilon(t - s) zeta(s) + eta(t - s) zeta'(s) = sum_a T_a(t) S_a(s), which
    turns both double integrals into sums of abs-kernel convolutions of the
    S_a weighted by products of the T_a.
    """
    zeta_rate = zeta.derivative()
    pairs = [(T, S * zeta) for T, S in split_difference(upsilon)]
    pairs += [(T, S * zeta_rate) for T, S in split_difference(eta)]
    factors = _combine_factors(pairs)
    g2 = p.gamma0 ** 2

    i1 = ExpSum.zero(zeta.dps)
    for T, S in factors:
        i1 = i1 + T * abs_kernel_convolution(upsilon, S, p.lam)

    i2 = ExpSum.zero(zeta.dps)
    for a, (T_a, S_a) in enumerate(factors):
        for b in range(a, len(factors)):
            T_b, S_b = factors[b]
            weight = 1.0 if a == b else 2.0
            i2 = i2 + (T_a * T_b * abs_kernel_convolution(S_a, S_b, p.lam)).scale(weight)
    return i1.scale(g2), i2.scale(g2)


def build_pair_propagators(p: SystemParams, dps: Optional[int] = None,
                           allow_degenerate: bool = False) -> PairPropagators:
    """Assemble all two-atom propagators and overlap integrals for p.

    With dps set, every ExpSum is built in mpmath arithmetic at that many
    digits. A collision of two zeta roots raises DegenerateParametersError
    unless allow_degenerate is set, in which case a confluent t e^{zt} basis
    is used.
    """
    validate_params(p)
    lam, g2 = p.lam, p.gamma0 ** 2
    poly = zeta_polynomial(p)
    roots = polynomial_roots(poly, dps)
    scale = max(abs(z) for z in roots)
    separation = min(abs(roots[i] - roots[j]) for i in range(3) for j in range(i + 1, 3))
    if separation <= ROOT_CLUSTER_TOL * scale and not allow_degenerate:
        lam_c = critical_degenerate_lambda(p.gamma0)
        raise DegenerateParametersError(
            f"zeta roots collide at lambda = {lam:.12g}; degenerate width is {lam_c:.12g} "
            f"(lambda^2 = 1.5 (2 + cbrt(3 - 2 sqrt 2) + cbrt(3 + 2 sqrt 2)) gamma0^2)",
            lambda_degenerate=lam_c)

    upsilon = solve_linear_ode([1.0, lam, g2], [1.0, 0.0], dps)
    eta = solve_linear_ode([1.0, lam, g2], [0.0, 1.0], dps)
    phi = solve_linear_ode([1.0, lam, 2 * g2], [1.0, 0.0], dps)
    zeta = solve_linear_ode(poly, [1.0, 0.0, -g2], dps)
    i1, i2 = _overlap_sums(upsilon, eta, zeta, p)
    excitation = (zeta * zeta).scale(2) + i2
    logging.vlog(1, "pair propagators: %d I1 terms, %d I2 terms (dps=%s)", len(i1), len(i2), dps)

    pp = PairPropagators(upsilon=upsilon, zeta=zeta, eta=eta, phi=phi, roots=tuple(roots), i1=i1, i2=i2,
                         excitation=excitation, gamma0=p.gamma0, lam=lam)
    _check_invariants(pp, poly)
    return pp


def _check_invariants(pp: PairPropagators, poly: List[float]):
    g2 = pp.gamma0 ** 2
    expected = (
        ("upsilon(0)", pp.upsilon.at_zero(), 1.0),
        ("zeta(0)", pp.zeta.at_zero(), 1.0),
        ("phi(0)", pp.phi.at_zero(), 1.0),
        ("eta(0)", pp.eta.at_zero(), 0.0),
        ("zeta'(0)", pp.zeta.derivative().at_zero(), 0.0),
        ("zeta''(0)", pp.zeta.derivative().derivative().at_zero() / g2, -1.0),
    )
    for name, value, target in expected:
        if abs(complex(value) - target) > 1e-8:
            raise ArithmeticError(f"propagator invariant {name} = {target} violated: {complex(value)}")
    scale = max(abs(complex(z)) for z in pp.roots) or 1.0
    for z in pp.roots:
        z = complex(z)
        if abs(np.polyval(poly, z)) > 1e-10 * max(scale ** 3, 1e-300):
            raise ArithmeticError(f"zeta root {z} leaves residual {abs(np.polyval(poly, z)):.3e}")


def _real(values, what: str, scale: float):
    return real_part(values, what, scale=scale)


def pair_overlap_integrals(pp: PairPropagators, p: SystemParams, t):
    """(I1(t), I2(t)); both real."""
    return _real(pp.i1.eval(t), "I1", 1.0), _real(pp.i2.eval(t), "I2", 1.0)


def pair_populations(pp: PairPropagators, t):
    """Dicke populations (p2, p1, p0) for the doubly excited initial state."""
    p2 = _real(pp.zeta.eval(t), "zeta", 1.0) ** 2
    p1 = _real(pp.i2.eval(t), "I2", 1.0)
    return p2, p1, 1.0 - p2 - p1


def pair_excitation(pp: PairPropagators, t):
    """<n>(t) = 2 zeta^2 + I2."""
    return _real(pp.excitation.eval(t), "pair excitation", 2.0)


def pair_intensity(pp: PairPropagators, p: SystemParams, t):
    """-omega0 d<n>/dt from the exact derivative of the excitation ExpSum."""
    rate = pp.excitation.derivative()
    return -p.omega0 * _real(rate.eval(t), "pair intensity", p.gamma0)


def pair_trace(p: SystemParams, grid=None, n_samples: int = 4001, pp: Optional[PairPropagators] = None) -> IntensityTrace:
    validate_params(p)
    if p.n_atoms != 2:
        raise ParameterError("the two-atom solution needs n_atoms = 2", invariant="n_atoms == 2")
    pp = pp or build_pair_propagators(p, allow_degenerate=True)
    if grid is None:
        t_end = decay_horizon(p, lambda t: pair_excitation(pp, t))
        grid = np.linspace(0.0, t_end, n_samples)
    grid = np.asarray(grid, dtype=float)
    meta = {"solver": "analytic-pair", "params": p.snapshot()}
    return IntensityTrace(grid, pair_intensity(pp, p, grid), pair_excitation(pp, grid), meta)


class GammaSamples(NamedTuple):
    times: np.ndarray
    gamma11: np.ndarray
    gamma22: np.ndarray
    gamma33: np.ndarray
    gamma12: np.ndarray
    singular: np.ndarray


@dataclass(frozen=True)
class GammaMatrix:
    """Coefficients of the time-local master equation with jumps
    L1 = |1><2|, L2 = |0><1|, L3 = |0><2|.

    Only Gamma11, Gamma22, Gamma33 and Gamma12 = Gamma21 are nonzero. Where
    upsilon or zeta vanish (relative to the magnitude of their terms) the
    coefficients diverge; those samples are returned as signed infinities and
    marked in GammaSamples.singular.
    """
    propagators: PairPropagators
    zero_guard: float = ZERO_GUARD

    def evaluate(self, t) -> GammaSamples:
        pp = self.propagators
        times = np.atleast_1d(np.asarray(t, dtype=float))
        upsilon_rate = pp.upsilon.derivative()
        zeta_rate = pp.zeta.derivative()
        u, du = pp.upsilon.eval(times), upsilon_rate.eval(times)
        z, dz = pp.zeta.eval(times), zeta_rate.eval(times)
        i1, di1 = pp.i1.eval(times), pp.i1.derivative().eval(times)
        i2, di2 = pp.i2.eval(times), pp.i2.derivative().eval(times)

        singular = (np.abs(_as_complex(u)) <= self.zero_guard * _envelope(pp.upsilon, times)) | \
                   (np.abs(_as_complex(z)) <= self.zero_guard * _envelope(pp.zeta, times))
        safe = ~singular
        ones = 1 if pp.dps is None else np.ones_like(u)
        u = np.where(safe, u, ones)
        z = np.where(safe, z, ones)

        scale = pp.gamma0
        with working_precision(pp.dps):
            ratio = du / u
            bracket = 2 * ratio * i2 - di2
            gamma11 = _real(-bracket / (z * z), "Gamma11", scale)
            gamma22 = _real(-2 * ratio, "Gamma22", scale)
            gamma33 = _real(bracket / (z * z) - 2 * dz / z, "Gamma33", scale)
            gamma12 = _real((di1 - ratio * i1) / (z * u), "Gamma12", scale)
        flagged = [np.where(singular, np.copysign(np.inf, g), g) for g in (gamma11, gamma22, gamma33, gamma12)]
        return GammaSamples(times, *flagged, singular)

    def gamma11(self, t):
        return self.evaluate(t).gamma11

    def gamma22(self, t):
        return self.evaluate(t).gamma22

    def gamma33(self, t):
        return self.evaluate(t).gamma33

    def gamma12(self, t):
        return self.evaluate(t).gamma12

    gamma21 = gamma12


def _as_complex(values):
    values = np.asarray(values)
    if values.dtype == object:
        return np.array([complex(v) for v in values.ravel()]).reshape(values.shape)
    return values


def _envelope(f: ExpSum, times: np.ndarray) -> np.ndarray:
    """Sum of term magnitudes |c t^p e^{mu t}|; the scale against which f counts as zero."""
    coefs = np.array([complex(c) for c in f.coefs.tolist()])
    exps = np.array([complex(mu) for mu in f.exps.tolist()])
    tt = times[..., None]
    return np.sum(np.abs(coefs) * np.power(tt, f.powers) * np.exp(tt * exps.real), axis=-1)


def pair_gamma_matrix(pp: PairPropagators, p: SystemParams, zero_guard: float = ZERO_GUARD) -> GammaMatrix:
    return GammaMatrix(pp, zero_guard)


def canonical_rates(g: GammaMatrix, t):
    """Eigenvalues (gamma1 >= gamma2) of the (L1, L2) block and gamma3 = Gamma33."""
    s = g.evaluate(t)
    with np.errstate(invalid="ignore"):
        mean = 0.5 * (s.gamma11 + s.gamma22)
        spread = 0.5 * np.sqrt((s.gamma11 - s.gamma22) ** 2 + 4 * s.gamma12 ** 2)
    return _squeeze(t, mean + spread), _squeeze(t, mean - spread), _squeeze(t, s.gamma33)


def noncanonical_rates(g: GammaMatrix, t):
    """Rates attached to J-, L3, L1 and L2: (Gamma12, Gamma33, Gamma11 - Gamma12, Gamma22 - Gamma12)."""
    s = g.evaluate(t)
    return tuple(_squeeze(t, v) for v in (s.gamma12, s.gamma33, s.gamma11 - s.gamma12, s.gamma22 - s.gamma12))


def _squeeze(t, values):
    return values if np.ndim(t) else float(values[0])


def population_ode_rhs(g: GammaMatrix, t: float, populations):
    """Diagonal part of the time-local master equation for (p2, p1, p0)."""
    s = g.evaluate(t)
    g11, g22, g33 = s.gamma11[0], s.gamma22[0], s.gamma33[0]
    p2, p1, _ = populations
    return np.array([-(g11 + g33) * p2, g11 * p2 - g22 * p1, g33 * p2 + g22 * p1])


def pair_rate_trace(p: SystemParams, grid, kind: str = "canonical", pp: Optional[PairPropagators] = None):
    """Rate table on grid: (times, columns dict, singular mask)."""
    pp = pp or build_pair_propagators(p, allow_degenerate=True)
    g = pair_gamma_matrix(pp, p)
    grid = np.asarray(grid, dtype=float)
    samples = g.evaluate(grid)
    if kind == "canonical":
        names = ("gamma1", "gamma2", "gamma3")
        values = canonical_rates(g, grid)
    elif kind == "noncanonical":
        names = ("gamma1_tilde", "gamma2_tilde", "gamma3_tilde", "gamma4_tilde")
        values = noncanonical_rates(g, grid)
    else:
        raise ValueError(f"unknown rate kind {kind!r}, expected 'canonical' or 'noncanonical'")
    return grid, dict(zip(names, values)), samples.singular
