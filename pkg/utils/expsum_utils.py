"""
Exact algebra over exponential sums

    f(t) = sum_k c_k * t**p_k * exp(mu_k * t)

with complex coefficients and exponents and small non-negative integer
powers. The set is closed under products, derivatives and integration from
zero, which is all the two-atom closed forms need. Powers only appear for
confluent characteristic roots and for integrals of terms whose exponent
vanishes.

An ExpSum works either in double precision (numpy complex arrays) or, when
built with ``dps``, in mpmath arithmetic at that many decimal digits.
"""

import contextlib
import math
from typing import List, Optional, Sequence, Tuple

import mpmath
import numpy as np

FLOAT_MERGE_DIGITS = 10
MP_GUARD_DIGITS = 10
ROOT_CLUSTER_TOL = 1e-6


def working_precision(dps: Optional[int]):
    return mpmath.workdps(dps) if dps else contextlib.nullcontext()


def _to_scalar(value, dps: Optional[int]):
    if dps:
        if isinstance(value, (mpmath.mpc, mpmath.mpf)):
            return mpmath.mpc(value)
        value = complex(value)
        return mpmath.mpc(value.real, value.imag)
    return complex(value)


def _merge_tolerance(exps, dps: Optional[int]):
    if len(exps) == 0:
        return 0.0
    scale = max(abs(mu) for mu in exps)
    digits = (dps - MP_GUARD_DIGITS) if dps else FLOAT_MERGE_DIGITS
    return scale * (mpmath.mpf(10) ** (-digits) if dps else 10.0 ** (-digits))


class ExpSum:
    """Finite sum of c * t**p * exp(mu * t) terms, merged on construction.

    Two terms with equal power whose exponents differ by less than
    eps_merge = 1e-10 * max|mu| (dps - 10 digits in extended precision) are
    combined; terms with an exactly vanishing coefficient are dropped.
    """

    __slots__ = ("coefs", "exps", "powers", "dps", "eps_merge")

    def __init__(self, coefs: Sequence = (), exps: Sequence = (), powers: Optional[Sequence[int]] = None,
                 dps: Optional[int] = None, merge: bool = True):
        coefs = list(coefs)
        exps = list(exps)
        powers = [0] * len(coefs) if powers is None else [int(q) for q in powers]
        if not (len(coefs) == len(exps) == len(powers)):
            raise ValueError("coefs, exps and powers must have equal length")
        if any(q < 0 for q in powers):
            raise ValueError("powers must be non-negative")
        self.dps = dps
        with working_precision(dps):
            coefs = [_to_scalar(c, dps) for c in coefs]
            exps = [_to_scalar(mu, dps) for mu in exps]
            self.eps_merge = _merge_tolerance(exps, dps)
            if merge:
                coefs, exps, powers = self._merged(coefs, exps, powers, self.eps_merge)
        dtype = object if dps else complex
        self.coefs = np.array(coefs, dtype=dtype)
        self.exps = np.array(exps, dtype=dtype)
        self.powers = np.array(powers, dtype=int)

    @staticmethod
    def _merged(coefs, exps, powers, eps):
        keep_c, keep_e, keep_p = [], [], []
        for c, mu, q in zip(coefs, exps, powers):
            for k in range(len(keep_e)):
                if keep_p[k] == q and abs(keep_e[k] - mu) <= eps:
                    keep_c[k] += c
                    break
            else:
                keep_c.append(c)
                keep_e.append(mu)
                keep_p.append(q)
        nonzero = [k for k, c in enumerate(keep_c) if c != 0]
        return [keep_c[k] for k in nonzero], [keep_e[k] for k in nonzero], [keep_p[k] for k in nonzero]

    # construction helpers

    @classmethod
    def constant(cls, value, dps: Optional[int] = None) -> "ExpSum":
        return cls([value], [0.0], dps=dps)

    @classmethod
    def exponential(cls, rate, coef=1.0, dps: Optional[int] = None) -> "ExpSum":
        return cls([coef], [rate], dps=dps)

    @classmethod
    def zero(cls, dps: Optional[int] = None) -> "ExpSum":
        return cls(dps=dps)

    def _like(self, coefs, exps, powers, merge: bool = True) -> "ExpSum":
        return ExpSum(coefs, exps, powers, dps=self.dps, merge=merge)

    def terms(self) -> List[Tuple[complex, complex, int]]:
        return list(zip(self.coefs.tolist(), self.exps.tolist(), self.powers.tolist()))

    def __len__(self) -> int:
        return self.coefs.size

    def __repr__(self) -> str:
        body = " + ".join(f"({complex(c):.6g})*t^{q}*exp({complex(mu):.6g}t)" for c, mu, q in self.terms())
        return f"ExpSum({body or '0'})"

    def _check_compatible(self, other: "ExpSum"):
        if self.dps != other.dps:
            raise ValueError(f"precision mismatch: dps={self.dps} vs dps={other.dps}")

    # evaluation

    def eval(self, t):
        """Evaluate at scalar or array t.

        Returns complex values in double precision and mpmath.mpc objects in
        extended precision, shaped like t.
        """
        if self.dps:
            return self._eval_mp(t)
        t = np.asarray(t, dtype=float)
        if self.coefs.size == 0:
            return np.zeros(t.shape, dtype=complex)
        tt = t[..., None]
        with np.errstate(over="ignore", invalid="ignore"):
            values = self.coefs * np.power(tt, self.powers) * np.exp(tt * self.exps)
        values = values.sum(axis=-1)
        return values if values.ndim else complex(values)

    __call__ = eval

    def _eval_mp(self, t):
        with working_precision(self.dps):
            terms = self.terms()

            def single(s):
                s = mpmath.mpf(float(s))
                total = mpmath.mpc(0)
                for c, mu, q in terms:
                    total += c * s ** q * mpmath.exp(mu * s)
                return total

            if np.ndim(t) == 0:
                return single(t)
            t = np.asarray(t, dtype=float)
            out = np.empty(t.shape, dtype=object)
            for index, s in np.ndenumerate(t):
                out[index] = single(s)
            return out

    def at_zero(self):
        """Value at t = 0, i.e. the sum of the power-zero coefficients."""
        with working_precision(self.dps):
            return sum((c for c, _, q in self.terms() if q == 0), _to_scalar(0, self.dps))

    # algebra

    def __add__(self, other):
        if not isinstance(other, ExpSum):
            other = ExpSum.constant(other, dps=self.dps)
        self._check_compatible(other)
        return self._like(np.concatenate([self.coefs, other.coefs]).tolist(),
                          np.concatenate([self.exps, other.exps]).tolist(),
                          np.concatenate([self.powers, other.powers]).tolist())

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        if not isinstance(other, ExpSum):
            other = ExpSum.constant(other, dps=self.dps)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, factor) -> "ExpSum":
        with working_precision(self.dps):
            factor = _to_scalar(factor, self.dps)
            return self._like([c * factor for c in self.coefs.tolist()], self.exps.tolist(),
                              self.powers.tolist(), merge=False)

    def multiply(self, other: "ExpSum") -> "ExpSum":
        """Term-by-term product; exponents and powers add, coefficients multiply."""
        self._check_compatible(other)
        if len(self) == 0 or len(other) == 0:
            return ExpSum.zero(self.dps)
        with working_precision(self.dps):
            coefs = np.multiply.outer(self.coefs, other.coefs).ravel().tolist()
            exps = np.add.outer(self.exps, other.exps).ravel().tolist()
        powers = np.add.outer(self.powers, other.powers).ravel().tolist()
        return self._like(coefs, exps, powers)

    def __mul__(self, other):
        if isinstance(other, ExpSum):
            return self.multiply(other)
        return self.scale(other)

    __rmul__ = __mul__

    def shifted(self, rate) -> "ExpSum":
        """exp(rate * t) * f(t)."""
        with working_precision(self.dps):
            rate = _to_scalar(rate, self.dps)
            return self._like(self.coefs.tolist(), [mu + rate for mu in self.exps.tolist()], self.powers.tolist())

    # calculus

    def derivative(self) -> "ExpSum":
        coefs, exps, powers = [], [], []
        with working_precision(self.dps):
            for c, mu, q in self.terms():
                coefs.append(c * mu)
                exps.append(mu)
                powers.append(q)
                if q > 0:
                    coefs.append(c * q)
                    exps.append(mu)
                    powers.append(q - 1)
        return self._like(coefs, exps, powers)

    def integrate_0_to_t(self) -> "ExpSum":
        """Antiderivative F with F(0) = 0.

        For mu != 0, int_0^t s^p e^{mu s} ds =
        e^{mu t} sum_k (-1)^k p!/(p-k)! t^{p-k} / mu^{k+1} - (-1)^p p! / mu^{p+1};
        exponents with |mu| <= eps_merge integrate as t^{p+1}/(p+1).
        """
        coefs, exps, powers = [], [], []
        with working_precision(self.dps):
            zero = _to_scalar(0, self.dps)
            for c, mu, q in self.terms():
                if abs(mu) <= self.eps_merge:
                    coefs.append(c / (q + 1))
                    exps.append(zero)
                    powers.append(q + 1)
                    continue
                falling = 1
                for k in range(q + 1):
                    coefs.append(c * (-1) ** k * falling / mu ** (k + 1))
                    exps.append(mu)
                    powers.append(q - k)
                    falling *= q - k
                coefs.append(-c * (-1) ** q * math.factorial(q) / mu ** (q + 1))
                exps.append(zero)
                powers.append(0)
        return self._like(coefs, exps, powers)

    def isclose(self, other: "ExpSum", rtol: float = 1e-10) -> bool:
        """True when f - other merges down to coefficients negligible against the operands."""
        difference = self - other
        scale = max([abs(c) for c in self.coefs.tolist() + other.coefs.tolist()] + [0])
        return all(abs(c) <= rtol * scale for c in difference.coefs.tolist())


def split_difference(f: ExpSum) -> List[Tuple[ExpSum, ExpSum]]:
    """Separate f(t - s) into sum_k T_k(t) * S_k(s).

    Each T_k is a monic single term t^j e^{mu t}; (t - s)^p is expanded with
    the binomial theorem and S_k collects everything that multiplies T_k.
    """
    grouped = {}
    with working_precision(f.dps):
        for c, mu, q in f.terms():
            for j in range(q + 1):
                weight = c * math.comb(q, j) * (-1) ** (q - j)
                key = (j, mu)
                match = next((k for k in grouped if k[0] == j and abs(k[1] - mu) <= f.eps_merge), None)
                if match is None:
                    grouped[key] = []
                    match = key
                grouped[match].append((weight, -mu, q - j))
    pairs = []
    for (j, mu), terms in grouped.items():
        T = ExpSum([1.0], [mu], [j], dps=f.dps)
        S = ExpSum([w for w, _, _ in terms], [e for _, e, _ in terms], [q for _, _, q in terms], dps=f.dps)
        if len(S):
            pairs.append((T, S))
    return pairs


def abs_kernel_convolution(f: ExpSum, g: ExpSum, lam: float) -> ExpSum:
    """Closed form of int_0^t int_0^t f(t') e^{-lam |t' - t''|} g(t'') dt' dt'' as an ExpSum in t.

    The square is split along t' = t'': on t'' < t' the kernel is
    e^{-lam t'} e^{lam t''}, so the inner integral is
    e^{-lam t'} int_0^{t'} e^{lam s} g(s) ds; the other half swaps f and g.
    """
    f._check_compatible(g)

    def ordered_half(outer: ExpSum, inner: ExpSum) -> ExpSum:
        inner_integral = inner.shifted(lam).integrate_0_to_t().shifted(-lam)
        return (outer * inner_integral).integrate_0_to_t()

    return ordered_half(f, g) + ordered_half(g, f)


def convolve_abs_kernel(f: ExpSum, g: ExpSum, lam: float, t):
    """Double integral of f(t') e^{-lam |t' - t''|} g(t'') over [0, t]^2."""
    return abs_kernel_convolution(f, g, lam).eval(t)


def polynomial_roots(poly: Sequence[float], dps: Optional[int] = None) -> list:
    """Roots of a polynomial (highest degree first).

    Companion-matrix eigenvalues followed by Newton polishing: one step in
    double precision, enough steps to reach the working precision otherwise.
    """
    poly = [float(a) for a in poly]
    roots = np.roots(poly)
    if not dps:
        coeffs = np.asarray(poly, dtype=complex)
        derivative = np.polyder(coeffs)
        polished = []
        for z in roots:
            slope = np.polyval(derivative, z)
            polished.append(complex(z - np.polyval(coeffs, z) / slope) if slope != 0 else complex(z))
        return polished
    with working_precision(dps):
        coeffs = [mpmath.mpf(a) for a in poly]
        polished = []
        for z in roots:
            z = mpmath.mpc(complex(z).real, complex(z).imag)
            for _ in range(int(math.log2(dps / 15.0)) + 3):
                value, slope = mpmath.polyval(coeffs, z, derivative=True)
                if slope == 0:
                    break
                z = z - value / slope
            polished.append(z)
        return polished


def cluster_roots(roots: Sequence, tol: float = ROOT_CLUSTER_TOL) -> List[Tuple[object, int]]:
    """Group roots closer than tol * max|z| into (mean root, multiplicity) pairs."""
    scale = max([abs(z) for z in roots] + [1e-300])
    clusters: List[List] = []
    for z in roots:
        for members in clusters:
            if abs(members[0] - z) <= tol * scale:
                members.append(z)
                break
        else:
            clusters.append([z])
    return [(sum(members[1:], members[0]) / len(members), len(members)) for members in clusters]


def solve_linear_ode(poly: Sequence[float], initial: Sequence[float], dps: Optional[int] = None,
                     cluster_tol: float = ROOT_CLUSTER_TOL) -> ExpSum:
    """Solution of sum_k a_k x^{(n-k)} = 0 with x^{(r)}(0) = initial[r], as an ExpSum.

    poly holds the characteristic polynomial, highest degree first. Roots
    closer than cluster_tol (relative) are treated as one confluent root with
    basis t^k e^{z t}.
    """
    order = len(poly) - 1
    if len(initial) != order:
        raise ValueError(f"need {order} initial values, got {len(initial)}")
    clusters = cluster_roots(polynomial_roots(poly, dps), cluster_tol)
    basis = [(z, k) for z, multiplicity in clusters for k in range(multiplicity)]

    def entry(r, z, k):
        # r-th derivative of t^k e^{zt} at t = 0
        if r < k:
            return 0
        return math.factorial(r) // math.factorial(r - k) * z ** (r - k)

    if dps:
        with working_precision(dps):
            A = mpmath.matrix([[entry(r, z, k) for z, k in basis] for r in range(order)])
            b = mpmath.matrix([mpmath.mpf(float(v)) for v in initial])
            solution = mpmath.lu_solve(A, b)
            coefs = [solution[i] for i in range(order)]
    else:
        A = np.array([[entry(r, z, k) for z, k in basis] for r in range(order)], dtype=complex)
        coefs = np.linalg.solve(A, np.asarray(initial, dtype=complex)).tolist()
    return ExpSum(coefs, [z for z, _ in basis], [k for _, k in basis], dps=dps)
