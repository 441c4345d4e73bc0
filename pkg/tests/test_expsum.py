import math

import mpmath
import numpy as np
import pytest
from scipy import integrate

from utils.expsum_utils import (
    ExpSum,
    abs_kernel_convolution,
    cluster_roots,
    convolve_abs_kernel,
    polynomial_roots,
    solve_linear_ode,
    split_difference,
)

TIMES = np.array([0.0, 0.3, 1.1, 2.5, 4.0])


def damped():
    # 2 e^{-t} - 0.5 t e^{(-0.3 + 2i) t} + 0.25
    return ExpSum([2.0, -0.5, 0.25], [-1.0, -0.3 + 2j, 0.0], [0, 1, 0])


def reference(t):
    return 2 * np.exp(-t) - 0.5 * t * np.exp((-0.3 + 2j) * t) + 0.25


def random_sum(seed, size=3):
    rng = np.random.default_rng(seed)
    coefs = rng.normal(size=size) + 1j * rng.normal(size=size)
    exps = -rng.uniform(0.1, 2.0, size=size) + 1j * rng.uniform(-3.0, 3.0, size=size)
    return ExpSum(coefs, exps, rng.integers(0, 3, size=size))


class TestAlgebra:
    def test_eval_matches_terms(self):
        np.testing.assert_allclose(damped().eval(TIMES), reference(TIMES), rtol=1e-14)
        assert isinstance(damped()(0.7), complex)

    def test_merge_combines_and_drops(self):
        f = ExpSum([1.0, 2.0, -3.0], [-1.0, -1.0 + 1e-14, -1.0])
        assert len(f) == 0
        g = ExpSum([1.0, 1.0], [-2.0, -2.0], [0, 1])
        assert len(g) == 2

    def test_add_sub_scale(self):
        f = damped()
        np.testing.assert_allclose((f + f - f.scale(0.5)).eval(TIMES), 1.5 * reference(TIMES), rtol=1e-13)
        np.testing.assert_allclose((1.0 - f).eval(TIMES), 1.0 - reference(TIMES), rtol=1e-13)

    def test_multiply(self):
        f = damped()
        g = ExpSum.exponential(-0.7, 3.0)
        np.testing.assert_allclose((f * g).eval(TIMES), reference(TIMES) * 3 * np.exp(-0.7 * TIMES), rtol=1e-13)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_product_commutes_and_associates(self, seed):
        f, g, h = (random_sum(seed * 3 + k) for k in range(3))
        pointwise = f.eval(TIMES) * g.eval(TIMES) * h.eval(TIMES)
        np.testing.assert_allclose((f * g).eval(TIMES), (g * f).eval(TIMES), rtol=1e-12, atol=1e-14)
        np.testing.assert_allclose(((f * g) * h).eval(TIMES), pointwise, rtol=1e-11, atol=1e-13)
        np.testing.assert_allclose((f * (g * h)).eval(TIMES), pointwise, rtol=1e-11, atol=1e-13)
        F = (f * g).integrate_0_to_t()
        for t in TIMES[1:]:
            re = integrate.quad(lambda s: (f.eval(s) * g.eval(s)).real, 0, t, epsabs=1e-13)[0]
            im = integrate.quad(lambda s: (f.eval(s) * g.eval(s)).imag, 0, t, epsabs=1e-13)[0]
            np.testing.assert_allclose(F.eval(t), re + 1j * im, atol=1e-10)

    def test_shifted(self):
        np.testing.assert_allclose(damped().shifted(0.4).eval(TIMES), np.exp(0.4 * TIMES) * reference(TIMES),
                                   rtol=1e-13)

    def test_at_zero(self):
        assert damped().at_zero() == pytest.approx(2.25)

    def test_precision_mismatch(self):
        with pytest.raises(ValueError, match="precision mismatch"):
            damped() + ExpSum([1.0], [-1.0], dps=30)


class TestCalculus:
    def test_derivative(self):
        f = damped()
        h = 1e-6
        numeric = (reference(TIMES[1:] + h) - reference(TIMES[1:] - h)) / (2 * h)
        np.testing.assert_allclose(f.derivative().eval(TIMES[1:]), numeric, rtol=1e-8)

    def test_integral_against_quadrature(self):
        F = damped().integrate_0_to_t()
        for t in TIMES:
            re = integrate.quad(lambda s: reference(s).real, 0, t, epsabs=1e-13)[0]
            im = integrate.quad(lambda s: reference(s).imag, 0, t, epsabs=1e-13)[0]
            np.testing.assert_allclose(F.eval(t), re + 1j * im, atol=1e-11)

    def test_integral_of_vanishing_exponent_raises_power(self):
        F = ExpSum([3.0], [0.0], [2]).integrate_0_to_t()
        assert F.terms() == [(1.0 + 0j, 0j, 3)]

    @pytest.mark.parametrize("seed", [3, 4])
    def test_derivative_undoes_integral(self, seed):
        f = random_sum(seed, size=4)
        np.testing.assert_allclose(f.integrate_0_to_t().derivative().eval(TIMES), f.eval(TIMES),
                                   rtol=1e-10, atol=1e-12)

    def test_integral_starts_at_zero(self):
        assert abs(damped().integrate_0_to_t().eval(0.0)) < 1e-14


class TestSeparation:
    def test_split_difference_reconstructs(self):
        f = damped()
        pairs = split_difference(f)
        for t, s in [(1.0, 0.2), (3.0, 2.5), (0.5, 0.5)]:
            total = sum(T.eval(t) * S.eval(s) for T, S in pairs)
            np.testing.assert_allclose(total, reference(t - s), rtol=1e-12)

    def test_abs_kernel_convolution_against_quadrature(self):
        f = ExpSum([1.0, 0.5], [-1.0, -0.2 + 0.7j])
        g = ExpSum([2.0], [-0.5], [1])
        lam = 0.8
        t = 1.7

        def integrand(y, x, part):
            value = f.eval(x) * math.exp(-lam * abs(x - y)) * g.eval(y)
            return value.real if part == "re" else value.imag

        expected = 0j
        for part, unit in (("re", 1.0), ("im", 1j)):
            lower = integrate.dblquad(integrand, 0, t, 0, lambda x: x, args=(part,), epsabs=1e-12)[0]
            upper = integrate.dblquad(integrand, 0, t, lambda x: x, t, args=(part,), epsabs=1e-12)[0]
            expected += unit * (lower + upper)
        np.testing.assert_allclose(convolve_abs_kernel(f, g, lam, t), expected, rtol=1e-8)
        assert abs(abs_kernel_convolution(f, g, lam).eval(0.0)) < 1e-12


class TestLinearODE:
    def test_distinct_roots(self):
        x = solve_linear_ode([1.0, 3.0, 2.0], [1.0, 0.0])
        np.testing.assert_allclose(x.eval(TIMES), 2 * np.exp(-TIMES) - np.exp(-2 * TIMES), rtol=1e-12, atol=1e-15)

    def test_confluent_roots(self):
        x = solve_linear_ode([1.0, 2.0, 1.0], [1.0, 0.0])
        np.testing.assert_allclose(x.eval(TIMES), (1 + TIMES) * np.exp(-TIMES), rtol=1e-7)
        assert sorted(x.powers.tolist()) == [0, 1]

    def test_cubic_satisfies_equation(self):
        poly = [1.0, 0.6, 0.11, 0.006]
        x = solve_linear_ode(poly, [1.0, 0.0, -0.01])
        d1, d2, d3 = x.derivative(), x.derivative().derivative(), x.derivative().derivative().derivative()
        residual = d3.eval(TIMES) + 0.6 * d2.eval(TIMES) + 0.11 * d1.eval(TIMES) + 0.006 * x.eval(TIMES)
        np.testing.assert_allclose(residual, 0, atol=1e-12)
        np.testing.assert_allclose([x.at_zero(), d1.at_zero(), d2.at_zero()], [1.0, 0.0, -0.01], atol=1e-13)

    def test_initial_value_count(self):
        with pytest.raises(ValueError, match="initial values"):
            solve_linear_ode([1.0, 1.0, 1.0], [1.0])


class TestRoots:
    def test_polish_in_extended_precision(self):
        roots = polynomial_roots([1.0, 0.0, -2.0], dps=40)
        with mpmath.workdps(40):
            assert min(abs(z - mpmath.sqrt(2)) for z in roots) < mpmath.mpf(10) ** -35

    def test_cluster_roots(self):
        clusters = cluster_roots([1.0, 1.0 + 1e-9, -3.0])
        assert sorted(m for _, m in clusters) == [1, 2]


class TestExtendedPrecision:
    def test_matches_double_precision(self):
        poly = [1.0, 0.5, 0.04]
        x_float = solve_linear_ode(poly, [1.0, 0.0])
        x_mp = solve_linear_ode(poly, [1.0, 0.0], dps=40)
        values = np.array([complex(v) for v in x_mp.eval(TIMES)])
        np.testing.assert_allclose(values, x_float.eval(TIMES), rtol=1e-12)

    def test_resolves_cancellation(self):
        # (e^{-eps t} - 1) / eps at tiny eps: double precision loses every digit
        eps = 1e-20
        f = ExpSum([1.0 / eps, -1.0 / eps], [-eps, 0.0], dps=50)
        with mpmath.workdps(50):
            assert abs(complex(f.eval(2.0)) + 2.0) < 1e-12
