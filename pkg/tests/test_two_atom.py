import math

import numpy as np
import pytest
from scipy.integrate import dblquad, solve_ivp

from analytic import (
    build_pair_propagators,
    canonical_rates,
    critical_degenerate_lambda,
    markovian_cascade,
    noncanonical_rates,
    pair_excitation,
    pair_gamma_matrix,
    pair_intensity,
    pair_overlap_integrals,
    pair_populations,
    pair_rate_trace,
    pair_trace,
    population_ode_rhs,
)
from model import DegenerateParametersError, ParameterError, markovian_rate

RATIOS = [0.5, 0.9024, 5.0]


@pytest.fixture(scope="module")
def pair_cache():
    cache = {}

    def get(p, dps=None):
        key = (p.lam, dps)
        if key not in cache:
            cache[key] = build_pair_propagators(p, dps=dps)
        return cache[key]
    return get


class TestPropagators:
    @pytest.mark.parametrize("ratio", RATIOS)
    def test_initial_state(self, make_params, pair_cache, ratio):
        p = make_params(2, ratio)
        pp = pair_cache(p)
        assert pair_excitation(pp, 0.0) == pytest.approx(2.0, abs=1e-12)
        assert abs(pair_intensity(pp, p, 0.0)) < 1e-15
        i1, i2 = pair_overlap_integrals(pp, p, 0.0)
        assert abs(i1) < 1e-12 and abs(i2) < 1e-12

    @pytest.mark.parametrize("ratio", RATIOS)
    def test_zeta_solves_cubic(self, make_params, pair_cache, ratio):
        p = make_params(2, ratio)
        zeta = pair_cache(p).zeta
        d1 = zeta.derivative()
        d2 = d1.derivative()
        d3 = d2.derivative()
        t = np.linspace(0.0, 5e3, 51)
        lam, g2 = p.lam, p.gamma0 ** 2
        residual = d3.eval(t) + 3 * lam * d2.eval(t) + (2 * lam ** 2 + 3 * g2) * d1.eval(t) + 2 * lam * g2 * zeta.eval(t)
        np.testing.assert_allclose(residual, 0.0, atol=1e-9 * (lam + p.gamma0) ** 3)

    @pytest.mark.parametrize("ratio", RATIOS)
    def test_populations_are_probabilities(self, make_params, pair_cache, ratio):
        p = make_params(2, ratio)
        t = np.linspace(0.0, 2e4, 401)
        p2, p1, p0 = pair_populations(pair_cache(p), t)
        np.testing.assert_allclose(p2 + p1 + p0, 1.0, atol=1e-12)
        for population in (p2, p1, p0):
            assert np.all(population > -1e-9) and np.all(population < 1 + 1e-9)

    def test_intensity_is_excitation_loss_rate(self, make_params, pair_cache):
        p = make_params(2, 0.5)
        pp = pair_cache(p)
        t = np.linspace(0.0, 2e4, 20001)
        numeric = -p.omega0 * np.gradient(pair_excitation(pp, t), t)
        np.testing.assert_allclose(pair_intensity(pp, p, t)[1:-1], numeric[1:-1], atol=1e-8)

    def test_extended_precision_agrees(self, make_params, pair_cache):
        p = make_params(2, 5.0)
        t = np.linspace(0.0, 2e4, 41)
        precise = pair_cache(p, dps=30)
        assert precise.dps == 30
        np.testing.assert_allclose(pair_excitation(precise, t), pair_excitation(pair_cache(p), t), rtol=1e-8)

    def test_approaches_markovian_cascade_for_broad_line(self, make_params):
        p = make_params(2, 50.0)
        grid = np.linspace(0.0, 10 / markovian_rate(p), 201)
        exact = pair_trace(p, grid)
        reference = markovian_cascade(p, grid)
        np.testing.assert_allclose(exact.excitation, reference.excitation, atol=5e-3)
        # the exact intensity starts at zero and catches up within a few 1/lambda
        np.testing.assert_allclose(exact.intensity[1:], reference.intensity[1:], atol=5e-3 * reference.intensity.max())


class TestOverlapIntegrals:
    @pytest.mark.parametrize("ratio", [0.5, 5.0])
    @pytest.mark.parametrize("gamma_t", [1.0, 5.0])
    def test_i2_matches_double_quadrature(self, make_params, pair_cache, ratio, gamma_t):
        p = make_params(2, ratio)
        pp = pair_cache(p)
        zeta_rate = pp.zeta.derivative()
        t = gamma_t / p.gamma0

        def h(s):
            value = pp.upsilon.eval(t - s) * pp.zeta.eval(s) + pp.eta.eval(t - s) * zeta_rate.eval(s)
            return float(np.real(value))

        # symmetric integrand: twice the s2 < s1 triangle
        triangle, _ = dblquad(lambda s2, s1: h(s1) * math.exp(-p.lam * (s1 - s2)) * h(s2),
                              0.0, t, 0.0, lambda s1: s1, epsabs=0.0, epsrel=1e-10)
        expected = 2 * p.gamma0 ** 2 * triangle
        assert float(np.real(pp.i2.eval(t))) == pytest.approx(expected, rel=1e-7)


class TestDegenerateWidth:
    def test_collision_raises(self, make_params):
        lam_c = critical_degenerate_lambda(1e-3)
        p = make_params(2).with_lambda(lam_c)
        with pytest.raises(DegenerateParametersError, match="collide") as info:
            build_pair_propagators(p)
        assert info.value.context["lambda_degenerate"] == pytest.approx(lam_c)

    def test_confluent_basis_when_allowed(self, make_params):
        p = make_params(2).with_lambda(critical_degenerate_lambda(1e-3))
        pp = build_pair_propagators(p, allow_degenerate=True)
        assert any(power > 0 for power in pp.zeta.powers.tolist())
        t = np.linspace(0.0, 2e4, 101)
        p2, p1, p0 = pair_populations(pp, t)
        np.testing.assert_allclose(p2 + p1 + p0, 1.0, atol=1e-12)
        assert pair_excitation(pp, 0.0) == pytest.approx(2.0, abs=1e-9)


class TestMasterEquation:
    @pytest.mark.parametrize("ratio", [0.5, 5.0])
    def test_population_equations_reproduce_propagators(self, make_params, pair_cache, ratio):
        p = make_params(2, ratio)
        pp = pair_cache(p)
        g = pair_gamma_matrix(pp, p)
        zeta, zeta_rate = pp.zeta, pp.zeta.derivative()
        i2_rate = pp.i2.derivative()
        for t in (150.0, 900.0, 2400.0):
            rhs = population_ode_rhs(g, t, pair_populations(pp, t))
            expected_p2 = 2 * (zeta.eval(t) * zeta_rate.eval(t)).real
            assert rhs[0] == pytest.approx(expected_p2, rel=1e-6, abs=1e-15)
            assert rhs[1] == pytest.approx(i2_rate.eval(t).real, rel=1e-6, abs=1e-15)
            assert sum(rhs) == pytest.approx(0.0, abs=1e-15)

    def test_integrated_populations_follow_propagators(self, make_params, pair_cache):
        p = make_params(2, 5.0)
        pp = pair_cache(p)
        g = pair_gamma_matrix(pp, p)
        times = np.linspace(0.0, 5e3, 51)
        solution = solve_ivp(lambda t, y: population_ode_rhs(g, t, y), (0.0, times[-1]), [1.0, 0.0, 0.0],
                             t_eval=times, method="DOP853", rtol=1e-10, atol=1e-12)
        assert solution.success
        p2, p1, p0 = pair_populations(pp, times)
        np.testing.assert_allclose(solution.y[0], p2, atol=1e-6)
        np.testing.assert_allclose(solution.y[1], p1, atol=1e-6)
        np.testing.assert_allclose(solution.y[2], p0, atol=1e-6)

    @pytest.mark.parametrize("ratio", [0.5, 0.9024, 2.0])
    def test_single_jump_rate_stays_positive(self, make_params, pair_cache, ratio):
        p = make_params(2, ratio)
        g = pair_gamma_matrix(pair_cache(p), p)
        t = np.linspace(1.0, 3e4, 600)
        collective, *_ = noncanonical_rates(g, t)
        regular = ~g.evaluate(t).singular
        assert regular.sum() > 500
        assert np.all(collective[regular] > 0)

    def test_canonical_rates_ordered(self, make_params, pair_cache):
        p = make_params(2, 5.0)
        t = np.linspace(10.0, 2e4, 200)
        gamma1, gamma2, _ = canonical_rates(pair_gamma_matrix(pair_cache(p), p), t)
        assert np.all(gamma1 >= gamma2)

    def test_gamma22_positive_for_overdamped_upsilon(self, make_params, pair_cache):
        p = make_params(2, 5.0)
        t = np.linspace(1.0, 2e4, 200)
        assert np.all(pair_gamma_matrix(pair_cache(p), p).gamma22(t) > 0)

    def test_collective_rate_positive_at_early_times(self, make_params, pair_cache):
        p = make_params(2, 5.0)
        t = np.linspace(1.0, 1 / p.gamma0, 100)
        collective, *_ = noncanonical_rates(pair_gamma_matrix(pair_cache(p), p), t)
        assert np.all(collective > 0)

    def test_gamma3_negative_for_broad_line(self, make_params, pair_cache):
        p = make_params(2, 10.0)
        t = np.linspace(0.0, 20 / p.lam, 41)[1:]
        _, _, gamma3 = canonical_rates(pair_gamma_matrix(pair_cache(p, dps=50), p), t)
        assert np.all(gamma3 < 0)

    def test_scalar_time_gives_scalar_rates(self, make_params, pair_cache):
        p = make_params(2, 5.0)
        rates = canonical_rates(pair_gamma_matrix(pair_cache(p), p), 500.0)
        assert all(isinstance(value, float) for value in rates)

    def test_rate_table_kinds(self, make_params):
        p = make_params(2, 5.0)
        grid = np.linspace(0.0, 1e3, 11)
        _, canonical, singular = pair_rate_trace(p, grid, "canonical")
        _, noncanonical, _ = pair_rate_trace(p, grid, "noncanonical")
        assert list(canonical) == ["gamma1", "gamma2", "gamma3"]
        assert list(noncanonical) == ["gamma1_tilde", "gamma2_tilde", "gamma3_tilde", "gamma4_tilde"]
        assert singular.shape == grid.shape and not singular.any()
        with pytest.raises(ValueError, match="unknown rate kind"):
            pair_rate_trace(p, grid, "diagonal")


def test_pair_trace_needs_two_atoms(make_params):
    with pytest.raises(ParameterError, match="n_atoms = 2"):
        pair_trace(make_params(3, 1.0))
