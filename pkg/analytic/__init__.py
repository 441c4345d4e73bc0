"""
Closed-form solutions: one emitter, two emitters with their exact
time-local master equation, and the Markovian references.
"""

from analytic.markovian import markovian_cascade, meanfield_delay, meanfield_intensity
from analytic.single_atom import (
    SingleExtrema,
    single_amplitude,
    single_decay_rate,
    single_excitation,
    single_extrema,
    single_intensity,
    single_rate_poles,
    single_total_excitation,
    single_trace,
)
from analytic.two_atom import (
    GammaMatrix,
    GammaSamples,
    PairPropagators,
    build_pair_propagators,
    canonical_rates,
    critical_degenerate_lambda,
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
