"""
Derived quantities: radiation regimes, critical spectral width, scaling
exponents, reabsorption depth and the broad-line eternal non-Markovianity check.
"""

from analysis.eternal import EternalReport, eternal_nm_check, g_function, leading_order_gamma3
from analysis.regimes import (
    CRITICAL_PULSED,
    MARKOVIAN,
    NON_MARKOVIAN,
    RegimeReport,
    analysis_window,
    classify_regime,
    intensity_epsilon,
    min_intensity,
    simulate,
    trace_extrema,
)
from analysis.scaling import (
    ExponentRow,
    ExponentTable,
    ReabsorptionTable,
    RelaxationEstimate,
    bracket_critical_lambda,
    critical_lambda_scan,
    default_bracket,
    find_critical_lambda,
    local_exponent,
    peak_intensity,
    reabsorbs,
    reabsorption_scan,
    relaxation_time,
)
