"""
Domain types, parameter validation and shared constants.
"""

from model.errors import (
    AccuracyError,
    BracketError,
    CapacityError,
    ConfigError,
    DegenerateParametersError,
    ExponentDataError,
    IncompleteTraceError,
    ParameterError,
    PoleError,
    StiffnessError,
    SuperradianceError,
    UndefinedRateError,
)
from model.intensity_trace import IntensityTrace
from model.system_params import (
    DEFAULT_GAMMA0,
    DerivedFrequencies,
    SystemParams,
    decay_horizon,
    derived_frequencies,
    horizon_cap,
    markovian_rate,
    markovianity_indicator,
    oscillation_period,
    validate_params,
)

__version__ = "1.0.0"
