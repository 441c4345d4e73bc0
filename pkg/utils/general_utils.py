import numpy as np
from absl import logging

from model.errors import AccuracyError

IMAGINARY_RESIDUE = 1e-9


def configure_logging(verbosity: int = 0, quiet: bool = False):
    """Set the absl verbosity for the whole process (called once by entry points)."""
    if quiet:
        logging.set_verbosity(logging.WARNING)
    elif verbosity > 0:
        logging.set_verbosity(logging.DEBUG)
        logging.set_stderrthreshold(logging.DEBUG)
    else:
        logging.set_verbosity(logging.INFO)
    logging.use_absl_handler()


def real_part(values, what: str = "value", scale=None):
    """Real part of a complex observable, asserting a negligible imaginary residue.

    The residue is compared against IMAGINARY_RESIDUE times the larger of the
    observable's own magnitude and an optional reference scale.
    """
    values = np.asarray(values)
    if values.dtype == object:
        values = np.array([complex(v) for v in values.ravel()]).reshape(values.shape)
    if not np.iscomplexobj(values):
        return values.astype(float)
    reference = np.max(np.abs(values), initial=0.0)
    if scale is not None:
        reference = max(reference, float(scale))
    residue = np.max(np.abs(values.imag), initial=0.0)
    if residue > IMAGINARY_RESIDUE * max(reference, np.finfo(float).tiny):
        raise AccuracyError(f"{what} has imaginary residue {residue:.3e}", residue=float(residue))
    return values.real.copy()


def sinhc(x):
    """sinh(x)/x for complex x, with a series branch around the origin."""
    x = np.asarray(x, dtype=complex)
    small = np.abs(x) < 1e-4
    safe = np.where(small, 1.0, x)
    x2 = x * x
    return np.where(small, 1 + x2 / 6 + x2 * x2 / 120, np.sinh(safe) / safe)


def atanhc(x):
    """atanh(x)/x for complex x, with a series branch around the origin."""
    x = np.asarray(x, dtype=complex)
    small = np.abs(x) < 1e-4
    safe = np.where(small, 0.5, x)
    x2 = x * x
    return np.where(small, 1 + x2 / 3 + x2 * x2 / 5, np.arctanh(safe) / safe)
