"""Resonance fluorescence of a driven two-level atom by three routes:
closed form, master-equation regression, and the resolvent construction."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    ConvergenceError,
    NoSteadyStateError,
    ParameterError,
    RWAValidityWarning,
    StateVector,
    SystemParams,
    make_params,
)

__all__ = [
    "ConvergenceError",
    "NoSteadyStateError",
    "ParameterError",
    "RWAValidityWarning",
    "StateVector",
    "SystemParams",
    "make_params",
]
