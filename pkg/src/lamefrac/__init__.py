"""Spectral toolkit for fractional powers of the parabolic Lame operator.

Submodules: :mod:`symbol` (frequency-side algebra), :mod:`macdonald`
(Bessel K of complex argument), :mod:`grid` (periodic space-time fields),
:mod:`extension` (closed-form extension problem), :mod:`modal` and
:mod:`reduction` (reduced system and W-transform), :mod:`checks`/:mod:`cli`
(verification harness).
"""
from .errors import LameFracError
from .symbol import FreqPoint, LameParams, frac_power, symbol_matrix, validate_params

__all__ = ["LameFracError", "FreqPoint", "LameParams", "frac_power", "symbol_matrix",
           "validate_params"]
__version__ = "0.1.0"
