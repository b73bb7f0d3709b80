"""Numerical tests of holomorphic extension from circles.

The package samples functions of ``z`` and ``conj(z)`` on circles, measures
how far their boundary values are from extending holomorphically to the
disc, and checks the geometry of the complex curves in C^2 that such
extensions live on.
"""
__version__ = "0.1.0"

from .circles import (Circle, BoundarySpectrum, DefectReport, extension_defect,
                      rational_extension_eval, rational_pole_scan,
                      sample_on_circle, spectral_extension_eval, spectrum)
from .expr import FunctionModel, evaluate, parse, to_text

__all__ = [
    "Circle", "BoundarySpectrum", "DefectReport", "FunctionModel",
    "evaluate", "extension_defect", "parse", "rational_extension_eval",
    "rational_pole_scan", "sample_on_circle", "spectral_extension_eval",
    "spectrum", "to_text", "__version__",
]
