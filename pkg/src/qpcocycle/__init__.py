"""Numerical tools for quasi-periodic Schrodinger cocycles."""

from .cocycle import CocycleParams, amo, cos_deformed, orbit_product, polar, tabulated
from .frequency import Frequency, expand, golden, sqrt2m1, synth

__all__ = [
    "CocycleParams", "Frequency", "amo", "cos_deformed", "expand", "golden",
    "orbit_product", "polar", "sqrt2m1", "synth", "tabulated",
]
