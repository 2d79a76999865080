"""Numerical laboratory for L1-Poincare constants on the Hamming cube."""

import math

from .cube import CubeFunction, VectorField, WalshSpectrum
from .dualnorm import DualConfig, DualNormReport, SphereVector
from .kernel import KernelTable, kernel_table
from .khintchine import BiasedDist, CertifiedBound

__version__ = "0.1.0"

PI_OVER_2 = math.pi / 2
SQRT_PI_OVER_2 = math.sqrt(math.pi / 2)
SQRT_PI_HALF = math.sqrt(math.pi) / 2
DUAL_N2 = 3 / (2 * math.sqrt(2))

__all__ = [
    "BiasedDist",
    "CertifiedBound",
    "CubeFunction",
    "DualConfig",
    "DualNormReport",
    "KernelTable",
    "SphereVector",
    "VectorField",
    "WalshSpectrum",
    "kernel_table",
    "PI_OVER_2",
    "SQRT_PI_OVER_2",
    "SQRT_PI_HALF",
    "DUAL_N2",
]
