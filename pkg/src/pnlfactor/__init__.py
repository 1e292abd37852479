"""Integer factoring with the prime number lattices of Schnorr and Adleman."""

from .pipeline import FactorOptions, FactorReport, factor
from .prime_lattices import PnlConfig

__all__ = ["FactorOptions", "FactorReport", "PnlConfig", "factor"]
__version__ = "0.1.0"
