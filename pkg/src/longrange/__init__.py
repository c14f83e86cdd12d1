"""Long-range interactions between atoms and molecules.

Exact angular-momentum algebra, multipole expansions, perturbative Cn
coefficients from spectroscopic tables, and coupled-rotor potential curves.
"""

__version__ = "0.1.0"

from .angular import Surd, SurdSum, clebsch_gordan, wigner_6j, wigner_9j  # noqa: F401
from .spectra import DataError, ResonanceError, SpectrumTable  # noqa: F401
