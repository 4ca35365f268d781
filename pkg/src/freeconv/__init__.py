"""Free convolution densities, atoms and superconvergence experiments.

Submodules
----------
measures
    discrete measures, node sets, moments and free cumulants
transforms
    Cauchy, F and self-energy transforms of discrete measures, Boolean powers
freeid
    freely infinitely divisible laws: boundary curve, densities, atoms
convpow
    free convolution powers of discrete measures by subordination
superconv
    triangular-array convergence reports
cli
    command-line interface
"""

from . import convpow, errors, freeid, measures, superconv, transforms
from .errors import FreeConvError

__all__ = ["convpow", "errors", "freeid", "measures", "superconv", "transforms", "FreeConvError"]
__version__ = "0.1.0"
