"""Real-eigenvalue statistics of the real elliptic Ginibre ensemble.

Exact finite-N probabilities come from the eigenvalues of the n x n
generating matrix M_n(tau) (N = 2n); limit constants, large-deviation and
generating-function checks, and a Monte Carlo sampler build on them.
"""

__version__ = "0.1.0"

from .errors import ConfigurationError, ConsistencyError, EginoeError, InvariantError, NumericalError
from .genmatrix import GeneratingMatrix, build
from .probabilities import RealCountDistribution, distribution
from .spectrum import Spectrum, compute_spectrum, trace_power

__all__ = [
    "ConfigurationError",
    "ConsistencyError",
    "EginoeError",
    "GeneratingMatrix",
    "InvariantError",
    "NumericalError",
    "RealCountDistribution",
    "Spectrum",
    "build",
    "compute_spectrum",
    "distribution",
    "trace_power",
]
