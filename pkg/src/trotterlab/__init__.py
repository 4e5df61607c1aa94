"""Numerical laboratory for operator-splitting observable errors on
semiclassical grid Hamiltonians.

Submodules
----------
numkit       dense Hermitian linear algebra (eig, expm, norms, Kronecker sums)
fourier      transform conventions, circulants, factored diagonal operators
symbols      phase-space symbols on the unit torus and their calculus
quantize     discrete Weyl quantization and semiclassical calculus checks
hamiltonian  grid discretizations of kinetic/potential operators, observables
evolve       exact and split-step propagators, Heisenberg error functionals
experiments  parameter sweeps, slope fits, machine-readable tables
cli          command-line front end and JSON configuration
"""

from .evolve import EvolutionPlan, SplittingScheme
from .hamiltonian import GridSpec, HamiltonianPair
from .quantize import QuantizationContext
from .symbols import SampledSymbol, TorusSymbol

__version__ = "0.1.0"

__all__ = [
    "EvolutionPlan",
    "SplittingScheme",
    "GridSpec",
    "HamiltonianPair",
    "QuantizationContext",
    "SampledSymbol",
    "TorusSymbol",
    "__version__",
]
