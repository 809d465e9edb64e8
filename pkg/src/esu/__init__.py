"""Entanglement storage toolkit.

Steers collective spin models into long-lived entangled eigenstates with
randomized-basis pulse optimization, and measures how long those states
survive under random telegraph noise.
"""

__version__ = "0.1.0"

from esu.hilbert import (
    HermitianMatrix,
    SpectralDecomposition,
    StateVector,
    eig_hermitian,
    energy_stats,
    propagate_step,
)

__all__ = [
    "HermitianMatrix",
    "SpectralDecomposition",
    "StateVector",
    "eig_hermitian",
    "energy_stats",
    "propagate_step",
    "__version__",
]
