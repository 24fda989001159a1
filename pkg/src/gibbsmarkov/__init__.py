"""Cluster-expansion toolkit for quantum Gibbs states on spin graphs.

Builds quasi-local effective Hamiltonians of reduced Gibbs states, evaluates
log partition functions, local observables and entropies, and certifies the
decay of conditional mutual information — all cross-checked against exact
diagonalization at small sizes.
"""

from .spin_model import (
    FiniteRange,
    Hamiltonian,
    ModelError,
    PowerLaw,
    SpinGraph,
    ValidationError,
    build_graph,
    build_hamiltonian,
    load_model,
    save_model,
)
from .operators import OperatorError, PositivityError, SupportedOperator
from .clusters import Cluster, make_cluster

__version__ = "0.1.0"

__all__ = [
    "Cluster",
    "FiniteRange",
    "Hamiltonian",
    "ModelError",
    "OperatorError",
    "PositivityError",
    "PowerLaw",
    "SpinGraph",
    "SupportedOperator",
    "ValidationError",
    "build_graph",
    "build_hamiltonian",
    "load_model",
    "make_cluster",
    "save_model",
    "__version__",
]
