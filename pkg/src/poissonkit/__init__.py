"""Poissonization of finite-dimensional von Neumann algebras with faithful weights.

Closed-form moment, Gram, modular and entropy formulas together with a truncated
GNS oracle that checks them numerically.
"""

__version__ = "0.1.0"

from .algebra import (
    Algebra,
    AlgebraElement,
    DimensionError,
    FaithfulnessError,
    Weight,
    connes_cocycle,
    diagonal_weight,
    modular_flow,
    tracial_weight,
    triple_norm,
    weight_eval,
    weight_from_density,
)
from .fock import PoissonWord, WordKind, gram_empty, gram_fock
from .gns import TruncatedGnsSpace, TruncatedGnsVector, apply_gamma, apply_lambda, vacuum
from .moments import MomentQuery, bernoulli_moment, characteristic, classical_pmf, poisson_moment
from .partitions import SetPartition, bell, enumerate_partitions, permanent, stirling2

__all__ = [
    "Algebra",
    "AlgebraElement",
    "DimensionError",
    "FaithfulnessError",
    "MomentQuery",
    "PoissonWord",
    "SetPartition",
    "TruncatedGnsSpace",
    "TruncatedGnsVector",
    "Weight",
    "WordKind",
    "apply_gamma",
    "apply_lambda",
    "bell",
    "bernoulli_moment",
    "characteristic",
    "classical_pmf",
    "connes_cocycle",
    "diagonal_weight",
    "enumerate_partitions",
    "gram_empty",
    "gram_fock",
    "modular_flow",
    "permanent",
    "poisson_moment",
    "stirling2",
    "tracial_weight",
    "triple_norm",
    "vacuum",
    "weight_eval",
    "weight_from_density",
]
