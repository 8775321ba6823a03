"""Fidelity of density elements in finite-dimensional tracial algebras."""
from .algebra import (AlgebraElement, Block, DensityElement, StepFunction, TracialAlgebra,
                      are_orthogonal, is_positive, modulus, polar, singular_value_function,
                      sqrt_psd, trace, trace_norm)
from .config import RunConfig
from .errors import FidlabError, NonConvergence, ValidationError
from .fidelity import (bures_distance, fidelity, fidelity_block_supremum, fidelity_routes,
                       fidelity_variational, fidelity_via_mu)

__version__ = "0.1.0"

__all__ = [
    "AlgebraElement", "Block", "DensityElement", "StepFunction", "TracialAlgebra",
    "are_orthogonal", "is_positive", "modulus", "polar", "singular_value_function",
    "sqrt_psd", "trace", "trace_norm", "RunConfig", "FidlabError", "NonConvergence",
    "ValidationError", "bures_distance", "fidelity", "fidelity_block_supremum",
    "fidelity_routes", "fidelity_variational", "fidelity_via_mu",
]
