"""Numerics for canonical systems with a j-flat Hamiltonian factorization."""

from ._cansys import (
    DomainError,
    FormatError,
    NumericalError,
    SingularError,
    builtin_names,
    closed_form_example23,
    closed_form_example64,
    convolution_residual,
    extract_phi1,
    factorization,
    fundamental,
    normalized_E,
    quadratic_roots,
    series,
    validate_beta,
    weyl_function,
)

__version__ = "0.4.0"
