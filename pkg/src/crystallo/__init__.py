"""Finite universal-algebra workbench: internal structures, congruences, verdicts."""

from .kernels import BACKEND
from .specs import (
    App,
    Const,
    Equation,
    Signature,
    Var,
    VarietyPresentation,
    check_identities,
    eval_term,
    parse_algebra,
    parse_variety,
)
from .algebra import FiniteAlgebra, Homomorphism, enumerate_homs, enumerate_models, product

__version__ = "0.1.0"
