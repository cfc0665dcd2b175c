"""Exact characters, branching links and coherent Markov dynamics for the
quantum groups of types B, C and D."""

__version__ = "0.1.0"

from .laurent import BaseParam, LaurentPoly
from .characters import (
    CharacterPoly,
    InvalidSignature,
    basis_poly,
    character,
    qdimension,
    weyl_denominator,
    weyl_dimension,
)
from .branching import LinkRow, SignatureMeasure, link_row, pushforward, restrict
from .coherent import OmegaParams, coherent_measure, fourier_coefficients, phi_coefficients
from .markov import GeneratorMatrix, generator, intertwining_check, semigroup, simulate, simulate_many

__all__ = [
    "BaseParam",
    "LaurentPoly",
    "CharacterPoly",
    "InvalidSignature",
    "basis_poly",
    "character",
    "qdimension",
    "weyl_denominator",
    "weyl_dimension",
    "LinkRow",
    "SignatureMeasure",
    "link_row",
    "pushforward",
    "restrict",
    "OmegaParams",
    "coherent_measure",
    "fourier_coefficients",
    "phi_coefficients",
    "GeneratorMatrix",
    "generator",
    "intertwining_check",
    "semigroup",
    "simulate",
    "simulate_many",
]
