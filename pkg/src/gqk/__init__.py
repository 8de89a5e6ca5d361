"""Exact supercommutative algebra for Lie algebroids, bialgebroids and double vector bundles."""

from .superpoly import EVEN, ODD, Chart, Coordinate, SuperPolynomial, polynomial, to_text
from .geometry import Transition, VectorField, commutator, divergence, is_homological
from .brackets import BracketStructure, jacobi_check
from .algebroid import AlgebroidData, from_structure_constants, to_antialgebroid, from_antialgebroid
from .doubles import DoubleVectorBundle, VectorBundle, dualize, pairing_check
from .drinfeld import BialgebroidData, drinfeld_double
from .dsl import parse, serialize
from .report import Report

__version__ = "0.1.0"

__all__ = [
    "EVEN",
    "ODD",
    "Chart",
    "Coordinate",
    "SuperPolynomial",
    "polynomial",
    "to_text",
    "Transition",
    "VectorField",
    "commutator",
    "divergence",
    "is_homological",
    "BracketStructure",
    "jacobi_check",
    "AlgebroidData",
    "from_structure_constants",
    "to_antialgebroid",
    "from_antialgebroid",
    "DoubleVectorBundle",
    "VectorBundle",
    "dualize",
    "pairing_check",
    "BialgebroidData",
    "drinfeld_double",
    "parse",
    "serialize",
    "Report",
]
