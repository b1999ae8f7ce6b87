"""Certified computations on Diophantine triples of the form {A K + ..., ...}.

Submodules:

* :mod:`dtriples.exact` - integer helpers and certified real arithmetic
* :mod:`dtriples.tuples` - D(n)-tuples, the parametric family, quintuple sieves
* :mod:`dtriples.pell` - simultaneous Pell equations and recurrence sequences
* :mod:`dtriples.bounds` - approximation measures and linear-form bounds
* :mod:`dtriples.reduction` - Baker-Davenport reduction and uniqueness checks
* :mod:`dtriples.cli` - command-line driver
"""

from .exact import InsufficientPrecision, RealApprox, Undecidable
from .tuples import (
    DTuple,
    FamilyTriple,
    Triple,
    d_minus,
    d_plus,
    d_plus_closed,
    family_triple,
    make_triple,
    verify_dtuple,
)

__version__ = "0.1.0"

__all__ = [
    "InsufficientPrecision",
    "RealApprox",
    "Undecidable",
    "DTuple",
    "FamilyTriple",
    "Triple",
    "d_minus",
    "d_plus",
    "d_plus_closed",
    "family_triple",
    "make_triple",
    "verify_dtuple",
]
