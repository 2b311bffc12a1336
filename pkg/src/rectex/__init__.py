"""Exact computation with rectangle exchange transformations.

Scalars live in a finite-dimensional Q-vector space spanned by declared
symbols (1, square roots, opaque reals) and are compared exactly.  On top of
that sit boxes and multirectangles, piecewise translations of the unit cube,
their tensor-valued invariants, factorization into restricted shuffles,
lattice fundamental domains, and a JSON document format with a CLI.
"""

__version__ = "0.1.0"

from .scalar import PrecisionExhausted, Scalar, SymbolTable, compare
from .geometry import GridPattern, Multirectangle, Rectangle, RectPartition
from .recmap import (
    FlipMap,
    Piece,
    RecMap,
    Shuffle,
    Transposition,
    compose_all,
    identity,
    is_restricted_shuffle,
    mk_iet_lift,
    mk_restricted_shuffle,
    mk_transposition,
    rec_compose,
    rec_equal,
    rec_inverse,
    rec_validate,
)
from .invariants import TensorValue, is_in_derived, is_in_gtg, rec_isomorphism, saf, vol_tensor
from .qfree import SearchBudgetExceeded, is_setwise_qfree, refine_grid_qfree, simplicial_refine
from .decompose import decompose_involution, decompose_shuffles, grid_to_grid_decompose, transposition_to_shuffles
from .lattice import Lattice, fundamental_domain, torus_vol
from .sampling import random_recmap

__all__ = [
    "__version__",
    "PrecisionExhausted",
    "Scalar",
    "SymbolTable",
    "compare",
    "GridPattern",
    "Multirectangle",
    "Rectangle",
    "RectPartition",
    "FlipMap",
    "Piece",
    "RecMap",
    "Shuffle",
    "Transposition",
    "compose_all",
    "identity",
    "is_restricted_shuffle",
    "mk_iet_lift",
    "mk_restricted_shuffle",
    "mk_transposition",
    "rec_compose",
    "rec_equal",
    "rec_inverse",
    "rec_validate",
    "TensorValue",
    "is_in_derived",
    "is_in_gtg",
    "rec_isomorphism",
    "saf",
    "vol_tensor",
    "SearchBudgetExceeded",
    "is_setwise_qfree",
    "refine_grid_qfree",
    "simplicial_refine",
    "decompose_involution",
    "decompose_shuffles",
    "grid_to_grid_decompose",
    "transposition_to_shuffles",
    "Lattice",
    "fundamental_domain",
    "torus_vol",
    "random_recmap",
]
