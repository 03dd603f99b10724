"""Twisted multi-shift models, Wold structure, Berezin kernels, and checks."""

from .phases import Phase, PhaseMatrix, TwistError, validate_lambda
from .words import MultiWord, Word, enumerate_basis
from .rewrite import Letter, StarPolynomial, reduce_word
from .fockmodel import TruncatedModel
from .polyball import RowTuple, check_doubly, check_membership, check_pure
from .berezin import berezin_kernel, berezin_transform, minimal_dilation, vn_check
from .wold import SpecPiece, TupleSpec, assemble, wandering_data, wold_projections
from .beurling import SubspaceHandle, beurling_factorize, coinvariant_span

__version__ = "0.1.0"

__all__ = [
    "Phase", "PhaseMatrix", "TwistError", "validate_lambda",
    "MultiWord", "Word", "enumerate_basis",
    "Letter", "StarPolynomial", "reduce_word",
    "TruncatedModel",
    "RowTuple", "check_doubly", "check_membership", "check_pure",
    "berezin_kernel", "berezin_transform", "minimal_dilation", "vn_check",
    "SpecPiece", "TupleSpec", "assemble", "wandering_data", "wold_projections",
    "SubspaceHandle", "beurling_factorize", "coinvariant_span",
]
