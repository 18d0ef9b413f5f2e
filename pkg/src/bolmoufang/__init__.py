"""Finite magmas, Bol-Moufang identities, and exhaustive model search."""

from .magma import Magma, PropertyReport, Sided, StructureSpec, analyze, parse_table, format_table
from .term import BMCode, Identity, decode_bm, encode_bm, enumerate_bm, dual_identity, holds, eval_term
from .finder import SearchProblem, SearchOutcome, Target, Status, search, enumerate_models, verify_absence

__version__ = "0.1.0"

__all__ = [
    "Magma", "PropertyReport", "Sided", "StructureSpec", "analyze", "parse_table", "format_table",
    "BMCode", "Identity", "decode_bm", "encode_bm", "enumerate_bm", "dual_identity", "holds", "eval_term",
    "SearchProblem", "SearchOutcome", "Target", "Status", "search", "enumerate_models", "verify_absence",
]
