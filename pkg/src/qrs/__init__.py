"""Exact verification of multiple basic hypergeometric series identities."""
from .exact import format_rational, parse_rational, rat
from .identities import builtin_identity, verify_reduction, verify_terminating
from .identities.report import VERSION as __version__
from .multiindex import MultiIndex, iter_box
from .numeric import TruncationPlan, verify_truncated
from .qpoch import PochCache

__all__ = [
    "MultiIndex", "PochCache", "TruncationPlan", "__version__", "builtin_identity", "format_rational", "iter_box",
    "parse_rational", "rat", "verify_reduction", "verify_terminating", "verify_truncated",
]
