"""Built-in identities and their verification drivers."""
from .reductions import REDUCTIONS, Reduction, reduce_to_n1, verify_reduction
from .registry import IDS, IdentitySpec, Param, all_identities, builtin_identity
from .replay import REPLAYS, ReplayMismatch, replay_proof
from .report import VerificationReport, format_residual
from .verify import verify_terminating

__all__ = [
    "IDS", "REDUCTIONS", "REPLAYS", "IdentitySpec", "Param", "Reduction", "ReplayMismatch", "VerificationReport",
    "all_identities", "builtin_identity", "format_residual", "reduce_to_n1", "replay_proof", "verify_reduction",
    "verify_terminating",
]
